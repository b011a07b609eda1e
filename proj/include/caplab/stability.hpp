#pragma once

#include "caplab/curvature.hpp"
#include "caplab/eigensolver.hpp"
#include "caplab/error.hpp"
#include "caplab/fields.hpp"
#include "caplab/mesh.hpp"
#include "caplab/operators.hpp"
#include "caplab/wedge.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace caplab {

/// I(f, f) = f^T A f = int |grad f|^2 - int |sigma|^2 f^2 - sum_i int_{Gamma_i} q_i f^2,
/// q_i = cot(theta_i) sigma(nu, nu).  c = M 1 realizes int f dA.
struct IndexFormSystem {
  SparseMatrix A;
  SparseMatrix M;
  VectorXd c;
  VectorXd q;             // per-vertex Robin coefficient (zero off supported boundary)
  VectorXd boundary_mass; // per-vertex line measure of supported boundary
  OperatorSet ops;
  double max_sigma_sq = 0.0;
  double area = 0.0;
};

struct StabilityVerdict {
  double lambda_min = 0.0;
  VectorXd eigenfunction;
  bool stable = false;
  double tol_used = 0.0;
  std::vector<double> eigenvalues;  // the computed low spectrum, ascending
  std::vector<double> residuals;
  double shift = 0.0;
};

inline constexpr double default_tol_factor = 0.05;

inline IndexFormSystem assemble_index_form(const LabeledTriMesh& mesh, const WallSet& walls, const GeometryFields& fields) {
  if (mesh.triangles.empty()) throw Error(ErrorKind::invalid_mesh, "empty mesh");
  if (fields.num_vertices() != mesh.num_vertices())
    throw Error(ErrorKind::dimension_mismatch, "fields and mesh differ in vertex count");
  for (double th : walls.angles)
    if (!(th > 0.0 && th < pi) || std::abs(std::sin(th)) < 1e-12)
      throw Error(ErrorKind::invalid_angle, "contact angle must lie strictly inside (0, pi)");

  IndexFormSystem sys;
  sys.ops = assemble_operators(mesh, walls.size());
  const Eigen::Index n = static_cast<Eigen::Index>(mesh.num_vertices());
  sys.M = sys.ops.M;
  sys.c = sys.ops.lumped;
  sys.area = sys.ops.area();
  sys.max_sigma_sq = fields.sigma_sq.maxCoeff();
  sys.q = VectorXd::Zero(n);
  sys.boundary_mass = VectorXd::Zero(n);
  for (const auto& b : fields.boundary) {
    if (b.wall < 0 || static_cast<std::size_t>(b.wall) >= walls.size()) continue;
    const double th = walls.angles[static_cast<std::size_t>(b.wall)];
    sys.q[b.vertex] = std::cos(th) / std::sin(th) * b.sigma_nn;
    sys.boundary_mass[b.vertex] = sys.ops.B[static_cast<std::size_t>(b.wall)][b.vertex];
  }
  SparseMatrix robin(n, n);
  std::vector<Eigen::Triplet<double>> t;
  for (Eigen::Index i = 0; i < n; ++i)
    if (sys.q[i] != 0.0 && sys.boundary_mass[i] != 0.0) t.emplace_back(i, i, sys.q[i] * sys.boundary_mass[i]);
  robin.setFromTriplets(t.begin(), t.end());
  sys.A = sys.ops.K - weighted_mass(mesh, fields.sigma_sq) - robin;
  sys.A = 0.5 * (SparseMatrix(sys.A.transpose()) + sys.A);
  return sys;
}

inline EigenResult min_constrained_eigenpairs(const IndexFormSystem& sys, int count = 1) {
  EigenOptions opt;
  opt.count = count;
  return min_constrained_eigenpairs(sys.A, sys.M, sys.c, opt);
}

inline double default_tolerance(const IndexFormSystem& sys) { return default_tol_factor * sys.max_sigma_sq; }

inline StabilityVerdict stability_verdict(const IndexFormSystem& sys, std::optional<double> tol = {}, int count = 1) {
  const EigenResult er = min_constrained_eigenpairs(sys, count);
  StabilityVerdict v;
  v.lambda_min = er.values[0];
  v.eigenfunction = er.vectors.col(0);
  v.tol_used = tol ? *tol : default_tolerance(sys);
  v.stable = v.lambda_min >= -v.tol_used;
  v.eigenvalues.assign(er.values.data(), er.values.data() + er.values.size());
  v.residuals.assign(er.residuals.data(), er.residuals.data() + er.residuals.size());
  v.shift = er.shift;
  return v;
}

/// |<f, g>_M| / (|f|_M |g|_M), after removing the mean of g so both live in the constraint space.
inline double m_correlation(const IndexFormSystem& sys, const VectorXd& f, VectorXd g) {
  g -= VectorXd::Constant(g.size(), sys.c.dot(g) / sys.area);
  const double fg = f.dot(sys.M * g), ff = f.dot(sys.M * f), gg = g.dot(sys.M * g);
  if (ff <= 0.0 || gg <= 0.0) return 0.0;
  return std::abs(fg) / std::sqrt(ff * gg);
}

// ---------------------------------------------------------------------------------------------
// test function

struct TestFunctionReport {
  VectorXd phi;
  Vec3 a = Vec3::Zero();
  Vec3 origin = Vec3::Zero();
  bool identity_mode = false;
  double mean_H = 0.0;
  double mean_residual = 0.0;
  std::vector<int> robin_vertices;
  std::vector<double> robin_residual;
  double robin_max = 0.0;
  double index_quadratic = 0.0;
  double index_closed = 0.0;
  double match_residual = 0.0;   // |index_quadratic - index_closed|
  double max_abs_phi = 0.0;
  double area = 0.0;
  double max_sigma_sq = 0.0;
  std::string note;
};

/// phi = 1 + H <psi - o, N> + <a, N> with o the common point of all walls nearest the boundary
/// centroid.
///
/// identity_mode drops the requirement that the walls share a point: a = 0 and o is a common
/// point of as many leading walls as possible (the first wall's base point in the worst case).
/// Only the quadratic-form identity is then meaningful; the mean and Robin residuals are still
/// reported.
inline TestFunctionReport build_test_function(const LabeledTriMesh& mesh, const WallSet& walls, const GeometryFields& fields,
                                              const Vec3& a, bool identity_mode = false) {
  const IndexFormSystem sys = assemble_index_form(mesh, walls, fields);
  TestFunctionReport r;
  r.identity_mode = identity_mode;
  r.area = sys.area;
  r.max_sigma_sq = sys.max_sigma_sq;

  std::vector<int> all(walls.size());
  for (std::size_t i = 0; i < walls.size(); ++i) all[i] = static_cast<int>(i);
  const Vec3 anchor = boundary_centroid(mesh);
  if (!identity_mode) {
    const auto o = common_point(walls, all, anchor);
    if (!o) throw Error(ErrorKind::no_common_origin, "the wall planes share no common point");
    r.origin = *o;
    r.a = a;
  } else {
    r.a = Vec3::Zero();
    for (std::size_t k = walls.size(); k > 0; --k) {
      std::vector<int> lead(all.begin(), all.begin() + static_cast<long>(k));
      if (const auto o = common_point(walls, lead, anchor)) {
        r.origin = *o;
        if (k < walls.size()) r.note = "origin on the first " + std::to_string(k) + " wall(s) only";
        break;
      }
    }
  }

  const Eigen::Index n = static_cast<Eigen::Index>(mesh.num_vertices());
  r.mean_H = sys.ops.lumped.dot(fields.H) / sys.area;
  const double H = r.mean_H;
  r.phi.resize(n);
  for (Eigen::Index v = 0; v < n; ++v) {
    const Vec3& N = fields.N[static_cast<std::size_t>(v)];
    r.phi[v] = 1.0 + H * (mesh.positions[static_cast<std::size_t>(v)] - r.origin).dot(N) + r.a.dot(N);
  }
  r.max_abs_phi = r.phi.cwiseAbs().maxCoeff();
  r.mean_residual = std::abs(sys.c.dot(r.phi)) / sys.area;

  const VectorXd defect = fields.sigma_sq.array() - surface_dim * H * H;  // |sigma|^2 - n H^2
  r.index_quadratic = r.phi.dot(sys.A * r.phi);
  r.index_closed = -r.phi.dot(sys.M * defect);
  r.match_residual = std::abs(r.index_quadratic - r.index_closed);

  // weak conormal flux of phi: int_bdry e_i d_nu phi = (K phi)_i + int e_i Lap(phi)
  const VectorXd flux = sys.ops.K * r.phi + sys.M * defect - weighted_mass(mesh, fields.sigma_sq) * r.phi;
  for (Eigen::Index v = 0; v < n; ++v) {
    if (sys.boundary_mass[v] <= 0.0) continue;
    const double res = std::abs(flux[v] - sys.q[v] * r.phi[v] * sys.boundary_mass[v]) / sys.boundary_mass[v];
    r.robin_vertices.push_back(static_cast<int>(v));
    r.robin_residual.push_back(res);
    r.robin_max = std::max(r.robin_max, res);
  }
  return r;
}

/// Uses the wedge vector of the walls (a = -cos(theta) n for a single wall).
inline TestFunctionReport build_test_function(const LabeledTriMesh& mesh, const WallSet& walls, const GeometryFields& fields) {
  std::vector<int> all(walls.size());
  for (std::size_t i = 0; i < walls.size(); ++i) all[i] = static_cast<int>(i);
  if (!common_point(walls, all)) throw Error(ErrorKind::no_common_origin, "the wall planes share no common point");
  Vec3 a = Vec3::Zero();
  if (!walls.empty()) a = solve_a(walls).a;
  return build_test_function(mesh, walls, fields, a, false);
}

// ---------------------------------------------------------------------------------------------
// first variation

namespace detail {

/// |sum of signed areas of the boundary loops on wall w|, measured in the wall plane.
inline double wetted_area(const LabeledTriMesh& mesh, const Topology& topo, const WallSet& walls, std::size_t w) {
  const Vec3 n = walls.walls[w].normal;
  double signed_area = 0.0;
  for (const auto& loop : topo.boundary_loops) {
    if (loop.empty() || mesh.label_of(loop.front()) != static_cast<int>(w)) continue;
    Vec3 acc = Vec3::Zero();
    for (std::size_t i = 0; i < loop.size(); ++i)
      acc += mesh.positions[loop[i]].cross(mesh.positions[loop[(i + 1) % loop.size()]]);
    signed_area += 0.5 * acc.dot(n);
  }
  return std::abs(signed_area);
}

inline double capillary_energy(const LabeledTriMesh& mesh, const Topology& topo, const WallSet& walls) {
  double e = surface_area(mesh);
  for (std::size_t w = 0; w < walls.size(); ++w) e -= std::cos(walls.angles[w]) * wetted_area(mesh, topo, walls, w);
  return e;
}

}  // namespace detail

/// Central difference (E(t=h) - E(t=-h)) / 2h of E = |Sigma| - sum cos(theta_i) |W_i| along the
/// deformation t f N. Boundary vertices move along N - cot(theta) nu, the direction with normal
/// component f that stays tangent to the wall, and are then projected onto the wall.
inline double first_variation_energy(const LabeledTriMesh& mesh, const WallSet& walls, const GeometryFields& fields,
                                     const VectorXd& f, double h) {
  const Eigen::Index n = static_cast<Eigen::Index>(mesh.num_vertices());
  if (f.size() != n || fields.num_vertices() != mesh.num_vertices())
    throw Error(ErrorKind::dimension_mismatch, "function, fields and mesh differ in size");
  if (!(h > 0.0)) throw Error(ErrorKind::invalid_spec, "step must be positive");
  const OperatorSet ops = assemble_operators(mesh, walls.size());
  const double cf = ops.lumped.dot(f);
  if (std::abs(cf) > 1e-8 * ops.lumped.norm() * f.norm())
    throw Error(ErrorKind::constraint_violation, "f is not mean-zero: int f dA = " + std::to_string(cf));
  const Topology topo = build_topology(mesh);

  std::vector<Vec3> dir(mesh.num_vertices());
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) dir[v] = fields.N[v];
  for (const auto& b : fields.boundary) {
    if (b.wall < 0 || static_cast<std::size_t>(b.wall) >= walls.size()) continue;
    const double th = walls.angles[static_cast<std::size_t>(b.wall)];
    dir[b.vertex] = fields.N[b.vertex] - std::cos(th) / std::sin(th) * b.nu;
  }
  auto energy_at = [&](double t) {
    LabeledTriMesh m = mesh;
    for (std::size_t v = 0; v < m.num_vertices(); ++v) m.positions[v] += t * f[static_cast<Eigen::Index>(v)] * dir[v];
    for (const auto& [v, w] : m.boundary_labels)
      if (w >= 0 && static_cast<std::size_t>(w) < walls.size()) m.positions[v] = walls.walls[w].project(m.positions[v]);
    return detail::capillary_energy(m, topo, walls);
  };
  return (energy_at(h) - energy_at(-h)) / (2.0 * h);
}

inline double first_variation_energy(const LabeledTriMesh& mesh, const WallSet& walls, const VectorXd& f, double h) {
  return first_variation_energy(mesh, walls, estimate_fields(mesh, walls), f, h);
}

}  // namespace caplab
