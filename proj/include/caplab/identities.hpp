#pragma once

#include "caplab/curvature.hpp"
#include "caplab/error.hpp"
#include "caplab/fields.hpp"
#include "caplab/mesh.hpp"
#include "caplab/operators.hpp"
#include "caplab/wedge.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace caplab {

/// One numerically evaluated identity lhs = rhs.
///
/// rel_residual = abs_residual / scale with scale = max(|lhs|, |rhs|, term_scale, 1e-12 area).
/// term_scale is the magnitude of the individual terms that cancel in the identity; it keeps the
/// relative residual meaningful when both sides vanish (closed surfaces, umbilical caps, symmetric
/// tubes).
struct IdentityReport {
  std::string name;
  std::vector<double> lhs;
  std::vector<double> rhs;
  double abs_residual = 0.0;
  double rel_residual = 0.0;
  double scale = 0.0;
  double tolerance = 0.02;
  std::string resolution;
  bool skipped = false;
  std::string note;

  bool passed() const { return skipped || rel_residual <= tolerance; }
};

/// Everything the checks share: mesh, walls, fields and the assembled operators.
struct IdentityInputs {
  const LabeledTriMesh* mesh = nullptr;
  const WallSet* walls = nullptr;
  const GeometryFields* fields = nullptr;
  OperatorSet ops;
  Topology topo;
  double area = 0.0;
  double mean_H = 0.0;
  double H_dispersion = 0.0;  // area-weighted standard deviation of H relative to |mean H|
  std::string resolution;

  const std::vector<Vec3>& positions() const { return mesh->positions; }
};

inline constexpr double cmc_dispersion_limit = 0.05;

inline IdentityInputs make_identity_inputs(const LabeledTriMesh& mesh, const WallSet& walls, const GeometryFields& fields,
                                           std::string resolution = {}) {
  if (mesh.triangles.empty() || mesh.positions.empty()) throw Error(ErrorKind::invalid_mesh, "empty mesh");
  if (fields.num_vertices() != mesh.num_vertices())
    throw Error(ErrorKind::dimension_mismatch, "fields and mesh differ in vertex count");
  IdentityInputs in;
  in.mesh = &mesh;
  in.walls = &walls;
  in.fields = &fields;
  in.ops = assemble_operators(mesh, walls.size());
  in.topo = build_topology(mesh);
  in.area = in.ops.area();
  in.mean_H = in.ops.lumped.dot(fields.H) / in.area;
  const VectorXd dev = fields.H.array() - in.mean_H;
  const double sd = std::sqrt(in.ops.lumped.dot(dev.cwiseProduct(dev)) / in.area);
  in.H_dispersion = std::abs(in.mean_H) > 0.0 ? sd / std::abs(in.mean_H) : (sd > 0.0 ? INFINITY : 0.0);
  in.resolution = std::move(resolution);
  return in;
}

namespace detail {

inline double norm_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline IdentityReport finish(const IdentityInputs& in, std::string name, std::vector<double> lhs, std::vector<double> rhs,
                             double term_scale, double tolerance = 0.02) {
  IdentityReport r;
  r.name = std::move(name);
  std::vector<double> diff(lhs.size());
  for (std::size_t i = 0; i < lhs.size(); ++i) diff[i] = lhs[i] - rhs[i];
  r.abs_residual = norm_of(diff);
  r.scale = std::max({norm_of(lhs), norm_of(rhs), term_scale, 1e-12 * in.area});
  r.rel_residual = r.abs_residual / r.scale;
  r.lhs = std::move(lhs);
  r.rhs = std::move(rhs);
  r.tolerance = tolerance;
  r.resolution = in.resolution;
  return r;
}

inline IdentityReport skipped(const IdentityInputs& in, std::string name, std::string why) {
  IdentityReport r;
  r.name = std::move(name);
  r.skipped = true;
  r.note = std::move(why);
  r.resolution = in.resolution;
  return r;
}

inline std::vector<double> as_vec(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

inline VectorXd per_vertex(std::size_t n, const auto& fn) {
  VectorXd out(static_cast<Eigen::Index>(n));
  for (std::size_t v = 0; v < n; ++v) out[static_cast<Eigen::Index>(v)] = fn(v);
  return out;
}

/// Sum over boundary vertices of wall `wall` (or the whole boundary when wall < 0) of b_v * g(v).
template <typename G>
double boundary_integral(const IdentityInputs& in, int wall, G g) {
  const VectorXd& b = wall < 0 ? in.ops.B_all : in.ops.B[static_cast<std::size_t>(wall)];
  double s = 0.0;
  for (const auto& bf : in.fields->boundary)
    if (wall < 0 || bf.wall == wall) s += b[bf.vertex] * g(bf);
  return s;
}

template <typename G>
Vec3 boundary_integral_vec(const IdentityInputs& in, int wall, G g) {
  const VectorXd& b = wall < 0 ? in.ops.B_all : in.ops.B[static_cast<std::size_t>(wall)];
  Vec3 s = Vec3::Zero();
  for (const auto& bf : in.fields->boundary)
    if (wall < 0 || bf.wall == wall) s += b[bf.vertex] * g(bf);
  return s;
}

inline std::vector<int> supported_walls(const IdentityInputs& in) {
  std::vector<int> out;
  for (std::size_t w = 0; w < in.walls->size(); ++w)
    if (in.ops.B[w].sum() > 0.0) out.push_back(static_cast<int>(w));
  return out;
}

/// Discrete dual norm of a weak residual restricted to interior rows: sqrt(sum r_i^2 / m_i).
inline double interior_dual_norm(const IdentityInputs& in, const VectorXd& r) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i)
    if (!in.topo.is_boundary(static_cast<int>(i))) s += r[i] * r[i] / in.ops.lumped[i];
  return std::sqrt(s);
}

}  // namespace detail

/// Boundary fully supported by walls and mean curvature constant within cmc_dispersion_limit.
inline bool is_capillary(const IdentityInputs& in) {
  for (const auto& b : in.fields->boundary)
    if (b.wall < 0) return false;
  return in.H_dispersion <= cmc_dispersion_limit;
}

inline std::string cmc_note(const IdentityInputs& in) {
  std::string note = "H_dispersion=" + std::to_string(in.H_dispersion);
  if (in.H_dispersion > cmc_dispersion_limit) note += "; not-cmc";
  return note;
}

/// n int N dA = int_{bdry} (<psi, nu> N - <psi, N> nu) ds. Holds for every immersion.
inline IdentityReport check_normal_integral(const IdentityInputs& in) {
  const auto& f = *in.fields;
  const auto& P = in.positions();
  const Vec3 lhs = surface_dim * integrate_vector(in.ops.M, f.N);
  const Vec3 rhs = detail::boundary_integral_vec(in, -1, [&](const BoundaryPointFields& b) -> Vec3 {
    const Vec3& p = P[b.vertex];
    return p.dot(b.nu) * f.N[b.vertex] - p.dot(f.N[b.vertex]) * b.nu;
  });
  const double terms = surface_dim * in.area + detail::boundary_integral(in, -1, [&](const BoundaryPointFields& b) {
                         const Vec3& p = P[b.vertex];
                         return std::abs(p.dot(b.nu)) + std::abs(p.dot(f.N[b.vertex]));
                       });
  return detail::finish(in, "normal_integral", detail::as_vec(lhs), detail::as_vec(rhs), terms);
}

/// int_{bdry} <psi, nu> ds = n int (1 + H <psi, N>) dA, with the pointwise H field.
inline IdentityReport check_first_integral(const IdentityInputs& in) {
  const auto& f = *in.fields;
  const auto& P = in.positions();
  const double lhs = detail::boundary_integral(in, -1, [&](const BoundaryPointFields& b) { return P[b.vertex].dot(b.nu); });
  const VectorXd Hu = detail::per_vertex(P.size(), [&](std::size_t v) { return f.H[v] * P[v].dot(f.N[v]); });
  const double rhs = surface_dim * (in.area + integrate_scalar(in.ops.M, Hu));
  const double terms = surface_dim * (in.area + integrate_scalar(in.ops.M, VectorXd(Hu.cwiseAbs())));
  return detail::finish(in, "first_integral", {lhs}, {rhs}, terms);
}

/// |Gamma_i| = -int_{Gamma_i} H_bdry <psi - o, nubar> ds with o a point of wall i.
inline IdentityReport check_minkowski_boundary(const IdentityInputs& in, int wall) {
  const auto& P = in.positions();
  const Vec3 o = in.walls->walls[static_cast<std::size_t>(wall)].base_point();
  const double length = in.ops.B[static_cast<std::size_t>(wall)].sum();
  const double rhs = -detail::boundary_integral(in, wall, [&](const BoundaryPointFields& b) {
    return b.H_bdry * (P[b.vertex] - o).dot(b.nubar);
  });
  return detail::finish(in, "minkowski_boundary[" + std::to_string(wall) + "]", {length}, {rhs}, 0.0);
}

/// int (n H^2 - |sigma|^2) <psi, N> dA = int_{bdry} (H - sigma(nu, nu)) <psi, nu> ds, with H the
/// area-averaged mean curvature.
inline IdentityReport check_special_function(const IdentityInputs& in) {
  const auto& f = *in.fields;
  const auto& P = in.positions();
  const double H = in.mean_H;
  const VectorXd integrand = detail::per_vertex(P.size(), [&](std::size_t v) {
    return (surface_dim * H * H - f.sigma_sq[v]) * P[v].dot(f.N[v]);
  });
  const VectorXd magnitude = detail::per_vertex(P.size(), [&](std::size_t v) {
    return (surface_dim * H * H + f.sigma_sq[v]) * std::abs(P[v].dot(f.N[v]));
  });
  const double lhs = integrate_scalar(in.ops.M, integrand);
  const double rhs = detail::boundary_integral(in, -1, [&](const BoundaryPointFields& b) {
    return (H - b.sigma_nn) * P[b.vertex].dot(b.nu);
  });
  const double bterms = detail::boundary_integral(in, -1, [&](const BoundaryPointFields& b) {
    return (std::abs(H) + std::abs(b.sigma_nn)) * std::abs(P[b.vertex].dot(b.nu));
  });
  auto r = detail::finish(in, "special_function", {lhs}, {rhs}, std::max(integrate_scalar(in.ops.M, magnitude), bterms));
  r.note = cmc_note(in);
  return r;
}

/// Pointwise sigma(nu, nu) = n H + (n - 1) sin(theta_i) H_bdry on Gamma_i. Sides are reported as
/// boundary means; the residual is the pointwise maximum, the mean residual goes in the note.
inline IdentityReport check_boundary_sigma_relation(const IdentityInputs& in, int wall) {
  const double s = std::sin(in.walls->angles[static_cast<std::size_t>(wall)]);
  const double length = in.ops.B[static_cast<std::size_t>(wall)].sum();
  const double n = surface_dim;
  double max_res = 0.0;
  for (const auto& b : in.fields->boundary)
    if (b.wall == wall) max_res = std::max(max_res, std::abs(b.sigma_nn - n * in.mean_H - (n - 1) * s * b.H_bdry));
  const double lhs = detail::boundary_integral(in, wall, [&](const BoundaryPointFields& b) { return b.sigma_nn; }) / length;
  const double rhs =
      detail::boundary_integral(in, wall, [&](const BoundaryPointFields& b) { return n * in.mean_H + (n - 1) * s * b.H_bdry; }) /
      length;
  const double mean_res = detail::boundary_integral(in, wall, [&](const BoundaryPointFields& b) {
                            return std::abs(b.sigma_nn - n * in.mean_H - (n - 1) * s * b.H_bdry);
                          }) / length;
  const double terms = detail::boundary_integral(in, wall, [&](const BoundaryPointFields& b) {
                         return std::abs(b.sigma_nn) + std::abs(n * in.mean_H) + std::abs((n - 1) * s * b.H_bdry);
                       }) / length;
  auto r = detail::finish(in, "boundary_sigma_relation[" + std::to_string(wall) + "]", {lhs}, {rhs}, terms);
  r.abs_residual = max_res;
  r.rel_residual = max_res / r.scale;
  r.note = "mean_residual=" + std::to_string(mean_res);
  return r;
}

/// int_{bdry} nu ds = n H int N dA (integrated Laplacian of the position).
inline IdentityReport check_laplacian_position(const IdentityInputs& in) {
  const Vec3 lhs = detail::boundary_integral_vec(in, -1, [](const BoundaryPointFields& b) -> Vec3 { return b.nu; });
  const Vec3 rhs = surface_dim * in.mean_H * integrate_vector(in.ops.M, in.fields->N);
  const double terms = std::max(in.ops.B_all.sum(), surface_dim * std::abs(in.mean_H) * in.area);
  auto r = detail::finish(in, "laplacian_position", detail::as_vec(lhs), detail::as_vec(rhs), terms);
  r.note = cmc_note(in);
  return r;
}

/// n H int N dA = sum_i sin(theta_i) |Gamma_i| n_i, the form used for several walls.
inline IdentityReport check_laplacian_position_walls(const IdentityInputs& in) {
  const Vec3 lhs = surface_dim * in.mean_H * integrate_vector(in.ops.M, in.fields->N);
  Vec3 rhs = Vec3::Zero();
  double terms = surface_dim * std::abs(in.mean_H) * in.area;
  for (std::size_t w = 0; w < in.walls->size(); ++w) {
    const double len = in.ops.B[w].sum();
    rhs += std::sin(in.walls->angles[w]) * len * in.walls->walls[w].normal;
    terms = std::max(terms, len);
  }
  auto r = detail::finish(in, "laplacian_position_walls", detail::as_vec(lhs), detail::as_vec(rhs), terms);
  r.note = cmc_note(in);
  return r;
}

namespace detail {

// Weak form of  Laplacian(f) + |sigma|^2 f = source  tested against functions vanishing on the
// boundary:  K f = M (|sigma|^2 f - source)  on interior rows.
inline IdentityReport jacobi_report(const IdentityInputs& in, std::string name, const std::vector<VectorXd>& fs,
                                    const VectorXd& source, double extra_scale) {
  // vector-valued fields are judged in the Euclidean norm over components, which keeps the
  // residual independent of the ambient frame
  double nl = 0.0, nr = 0.0, na = 0.0, s2 = 0.0;
  for (const VectorXd& f : fs) {
    const VectorXd s2f = in.ops.M * in.fields->sigma_sq.cwiseProduct(f);
    const VectorXd lhs = in.ops.K * f;
    const VectorXd rhs = s2f - in.ops.M * source;
    nl += std::pow(interior_dual_norm(in, lhs), 2);
    nr += std::pow(interior_dual_norm(in, rhs), 2);
    na += std::pow(interior_dual_norm(in, lhs - rhs), 2);
    s2 += std::pow(interior_dual_norm(in, s2f), 2);
  }
  const double terms = std::sqrt(s2) + interior_dual_norm(in, in.ops.M * source) + extra_scale;
  auto r = finish(in, std::move(name), {std::sqrt(nl)}, {std::sqrt(nr)}, terms);
  r.abs_residual = std::sqrt(na);
  r.rel_residual = r.abs_residual / r.scale;
  return r;
}

inline IdentityReport jacobi_report(const IdentityInputs& in, std::string name, const VectorXd& f, const VectorXd& source,
                                    double extra_scale) {
  return jacobi_report(in, std::move(name), std::vector<VectorXd>{f}, source, extra_scale);
}

}  // namespace detail

/// Jacobi-type equations for u = <psi, N>, v = N (all three translations) and phi = 1 + H u + <a, N>:
///   Lap u + |sigma|^2 u = -n H,  Lap v + |sigma|^2 v = 0,  Lap phi + |sigma|^2 phi = |sigma|^2 - n H^2.
inline std::vector<IdentityReport> check_jacobi_fields(const IdentityInputs& in, const Vec3& a = Vec3::Zero()) {
  const auto& f = *in.fields;
  const auto& P = in.positions();
  const std::size_t nv = P.size();
  const double n = surface_dim, H = in.mean_H;
  const VectorXd u = detail::per_vertex(nv, [&](std::size_t v) { return P[v].dot(f.N[v]); });
  std::vector<VectorXd> vfun;
  for (int k = 0; k < 3; ++k) vfun.push_back(detail::per_vertex(nv, [&](std::size_t v) { return f.N[v][k]; }));
  const VectorXd phi = detail::per_vertex(nv, [&](std::size_t v) { return 1.0 + H * u[v] + a.dot(f.N[v]); });
  const VectorXd ones = VectorXd::Ones(static_cast<Eigen::Index>(nv));

  std::vector<IdentityReport> out;
  out.push_back(detail::jacobi_report(in, "jacobi_u", u, -n * H * ones, 0.0));
  // |v| = 1, so the unit function's curvature term is its natural scale (v has no source).
  out.push_back(detail::jacobi_report(in, "jacobi_v", vfun, VectorXd::Zero(static_cast<Eigen::Index>(nv)),
                                      detail::interior_dual_norm(in, in.ops.M * f.sigma_sq)));
  // phi's equation comes from cancelling the constant's |sigma|^2 against the source.
  const VectorXd src = f.sigma_sq.array() - n * H * H;
  out.push_back(detail::jacobi_report(in, "jacobi_phi", phi, src, detail::interior_dual_norm(in, in.ops.M * f.sigma_sq)));
  for (auto& r : out) r.note = cmc_note(in);
  return out;
}

/// The conormal is a principal direction along the boundary: max |W nu - sigma(nu,nu) nu| / |W|.
inline IdentityReport check_conormal_principal(const IdentityInputs& in) {
  double worst = 0.0;
  for (const auto& b : in.fields->boundary)
    if (b.wall >= 0) worst = std::max(worst, conormal_principal_defect(*in.fields, b));
  IdentityReport r = detail::finish(in, "conormal_principal", {worst}, {0.0}, 1.0, 0.05);
  return r;
}

/// Derived line: int_{Gamma_i} (H + sin(theta_i) H_bdry) <psi - o, nubar> ds = 0 with o on every
/// supported wall. Follows from the other checks when the supported walls share a point.
inline IdentityReport check_boundary_claim(const IdentityInputs& in, int wall, const Vec3& origin) {
  const auto& P = in.positions();
  const double s = std::sin(in.walls->angles[static_cast<std::size_t>(wall)]);
  const double lhs = detail::boundary_integral(in, wall, [&](const BoundaryPointFields& b) {
    return (in.mean_H + s * b.H_bdry) * (P[b.vertex] - origin).dot(b.nubar);
  });
  const double terms = detail::boundary_integral(in, wall, [&](const BoundaryPointFields& b) {
    return (std::abs(in.mean_H) + std::abs(s * b.H_bdry)) * std::abs((P[b.vertex] - origin).dot(b.nubar));
  });
  auto r = detail::finish(in, "boundary_claim[" + std::to_string(wall) + "]", {lhs}, {0.0}, terms);
  r.note = "derived";
  return r;
}

struct SuiteOptions {
  // Fields used for the Jacobi residuals. Those equations are second order in the fields, so
  // they are checked against analytic fields when a family provides them.
  const GeometryFields* jacobi_fields = nullptr;
};

/// Runs every applicable check in a fixed order. Capillary-only checks are reported as skipped
/// on meshes whose boundary is not fully supported or whose mean curvature is not constant.
inline std::vector<IdentityReport> run_suite(const LabeledTriMesh& mesh_in, const WallSet& walls_in, const GeometryFields& fields,
                                             const std::string& resolution = {}, const SuiteOptions& opt = {}) {
  // positions are measured from the boundary centroid, so checks built on the support function
  // are invariant under translations as well as rotations
  const Vec3 anchor = boundary_centroid(mesh_in);
  const LabeledTriMesh mesh = transform(mesh_in, Mat3::Identity(), -anchor);
  const WallSet walls = transform(walls_in, Mat3::Identity(), -anchor);
  const IdentityInputs in = make_identity_inputs(mesh, walls, fields, resolution);
  std::vector<IdentityReport> out;
  out.push_back(check_normal_integral(in));
  out.push_back(check_first_integral(in));

  const bool capillary = is_capillary(in);
  const std::string why = "not capillary: " + cmc_note(in) + (walls.empty() ? "; no walls" : "");
  const auto supported = detail::supported_walls(in);

  if (!capillary) {
    for (const char* name : {"minkowski_boundary", "special_function", "boundary_sigma_relation", "laplacian_position",
                             "laplacian_position_walls", "jacobi_u", "jacobi_v", "jacobi_phi", "conormal_principal",
                             "boundary_claim"})
      out.push_back(detail::skipped(in, name, why));
    return out;
  }

  for (int w : supported) out.push_back(check_minkowski_boundary(in, w));
  out.push_back(check_special_function(in));
  for (int w : supported) out.push_back(check_boundary_sigma_relation(in, w));
  out.push_back(check_laplacian_position(in));
  out.push_back(check_laplacian_position_walls(in));

  Vec3 a = Vec3::Zero();
  if (!supported.empty()) {
    WallSet sub;
    for (int w : supported) sub.add(walls.walls[w], walls.angles[w]);
    try {
      a = solve_a(sub).a;
    } catch (const Error&) {
      // dependent normals: phi's equation holds for any a, keep a = 0
    }
  }
  if (opt.jacobi_fields) {
    const IdentityInputs jin = make_identity_inputs(mesh, walls, *opt.jacobi_fields, resolution);
    for (auto& r : check_jacobi_fields(jin, a)) {
      r.note += "; analytic fields";
      out.push_back(std::move(r));
    }
  } else {
    for (auto& r : check_jacobi_fields(in, a)) out.push_back(std::move(r));
  }
  if (!supported.empty()) out.push_back(check_conormal_principal(in));

  const auto origin = common_point(walls, supported);
  bool independent = true;
  try {
    WallSet sub;
    for (int w : supported) sub.add(walls.walls[w], walls.angles[w]);
    if (!supported.empty()) (void)solve_a(sub);
  } catch (const Error&) {
    independent = false;
  }
  if (origin && independent) {
    for (int w : supported) out.push_back(check_boundary_claim(in, w, *origin));
  } else if (!supported.empty()) {
    out.push_back(detail::skipped(in, "boundary_claim", "supported walls share no point"));
  }
  return out;
}

/// Residual sequence over successive refinements decreases. One non-decreasing step is allowed
/// when both values sit below `exception_floor`; values below `roundoff` count as exact, so a
/// discretely exact identity wandering at machine precision is not penalized.
inline bool decreasing_across_levels(const std::vector<double>& rel, double exception_floor = 1e-4, double roundoff = 1e-10) {
  int exceptions = 0;
  for (std::size_t i = 0; i + 1 < rel.size(); ++i) {
    const double a = rel[i], b = rel[i + 1];
    if (b < a || (a <= roundoff && b <= roundoff)) continue;
    if (a < exception_floor && b < exception_floor && ++exceptions <= 1) continue;
    return false;
  }
  return true;
}

}  // namespace caplab
