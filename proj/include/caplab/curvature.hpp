#pragma once

#include "caplab/error.hpp"
#include "caplab/fields.hpp"
#include "caplab/mesh.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace caplab {

struct FieldEstimationOptions {
  int rings = 2;           // neighborhood used by the quadric fit
  int min_fit_points = 5;  // number of fit unknowns
  /// Replace the angle-weighted normal by the normal of the fitted quadric. The fitted normal is
  /// second-order accurate at boundary vertices, where the one-sided normal average is not.
  bool fitted_normal = true;
};

namespace detail {

inline Vec3 any_orthonormal(const Vec3& n) {
  const Vec3 axis = std::abs(n.x()) <= std::abs(n.y()) && std::abs(n.x()) <= std::abs(n.z()) ? Vec3::UnitX()
                    : std::abs(n.y()) <= std::abs(n.z())                                      ? Vec3::UnitY()
                                                                                              : Vec3::UnitZ();
  return n.cross(axis).normalized();
}

inline std::vector<Vec3> angle_weighted_normals(const LabeledTriMesh& mesh) {
  std::vector<Vec3> normals(mesh.num_vertices(), Vec3::Zero());
  for (const auto& t : mesh.triangles) {
    const Vec3 fn = (mesh.positions[t[1]] - mesh.positions[t[0]]).cross(mesh.positions[t[2]] - mesh.positions[t[0]]);
    if (fn.squaredNorm() == 0.0) continue;
    const Vec3 unit = fn.normalized();
    for (int i = 0; i < 3; ++i) {
      const Vec3 u = mesh.positions[t[(i + 1) % 3]] - mesh.positions[t[i]];
      const Vec3 w = mesh.positions[t[(i + 2) % 3]] - mesh.positions[t[i]];
      const double angle = std::atan2(u.cross(w).norm(), u.dot(w));
      normals[t[i]] += angle * unit;
    }
  }
  for (auto& n : normals)
    if (n.squaredNorm() > 0.0) n.normalize();
  return normals;
}

struct QuadricFit {
  Vec3 normal;
  Mat3 shape;  // ambient shape operator w.r.t. `normal`
};

/// Normal and ambient shape operator of the graph h(x, y) over the plane spanned by (t1, t2) with
/// height direction n0, at a point where grad h = g and Hess h = hess. The shape operator is
/// G^{-1} II with metric G = I + g g^T and II = hess / sqrt(1 + |g|^2).
inline QuadricFit graph_geometry(const Vec3& t1, const Vec3& t2, const Vec3& n0, const Eigen::Vector2d& g,
                                 const Eigen::Matrix2d& hess) {
  const double w = std::sqrt(1.0 + g.squaredNorm());
  Eigen::Matrix<double, 3, 2> J;
  J.col(0) = t1 + g[0] * n0;
  J.col(1) = t2 + g[1] * n0;
  const Eigen::Matrix2d Ginv = (J.transpose() * J).inverse();
  QuadricFit out;
  out.normal = (n0 - g[0] * t1 - g[1] * t2) / w;
  out.shape = J * Ginv * (hess / w) * Ginv * J.transpose();
  return out;
}

/// Weighted least-squares fit of h = a x^2/2 + b x y + c y^2/2 + d x + e y in the frame
/// (t1, t2, n0) centered at p, weights 1 / distance.
inline QuadricFit fit_quadric(const Vec3& p, const Vec3& n0, const std::vector<Vec3>& pts) {
  const Vec3 t1 = any_orthonormal(n0);
  const Vec3 t2 = n0.cross(t1);
  const auto m = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd A(m, 5);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Vec3 d = pts[static_cast<std::size_t>(i)] - p;
    const double x = d.dot(t1), y = d.dot(t2), h = d.dot(n0);
    const double sw = 1.0 / std::sqrt(std::max(d.norm(), 1e-300));
    A.row(i) << sw * 0.5 * x * x, sw * x * y, sw * 0.5 * y * y, sw * x, sw * y;
    rhs[i] = sw * h;
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(rhs);
  Eigen::Matrix2d hess;
  hess << c[0], c[1], c[1], c[2];
  return graph_geometry(t1, t2, n0, Eigen::Vector2d(c[3], c[4]), hess);
}

inline Vec3 curvature_vector(const Vec3& prev, const Vec3& p, const Vec3& next) {
  const Vec3 a = prev - p, b = next - p;
  const Vec3 axb = a.cross(b);
  const double denom = 2.0 * axb.squaredNorm();
  if (denom <= 1e-30 * a.squaredNorm() * b.squaredNorm()) return Vec3::Zero();
  const Vec3 center = (a.squaredNorm() * b - b.squaredNorm() * a).cross(axb) / denom;
  return center / center.squaredNorm();
}

/// Exterior conormal at boundary vertex v: unit, orthogonal to N and to the boundary tangent,
/// pointing away from the triangles incident to the two boundary edges at v.
inline Vec3 exterior_conormal(const LabeledTriMesh& mesh, const Topology& topo, int v, const Vec3& N) {
  const int prev = topo.boundary_prev[v], next = topo.boundary_next[v];
  const Vec3 T = (mesh.positions[next] - mesh.positions[prev]).normalized();
  Vec3 nu = N.cross(T);
  nu -= nu.dot(N) * N;
  nu.normalize();
  Vec3 inward = Vec3::Zero();
  for (int f : topo.vertex_faces[v])
    for (int u : mesh.triangles[f])
      if (u != v) inward += mesh.positions[u] - mesh.positions[v];
  if (nu.dot(inward) > 0.0) nu = -nu;
  return nu;
}

}  // namespace detail

/// Unit normal to the boundary inside the wall with normal n, oriented so that {n, nubar}
/// and {N, nu} induce the same orientation on the normal plane of the boundary.
inline Vec3 in_wall_normal(const Vec3& N, const Vec3& nu, const Vec3& n) {
  return N.cross(nu).cross(n).normalized();
}

/// Discrete estimates of every geometric field. Shape operators come from a quadric fit over the
/// k-ring (one-sided at the boundary); boundary curvature from the circle through consecutive
/// boundary vertices.
inline GeometryFields estimate_fields(const LabeledTriMesh& mesh, const WallSet& walls,
                                      const FieldEstimationOptions& opt = {}) {
  const Topology topo = build_topology(mesh);
  if (mesh.triangles.empty() || !topo.bad_faces.empty() || !topo.nonmanifold_boundary_vertices.empty())
    throw Error(ErrorKind::invalid_mesh, "field estimation needs a manifold triangle mesh");

  const std::size_t nv = mesh.num_vertices();
  GeometryFields f;
  f.resize(nv);
  const auto n0 = detail::angle_weighted_normals(mesh);

  for (std::size_t v = 0; v < nv; ++v) {
    std::vector<int> ring;
    for (int r = opt.rings; r <= opt.rings + 1; ++r) {
      ring = k_ring(topo, static_cast<int>(v), r);
      if (static_cast<int>(ring.size()) >= opt.min_fit_points) break;
    }
    if (static_cast<int>(ring.size()) < opt.min_fit_points || n0[v].squaredNorm() == 0.0)
      throw Error(ErrorKind::fit_failure, "vertex " + std::to_string(v) + " has only " + std::to_string(ring.size()) +
                                              " neighbors for the quadric fit");
    std::vector<Vec3> pts;
    pts.reserve(ring.size());
    for (int u : ring) pts.push_back(mesh.positions[u]);
    const auto fit = detail::fit_quadric(mesh.positions[v], n0[v], pts);
    f.N[v] = opt.fitted_normal ? fit.normal : n0[v];
    f.shape[v] = fit.shape;
    f.H[v] = 0.5 * fit.shape.trace();
    f.sigma_sq[v] = (fit.shape * fit.shape).trace();
  }

  // Orientation: mean curvature non-negative on average.
  VectorXd lumped = VectorXd::Zero(static_cast<Eigen::Index>(nv));
  for (const auto& t : mesh.triangles) {
    const double a = triangle_area(mesh.positions[t[0]], mesh.positions[t[1]], mesh.positions[t[2]]) / 3.0;
    for (int i : t) lumped[i] += a;
  }
  const double mean_H = lumped.dot(f.H) / lumped.sum();
  const double mean_abs_H = lumped.dot(f.H.cwiseAbs()) / lumped.sum();
  if (std::abs(mean_H) <= 1e-2 * mean_abs_H || mean_abs_H <= 1e-12 / bounding_box_diameter(mesh.positions)) {
    f.warnings.push_back("mean curvature vanishes; normal orientation kept from triangle order");
  } else if (mean_H < 0.0) {
    for (std::size_t v = 0; v < nv; ++v) {
      f.N[v] = -f.N[v];
      f.shape[v] = -f.shape[v];
    }
    f.H = -f.H;
  }

  for (int v : topo.boundary_vertices()) {
    BoundaryPointFields b;
    b.vertex = v;
    b.wall = mesh.label_of(v);
    b.nu = detail::exterior_conormal(mesh, topo, v, f.N[v]);
    b.sigma_nn = b.nu.dot(f.shape[v] * b.nu);
    if (b.wall >= 0 && static_cast<std::size_t>(b.wall) < walls.size()) {
      const Vec3& n = walls.walls[b.wall].normal;
      b.nubar = in_wall_normal(f.N[v], b.nu, n);
      b.angle = std::acos(std::clamp(f.N[v].dot(n), -1.0, 1.0));
      const Vec3 kappa = detail::curvature_vector(mesh.positions[topo.boundary_prev[v]], mesh.positions[v],
                                                  mesh.positions[topo.boundary_next[v]]);
      b.H_bdry = kappa.dot(b.nubar);
    } else {
      b.wall = -1;
      b.nubar = Vec3::Constant(std::numeric_limits<double>::quiet_NaN());
    }
    f.add_boundary(b);
  }
  return f;
}

/// Relative failure of nu to be a principal direction: |W nu - sigma(nu,nu) nu| / |W|.
inline double conormal_principal_defect(const GeometryFields& f, const BoundaryPointFields& b) {
  const Mat3& W = f.shape[b.vertex];
  const double scale = W.norm();
  if (scale == 0.0) return 0.0;
  return (W * b.nu - b.sigma_nn * b.nu).norm() / scale;
}

}  // namespace caplab
