#pragma once

#include "caplab/error.hpp"
#include "caplab/mesh.hpp"

#include <Eigen/Sparse>

#include <string>
#include <vector>

namespace caplab {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Discrete realization of dA, ds and the Dirichlet energy on piecewise-linear functions.
struct OperatorSet {
  SparseMatrix M;                // consistent surface mass matrix
  SparseMatrix K;                // cotangent stiffness (natural boundary treatment)
  std::vector<VectorXd> B;       // per-wall lumped boundary line measure (diagonal)
  VectorXd B_all;                // line measure of the whole boundary, supported or not
  VectorXd lumped;               // row sums of M

  double area() const { return lumped.sum(); }
};

namespace detail {

inline std::vector<double> face_areas(const LabeledTriMesh& mesh) {
  std::vector<double> areas;
  areas.reserve(mesh.num_faces());
  for (const auto& t : mesh.triangles)
    areas.push_back(triangle_area(mesh.positions[t[0]], mesh.positions[t[1]], mesh.positions[t[2]]));
  return areas;
}

inline void check_elements(const std::vector<double>& areas) {
  if (areas.empty()) throw Error(ErrorKind::invalid_mesh, "mesh has no triangles");
  double mean = 0.0;
  for (double a : areas) mean += a;
  mean /= static_cast<double>(areas.size());
  for (std::size_t f = 0; f < areas.size(); ++f)
    if (!(areas[f] >= 1e-14 * mean))
      throw Error(ErrorKind::degenerate_element, "triangle " + std::to_string(f) + " has area " + std::to_string(areas[f]));
}

}  // namespace detail

/// Mass matrix of the weight w interpolated linearly: M_ij = integral of w phi_i phi_j.
inline SparseMatrix weighted_mass(const LabeledTriMesh& mesh, const VectorXd& w) {
  const auto n = static_cast<Eigen::Index>(mesh.num_vertices());
  if (w.size() != n) throw Error(ErrorKind::dimension_mismatch, "weight size differs from vertex count");
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.num_faces() * 9);
  for (const auto& t : mesh.triangles) {
    const double a = triangle_area(mesh.positions[t[0]], mesh.positions[t[1]], mesh.positions[t[2]]);
    for (int i = 0; i < 3; ++i) {
      const int j = (i + 1) % 3, k = (i + 2) % 3;
      trip.emplace_back(t[i], t[i], a * (w[t[i]] / 10.0 + (w[t[j]] + w[t[k]]) / 30.0));
      trip.emplace_back(t[i], t[j], a * ((w[t[i]] + w[t[j]]) / 30.0 + w[t[k]] / 60.0));
      trip.emplace_back(t[j], t[i], a * ((w[t[i]] + w[t[j]]) / 30.0 + w[t[k]] / 60.0));
    }
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

inline OperatorSet assemble_operators(const LabeledTriMesh& mesh, std::size_t num_walls) {
  const auto areas = detail::face_areas(mesh);
  detail::check_elements(areas);

  const auto n = static_cast<Eigen::Index>(mesh.num_vertices());
  std::vector<Eigen::Triplet<double>> mt, kt;
  mt.reserve(mesh.num_faces() * 9);
  kt.reserve(mesh.num_faces() * 9);
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const Tri& t = mesh.triangles[f];
    const double a = areas[f];
    // Edge opposite each corner; K_ij = <e_i, e_j> / (4 A).
    std::array<Vec3, 3> e;
    for (int i = 0; i < 3; ++i) e[i] = mesh.positions[t[(i + 2) % 3]] - mesh.positions[t[(i + 1) % 3]];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        mt.emplace_back(t[i], t[j], a * (i == j ? 2.0 : 1.0) / 12.0);
        kt.emplace_back(t[i], t[j], e[i].dot(e[j]) / (4.0 * a));
      }
  }
  OperatorSet ops;
  ops.M.resize(n, n);
  ops.M.setFromTriplets(mt.begin(), mt.end());
  ops.K.resize(n, n);
  ops.K.setFromTriplets(kt.begin(), kt.end());
  ops.lumped = ops.M * VectorXd::Ones(n);

  ops.B.assign(num_walls, VectorXd::Zero(n));
  ops.B_all = VectorXd::Zero(n);
  const Topology topo = build_topology(mesh);
  for (const auto& e : topo.boundary_edges) {
    const double half = 0.5 * (mesh.positions[e[0]] - mesh.positions[e[1]]).norm();
    ops.B_all[e[0]] += half;
    ops.B_all[e[1]] += half;
    const int w = mesh.label_of(e[0]);
    if (w >= 0 && w == mesh.label_of(e[1]) && static_cast<std::size_t>(w) < num_walls) {
      ops.B[w][e[0]] += half;
      ops.B[w][e[1]] += half;
    }
  }
  return ops;
}

/// 1^T M f.
inline double integrate_scalar(const SparseMatrix& M, const VectorXd& f) {
  if (f.size() != M.cols()) throw Error(ErrorKind::dimension_mismatch, "function size differs from operator size");
  return (M * f).sum();
}

/// Integral against a diagonal (lumped) measure such as a boundary mass.
inline double integrate_scalar(const VectorXd& diag, const VectorXd& f) {
  if (f.size() != diag.size()) throw Error(ErrorKind::dimension_mismatch, "function size differs from measure size");
  return diag.dot(f);
}

template <typename Measure>
Vec3 integrate_vector(const Measure& measure, const std::vector<Vec3>& f) {
  VectorXd c(static_cast<Eigen::Index>(f.size()));
  Vec3 out;
  for (int k = 0; k < 3; ++k) {
    for (std::size_t i = 0; i < f.size(); ++i) c[static_cast<Eigen::Index>(i)] = f[i][k];
    out[k] = integrate_scalar(measure, c);
  }
  return out;
}

}  // namespace caplab
