#pragma once

#include "caplab/error.hpp"
#include "caplab/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace caplab {

/// The vector a in span{n_i} with <a, n_i> = -cos(theta_i). |a| < 1 is the sufficient condition
/// under which a stable capillary surface must be umbilical.
struct WedgeSolution {
  VectorXd c;  // coefficients of a in the basis n_1..n_k
  Vec3 a = Vec3::Zero();
  double norm_a = 0.0;
  bool umbilical_conclusion = true;
  Eigen::MatrixXd gram;
};

inline constexpr double max_gram_condition = 1e12;

namespace detail {

inline Eigen::MatrixXd checked_gram(const std::vector<Vec3>& normals) {
  const auto k = static_cast<Eigen::Index>(normals.size());
  if (k < 1 || k > 3) throw Error(ErrorKind::invalid_spec, "need between 1 and 3 wall normals, got " + std::to_string(k));
  for (const auto& n : normals)
    if (std::abs(n.norm() - 1.0) > 1e-12) throw Error(ErrorKind::invalid_spec, "wall normals must be unit vectors");
  Eigen::MatrixXd G(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) G(i, j) = normals[i].dot(normals[j]);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > max_gram_condition)
    throw Error(ErrorKind::dependent_normals, "Gram matrix of the wall normals is singular or ill-conditioned");
  return G;
}

}  // namespace detail

inline WedgeSolution solve_a(const std::vector<Vec3>& normals, const std::vector<double>& angles) {
  if (normals.size() != angles.size()) throw Error(ErrorKind::dimension_mismatch, "one angle per normal is required");
  WedgeSolution sol;
  sol.gram = detail::checked_gram(normals);
  const auto k = sol.gram.rows();
  VectorXd rhs(k);
  for (Eigen::Index i = 0; i < k; ++i) rhs[i] = -std::cos(angles[static_cast<std::size_t>(i)]);
  sol.c = sol.gram.ldlt().solve(rhs);
  for (Eigen::Index i = 0; i < k; ++i) sol.a += sol.c[i] * normals[static_cast<std::size_t>(i)];
  sol.norm_a = sol.a.norm();
  sol.umbilical_conclusion = sol.norm_a < 1.0;
  return sol;
}

inline WedgeSolution solve_a(const WallSet& walls) {
  std::vector<Vec3> normals;
  for (const auto& w : walls.walls) normals.push_back(w.normal);
  return solve_a(normals, walls.angles);
}

/// Largest delta with |a(theta)| < 1 whenever every theta_i lies in (pi/2 - delta, pi/2 + delta).
/// |a|^2 = t^T G^{-1} t with t_i = cos(theta_i) is convex in t, so its maximum over the cube
/// [-sin(delta), sin(delta)]^k sits at a vertex: delta = arcsin(1 / sqrt(mu)),
/// mu = max over sign vectors s of s^T G^{-1} s.
inline double delta_max(const std::vector<Vec3>& normals) {
  const Eigen::MatrixXd Ginv = detail::checked_gram(normals).inverse();
  const auto k = Ginv.rows();
  double mu = 0.0;
  for (unsigned mask = 0; mask < (1u << k); ++mask) {
    VectorXd s(k);
    for (Eigen::Index i = 0; i < k; ++i) s[i] = (mask >> i) & 1u ? -1.0 : 1.0;
    mu = std::max(mu, s.dot(Ginv * s));
  }
  return std::asin(std::min(1.0, 1.0 / std::sqrt(mu)));
}

inline double delta_max(const WallSet& walls) {
  std::vector<Vec3> normals;
  for (const auto& w : walls.walls) normals.push_back(w.normal);
  return delta_max(normals);
}

/// Point on every listed wall closest to `near`, or nothing when the planes share no point.
inline std::optional<Vec3> common_point(const WallSet& walls, const std::vector<int>& which, const Vec3& near = Vec3::Zero()) {
  if (which.empty()) return near;
  Eigen::MatrixXd A(static_cast<Eigen::Index>(which.size()), 3);
  VectorXd d(static_cast<Eigen::Index>(which.size()));
  double scale = 1.0;
  for (std::size_t r = 0; r < which.size(); ++r) {
    const auto& w = walls.walls[static_cast<std::size_t>(which[r])];
    A.row(static_cast<Eigen::Index>(r)) = w.normal.transpose();
    d[static_cast<Eigen::Index>(r)] = w.offset - w.normal.dot(near);
    scale = std::max(scale, std::abs(w.offset) + near.norm());
  }
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
  const Vec3 o = cod.solve(d);
  if ((A * o - d).norm() > 1e-9 * scale) return std::nullopt;
  return Vec3(near + o);
}

}  // namespace caplab
