#pragma once

#include "caplab/error.hpp"
#include "caplab/operators.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace caplab {

/// Smallest eigenpairs of  A f = lambda M f  restricted to {c^T f = 0}, M-orthonormal.
struct EigenResult {
  VectorXd values;            // ascending
  Eigen::MatrixXd vectors;    // columns, f^T M f = 1, c^T f = 0
  VectorXd residuals;         // constrained residual norms, dual (lumped M^-1) norm
  double shift = 0.0;
  int iterations = 0;
  bool dense = false;
};

struct EigenOptions {
  int count = 1;                // 1..10
  int max_iterations = 2000;
  double tolerance = 1e-9;      // residual relative to |lambda - shift|
  unsigned seed = 20240917u;
  int dense_limit = 400;        // below this size the reduced dense problem is solved directly
};

namespace detail {

/// Largest-entry-positive sign convention so eigenvectors are reproducible.
inline void normalize_sign(Eigen::Ref<VectorXd> f) {
  Eigen::Index idx = 0;
  f.cwiseAbs().maxCoeff(&idx);
  if (f[idx] < 0.0) f = -f;
}

inline VectorXd constrained_residual(const SparseMatrix& A, const SparseMatrix& M, const VectorXd& lumped, const VectorXd& c,
                                     const VectorXd& f, double lambda) {
  VectorXd r = A * f - lambda * (M * f);
  // remove the Lagrange-multiplier direction in the lumped dual inner product
  const VectorXd dc = c.cwiseQuotient(lumped);
  r -= c * (dc.dot(r) / dc.dot(c));
  return r;
}

inline double dual_norm(const VectorXd& r, const VectorXd& lumped) { return std::sqrt(r.cwiseAbs2().cwiseQuotient(lumped).sum()); }

inline EigenResult dense_constrained(const SparseMatrix& A, const SparseMatrix& M, const VectorXd& c, int count) {
  const Eigen::Index n = A.rows();
  // orthonormal basis Q of {c^T f = 0}
  const Eigen::MatrixXd cm = c;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(cm);
  const Eigen::MatrixXd Qfull = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd Q = Qfull.rightCols(n - 1);
  const Eigen::MatrixXd Ad = Eigen::MatrixXd(A), Md = Eigen::MatrixXd(M);
  const Eigen::MatrixXd Ar = Q.transpose() * Ad * Q, Mr = Q.transpose() * Md * Q;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Ar + Ar.transpose()), 0.5 * (Mr + Mr.transpose()));
  if (es.info() != Eigen::Success) throw Error(ErrorKind::solver_failure, "dense generalized eigensolver failed");
  EigenResult out;
  const int k = std::min<int>(count, static_cast<int>(n - 1));
  out.values = es.eigenvalues().head(k);
  out.vectors = Q * es.eigenvectors().leftCols(k);
  out.dense = true;
  return out;
}

}  // namespace detail

/// Shift-invert subspace iteration with Rayleigh-Ritz. Each application of the operator solves
/// the bordered system  (A - s M) x = M g + gamma c,  c^T x = 0,  so iterates stay in the
/// constraint space. The shift s is lowered until A - s M is positive definite (checked from the
/// LDL^T inertia), which puts it below every constrained eigenvalue.
inline EigenResult min_constrained_eigenpairs(const SparseMatrix& A, const SparseMatrix& M, const VectorXd& c,
                                              const EigenOptions& opt = {}) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || M.rows() != n || M.cols() != n || c.size() != n)
    throw Error(ErrorKind::dimension_mismatch, "index form, mass and constraint sizes differ");
  if (opt.count < 1 || opt.count > 10) throw Error(ErrorKind::invalid_spec, "eigenpair count must be in 1..10");
  if (n < 2) throw Error(ErrorKind::invalid_mesh, "need at least two degrees of freedom");
  if (c.norm() == 0.0) throw Error(ErrorKind::invalid_mesh, "zero constraint vector");
  const VectorXd lumped = M * VectorXd::Ones(n);

  EigenResult out;
  if (n <= opt.dense_limit) {
    out = detail::dense_constrained(A, M, c, opt.count);
  } else {
    // Start far above any plausible bottom of the spectrum and double downwards: the first
    // definite shift is then within a factor two of the unconstrained minimum.
    double scale = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) scale = std::max(scale, std::abs(A.coeff(i, i)) / M.coeff(i, i));
    double shift = -std::max(1e-6 * scale, 1e-300);
    Eigen::SimplicialLDLT<SparseMatrix> ldlt;
    for (int attempt = 0;; ++attempt) {
      const SparseMatrix S = A - shift * M;
      ldlt.compute(S);
      if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0.0).all()) break;
      if (attempt > 60) throw Error(ErrorKind::solver_failure, "could not find a definite shift");
      shift = 2.0 * shift;
    }
    out.shift = shift;

    const VectorXd z = ldlt.solve(c);
    const double cz = c.dot(z);
    auto apply = [&](const VectorXd& g) {
      const VectorXd y = ldlt.solve(M * g);
      return VectorXd(y - z * (c.dot(y) / cz));
    };

    const int k = opt.count;
    const int p = static_cast<int>(std::min<Eigen::Index>(n - 1, std::max(2 * k, k + 6)));
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Eigen::MatrixXd X(n, p);
    for (int j = 0; j < p; ++j)
      for (Eigen::Index i = 0; i < n; ++i) X(i, j) = uni(rng);

    VectorXd ritz;
    Eigen::MatrixXd V;
    bool converged = false;
    int it = 0;
    for (; it < opt.max_iterations; ++it) {
      for (int j = 0; j < p; ++j) X.col(j) = apply(X.col(j));
      // M-orthonormalize via Cholesky of the Gram matrix, then Rayleigh-Ritz
      const Eigen::MatrixXd MX = M * X;
      const Eigen::MatrixXd G = X.transpose() * MX;
      const Eigen::MatrixXd AX = A * X;
      const Eigen::MatrixXd H = X.transpose() * AX;
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (H + H.transpose()), 0.5 * (G + G.transpose()));
      if (es.info() != Eigen::Success) throw Error(ErrorKind::solver_failure, "Rayleigh-Ritz step failed");
      ritz = es.eigenvalues();
      V = X * es.eigenvectors();
      X = V;

      if (it % 2 == 1 || it + 1 == opt.max_iterations) {
        converged = true;
        for (int j = 0; j < k; ++j) {
          const VectorXd r = detail::constrained_residual(A, M, lumped, c, V.col(j), ritz[j]);
          const double fn = std::sqrt(V.col(j).dot(M * V.col(j)));
          if (detail::dual_norm(r, lumped) > opt.tolerance * std::abs(ritz[j] - shift) * fn) {
            converged = false;
            break;
          }
        }
        if (converged) break;
      }
    }
    if (!converged) {
      const VectorXd r = detail::constrained_residual(A, M, lumped, c, V.col(0), ritz[0]);
      throw Error(ErrorKind::solver_failure, "eigensolver did not converge after " + std::to_string(it) +
                                                 " iterations, residual " + std::to_string(detail::dual_norm(r, lumped)));
    }
    out.values = ritz.head(k);
    out.vectors = V.leftCols(k);
    out.iterations = it + 1;
  }

  out.residuals.resize(out.values.size());
  for (Eigen::Index j = 0; j < out.values.size(); ++j) {
    auto col = out.vectors.col(j);
    col /= std::sqrt(col.dot(M * col));
    detail::normalize_sign(col);
    out.residuals[j] = detail::dual_norm(detail::constrained_residual(A, M, lumped, c, col, out.values[j]), lumped);
  }
  return out;
}

}  // namespace caplab
