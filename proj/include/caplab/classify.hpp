#pragma once

#include "caplab/fields.hpp"
#include "caplab/mesh.hpp"
#include "caplab/stability.hpp"
#include "caplab/wedge.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace caplab {

struct SphereFit {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
  double rms = 0.0;           // RMS distance of the vertices to the sphere
  double plane_rms = 0.0;     // RMS distance to the best plane
  double bounding_radius = 0.0;
  double residual = 0.0;      // rms / bounding_radius
  bool planar = false;
};

struct ClassifyReport {
  bool hypotheses_met = false;
  std::vector<std::string> unmet;  // "dependent-normals", "edge-contact", "mixed-labels", "angle-window", "unstable"
  double delta_max = 0.0;
  std::vector<double> angle_offsets;  // |theta_i - pi/2|
  std::optional<double> norm_a;
  bool stable = false;
  double lambda_min = 0.0;
  double tol_used = 0.0;
  std::optional<SphereFit> sphere;
  std::string note;
  VectorXd certificate;  // destabilizing eigenfunction when unstable
};

inline constexpr double planar_tolerance = 1e-6;

/// Algebraic least-squares sphere |x|^2 = 2 c.x + k, followed by the geometric RMS.
inline SphereFit fit_sphere(const std::vector<Vec3>& pts) {
  SphereFit out;
  const std::size_t n = pts.size();
  if (n < 4) throw Error(ErrorKind::invalid_mesh, "need at least four points for a sphere fit");
  Vec3 centroid = Vec3::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(n);
  for (const auto& p : pts) out.bounding_radius = std::max(out.bounding_radius, (p - centroid).norm());
  const double L = out.bounding_radius > 0.0 ? out.bounding_radius : 1.0;

  // work in centred, scaled coordinates for conditioning
  Eigen::MatrixXd A(static_cast<Eigen::Index>(n), 4);
  VectorXd b(static_cast<Eigen::Index>(n));
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 q = (pts[i] - centroid) / L;
    A.row(static_cast<Eigen::Index>(i)) << 2.0 * q.x(), 2.0 * q.y(), 2.0 * q.z(), 1.0;
    b[static_cast<Eigen::Index>(i)] = q.squaredNorm();
    cov += q * q.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  out.plane_rms = std::sqrt(std::max(0.0, es.eigenvalues()[0]) / static_cast<double>(n)) * L;
  out.planar = out.plane_rms <= planar_tolerance * L;

  if (!out.planar) {
    const VectorXd s = A.colPivHouseholderQr().solve(b);
    const Vec3 c(s[0], s[1], s[2]);
    const double r2 = s[3] + c.squaredNorm();
    out.center = centroid + L * c;
    out.radius = L * std::sqrt(std::max(r2, 0.0));
    double acc = 0.0;
    for (const auto& p : pts) {
      const double d = (p - out.center).norm() - out.radius;
      acc += d * d;
    }
    out.rms = std::sqrt(acc / static_cast<double>(n));
  } else {
    out.radius = INFINITY;
    out.rms = out.plane_rms;
  }
  out.residual = out.rms / L;
  return out;
}

/// Checks the hypotheses of the wedge rigidity statement numerically and, when they hold,
/// measures how close the surface is to a sphere.
inline ClassifyReport classify(const LabeledTriMesh& mesh, const WallSet& walls, const GeometryFields& fields,
                               const StabilityVerdict& verdict) {
  (void)fields;
  ClassifyReport r;
  r.stable = verdict.stable;
  r.lambda_min = verdict.lambda_min;
  r.tol_used = verdict.tol_used;
  if (!verdict.stable) {
    r.unmet.push_back("unstable");
    r.certificate = verdict.eigenfunction;
  }

  if (walls.empty()) {
    r.unmet.push_back("no-walls");
  } else {
    std::vector<Vec3> normals;
    for (const auto& w : walls.walls) normals.push_back(w.normal);
    try {
      const WedgeSolution ws = solve_a(walls);
      r.norm_a = ws.norm_a;
      r.delta_max = delta_max(normals);
      bool in_window = true;
      for (double th : walls.angles) {
        r.angle_offsets.push_back(std::abs(th - pi / 2));
        if (!(std::abs(th - pi / 2) < r.delta_max)) in_window = false;
      }
      if (!in_window) r.unmet.push_back("angle-window");
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::dependent_normals && e.kind() != ErrorKind::invalid_spec) throw;
      r.unmet.push_back("dependent-normals");
    }
  }

  const ValidationReport vr = validate(mesh, walls);
  if (vr.has("mixed-label")) r.unmet.push_back("mixed-labels");
  // a boundary vertex lying on two walls sits on an edge of the wedge
  const double tol = plane_tolerance(mesh);
  bool edge = false;
  for (const auto& [v, w] : mesh.boundary_labels) {
    for (std::size_t j = 0; j < walls.size() && !edge; ++j)
      if (static_cast<int>(j) != w && std::abs(walls.walls[j].signed_distance(mesh.positions[v])) <= tol) edge = true;
  }
  if (edge) r.unmet.push_back("edge-contact");

  r.hypotheses_met = r.unmet.empty();
  if (r.hypotheses_met) {
    r.sphere = fit_sphere(mesh.positions);
    if (r.sphere->planar)
      r.note = "best fit is planar; a planar piece cannot meet every wall at the prescribed angles";
  }
  return r;
}

}  // namespace caplab
