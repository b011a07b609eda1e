#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

namespace caplab {

using Eigen::VectorXd;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Tri = std::array<int, 3>;

inline constexpr double pi = std::numbers::pi;

/// Ambient dimension is n + 1 = 3; the surface dimension n enters the formulas symbolically.
inline constexpr int surface_dim = 2;

/// Plane {x : <x, normal> = offset}; `normal` is the exterior normal of the supporting domain.
struct Hyperplane {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;

  double signed_distance(const Vec3& p) const { return p.dot(normal) - offset; }
  Vec3 project(const Vec3& p) const { return p - signed_distance(p) * normal; }
  /// Foot of the perpendicular from the origin.
  Vec3 base_point() const { return offset * normal; }
};

/// Supporting walls with their prescribed contact angles (radians).
/// An empty set describes a surface whose boundary is not supported by any wall.
struct WallSet {
  std::vector<Hyperplane> walls;
  std::vector<double> angles;

  std::size_t size() const { return walls.size(); }
  bool empty() const { return walls.empty(); }

  void add(const Hyperplane& wall, double angle) {
    walls.push_back(wall);
    angles.push_back(angle);
  }
};

/// Rigid motion x -> R x + t applied to a wall.
inline Hyperplane transform(const Hyperplane& wall, const Mat3& rotation, const Vec3& translation) {
  Hyperplane out;
  out.normal = rotation * wall.normal;
  out.offset = wall.offset + out.normal.dot(translation);
  return out;
}

inline WallSet transform(const WallSet& walls, const Mat3& rotation, const Vec3& translation) {
  WallSet out;
  for (std::size_t i = 0; i < walls.size(); ++i) out.add(transform(walls.walls[i], rotation, translation), walls.angles[i]);
  return out;
}

}  // namespace caplab
