#pragma once

#include "caplab/caplab.hpp"

#include <Eigen/Geometry>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>

namespace caplab::testing {

inline FamilySpec cap(double R, double theta, int res) { return FamilySpec{Cap{R, theta}, res}; }
inline FamilySpec cylinder(double r, double L, int res) { return FamilySpec{Cylinder{r, L}, res}; }
inline FamilySpec disk(double R, int res) { return FamilySpec{FlatDisk{R}, res}; }
inline FamilySpec sphere(double R, int res) { return FamilySpec{ClosedSphere{R}, res}; }
inline FamilySpec monge(double a, double R, int res) { return FamilySpec{MongePatch{a, R}, res}; }

inline Mat3 random_rotation(unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  return q.toRotationMatrix();
}

/// Composite Simpson rule, n even.
template <typename F>
double simpson(F f, double a, double b, int n = 2000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("caplab_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace caplab::testing
