#pragma once

#include "caplab/curvature.hpp"
#include "caplab/error.hpp"
#include "caplab/fields.hpp"
#include "caplab/mesh.hpp"

#include <cmath>
#include <string>
#include <variant>
#include <vector>

namespace caplab {

// Closed-form capillary families. Every family is oriented so that H >= 0: spheres, caps and
// cylinders carry the normal pointing toward the center or axis. Triangles are listed
// counterclockwise with respect to the outward side (away from the center), so the right-hand
// face normal is -N on curved families and +e3 on the flat ones.

/// Portion z >= 0 of the sphere of radius R centered at (0, 0, -R cos(theta)); it meets the wall
/// z = 0 (exterior normal -e3) at contact angle theta.
struct Cap {
  double R = 1.0;
  double theta = pi / 2;
};
/// Tube of radius r about the z axis between the walls z = 0 and z = L, contact angle pi/2.
struct Cylinder {
  double r = 1.0;
  double L = 2.0;
};
struct FlatDisk {
  double R = 1.0;
};
struct ClosedSphere {
  double R = 1.0;
};
/// Graph z = amplitude sin(x) sin(y) over the disk of radius R. Not capillary.
struct MongePatch {
  double amplitude = 0.1;
  double R = 1.0;
};

using FamilyVariant = std::variant<Cap, Cylinder, FlatDisk, ClosedSphere, MongePatch>;

struct FamilySpec {
  FamilyVariant variant;
  int resolution = 32;
};

struct CapClosedForms {
  double area;
  double wetted_area;
  double boundary_length;
  double energy;
  double volume;
  double H;
};

struct FamilyMesh {
  LabeledTriMesh mesh;
  WallSet walls;
  GeometryFields fields;  // exact analytic values
  SurfaceProjector projector;
};

inline std::string family_name(const FamilySpec& spec) {
  return std::visit(
      [](const auto& f) -> std::string {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Cap>) return "cap";
        else if constexpr (std::is_same_v<T, Cylinder>) return "cylinder";
        else if constexpr (std::is_same_v<T, FlatDisk>) return "disk";
        else if constexpr (std::is_same_v<T, ClosedSphere>) return "sphere";
        else return "monge";
      },
      spec.variant);
}

inline bool is_capillary_family(const FamilySpec& spec) {
  return std::holds_alternative<Cap>(spec.variant) || std::holds_alternative<Cylinder>(spec.variant);
}

inline void check_spec(const FamilySpec& spec) {
  auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (spec.resolution < 3) throw Error(ErrorKind::invalid_spec, "resolution must be at least 3");
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Cap>) {
          if (!positive(f.R)) throw Error(ErrorKind::invalid_spec, "cap radius must be positive");
          if (!(f.theta > 0.0 && f.theta < pi)) throw Error(ErrorKind::invalid_angle, "cap angle must lie in (0, pi)");
          if (std::sin(f.theta) < 1e-8) throw Error(ErrorKind::degenerate_family, "cap boundary radius is numerically zero");
        } else if constexpr (std::is_same_v<T, Cylinder>) {
          if (!positive(f.r) || !positive(f.L)) throw Error(ErrorKind::invalid_spec, "cylinder radius and length must be positive");
        } else if constexpr (std::is_same_v<T, MongePatch>) {
          if (!positive(f.R)) throw Error(ErrorKind::invalid_spec, "patch radius must be positive");
          if (!(f.amplitude >= 0.0) || !std::isfinite(f.amplitude)) throw Error(ErrorKind::invalid_spec, "amplitude must be non-negative");
        } else {
          if (!positive(f.R)) throw Error(ErrorKind::invalid_spec, "radius must be positive");
        }
      },
      spec.variant);
}

/// Walls induced by a family; empty for families without a supporting wall.
inline WallSet induced_walls(const FamilySpec& spec) {
  WallSet walls;
  if (const auto* cap = std::get_if<Cap>(&spec.variant)) {
    walls.add({-Vec3::UnitZ(), 0.0}, cap->theta);
  } else if (const auto* cyl = std::get_if<Cylinder>(&spec.variant)) {
    walls.add({-Vec3::UnitZ(), 0.0}, pi / 2);
    walls.add({Vec3::UnitZ(), cyl->L}, pi / 2);
  }
  return walls;
}

inline CapClosedForms cap_closed_forms(double R, double theta) {
  if (!(R > 0.0) || !(theta > 0.0 && theta < pi)) throw Error(ErrorKind::invalid_spec, "cap needs R > 0 and theta in (0, pi)");
  const double c = std::cos(theta), s = std::sin(theta);
  const double height = R * (1.0 - c);
  CapClosedForms out;
  out.area = 2.0 * pi * R * R * (1.0 - c);
  out.wetted_area = pi * R * R * s * s;
  out.boundary_length = 2.0 * pi * R * s;
  out.energy = out.area - c * out.wetted_area;
  out.volume = pi * height * height * (3.0 * R - height) / 3.0;
  out.H = 1.0 / R;
  return out;
}

namespace detail {

inline double monge_height(const MongePatch& m, double x, double y) { return m.amplitude * std::sin(x) * std::sin(y); }

struct PointGeometry {
  Vec3 N;
  Mat3 shape;
};

inline PointGeometry sphere_point(const Vec3& center, double R, const Vec3& p) {
  const Vec3 N = -(p - center).normalized();
  return {N, (Mat3::Identity() - N * N.transpose()) / R};
}

inline PointGeometry cylinder_point(double r, const Vec3& p) {
  const Vec3 N = -Vec3(p.x(), p.y(), 0.0).normalized();
  return {N, (Mat3::Identity() - N * N.transpose() - Vec3::UnitZ() * Vec3::UnitZ().transpose()) / r};
}

inline PointGeometry monge_point(const MongePatch& m, const Vec3& p) {
  const double x = p.x(), y = p.y(), A = m.amplitude;
  const Eigen::Vector2d g(A * std::cos(x) * std::sin(y), A * std::sin(x) * std::cos(y));
  Eigen::Matrix2d hess;
  hess << -A * std::sin(x) * std::sin(y), A * std::cos(x) * std::cos(y), A * std::cos(x) * std::cos(y),
      -A * std::sin(x) * std::sin(y);
  const auto geo = graph_geometry(Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ(), g, hess);
  return {geo.normal, geo.shape};
}

inline Vec3 cap_center(const Cap& c) { return Vec3(0.0, 0.0, -c.R * std::cos(c.theta)); }

inline PointGeometry point_geometry(const FamilySpec& spec, const Vec3& p) {
  if (const auto* c = std::get_if<Cap>(&spec.variant)) return sphere_point(cap_center(*c), c->R, p);
  if (const auto* s = std::get_if<ClosedSphere>(&spec.variant)) return sphere_point(Vec3::Zero(), s->R, p);
  if (const auto* y = std::get_if<Cylinder>(&spec.variant)) return cylinder_point(y->r, p);
  if (const auto* m = std::get_if<MongePatch>(&spec.variant)) return monge_point(*m, p);
  return {Vec3::UnitZ(), Mat3::Zero()};
}

inline Vec3 radial_xy(const Vec3& p) { return Vec3(p.x(), p.y(), 0.0).normalized(); }

inline BoundaryPointFields boundary_point(const FamilySpec& spec, const PointGeometry& g, const Vec3& p, int v, int wall) {
  BoundaryPointFields b;
  b.vertex = v;
  b.wall = wall;
  const Vec3 radial = radial_xy(p);
  if (const auto* c = std::get_if<Cap>(&spec.variant)) {
    const double ct = std::cos(c->theta), st = std::sin(c->theta);
    b.nubar = radial;
    b.nu = ct * radial - st * Vec3::UnitZ();
    b.sigma_nn = 1.0 / c->R;
    b.H_bdry = -1.0 / (c->R * st);
    b.angle = c->theta;
  } else if (const auto* y = std::get_if<Cylinder>(&spec.variant)) {
    b.nubar = radial;
    b.nu = wall == 0 ? Vec3(-Vec3::UnitZ()) : Vec3(Vec3::UnitZ());
    b.sigma_nn = 0.0;
    b.H_bdry = -1.0 / y->r;
    b.angle = pi / 2;
  } else {
    // Unsupported rim of a graph over the disk: conormal is the outward unit vector tangent to
    // the surface and orthogonal to the rim curve (R cos t, R sin t, h).
    const Vec3 tangential(-p.y(), p.x(), 0.0);
    Vec3 T = tangential;
    if (const auto* m = std::get_if<MongePatch>(&spec.variant)) {
      const double A = m->amplitude, x = p.x(), y = p.y();
      T.z() = A * std::cos(x) * std::sin(y) * tangential.x() + A * std::sin(x) * std::cos(y) * tangential.y();
    }
    Vec3 nu = g.N.cross(T).normalized();
    if (nu.dot(radial) < 0.0) nu = -nu;
    b.nu = nu;
    b.sigma_nn = nu.dot(g.shape * nu);
    b.nubar = Vec3::Constant(std::numeric_limits<double>::quiet_NaN());
  }
  return b;
}

// Concentric rings: ring i has 6 i vertices at radius R i / n; consecutive rings are zipped by angle.
inline LabeledTriMesh concentric_disk(double R, int rings) {
  LabeledTriMesh mesh;
  mesh.positions.push_back(Vec3::Zero());
  std::vector<std::vector<int>> ring(static_cast<std::size_t>(rings) + 1);
  ring[0] = {0};
  for (int i = 1; i <= rings; ++i) {
    const int count = 6 * i;
    const double radius = i == rings ? R : R * i / rings;
    for (int k = 0; k < count; ++k) {
      const double a = 2.0 * pi * k / count;
      ring[i].push_back(static_cast<int>(mesh.positions.size()));
      mesh.positions.emplace_back(radius * std::cos(a), radius * std::sin(a), 0.0);
    }
  }
  for (int k = 0; k < 6; ++k) mesh.triangles.push_back({0, ring[1][k], ring[1][(k + 1) % 6]});
  for (int i = 2; i <= rings; ++i) {
    const auto& in = ring[i - 1];
    const auto& out = ring[i];
    const int a = static_cast<int>(in.size()), b = static_cast<int>(out.size());
    int p = 0, q = 0;
    while (p < a || q < b) {
      // Advance along whichever ring has the next vertex at the smaller angle (outer on ties).
      const bool take_outer = q < b && (p >= a || static_cast<long>(q + 1) * a <= static_cast<long>(p + 1) * b);
      if (take_outer) {
        mesh.triangles.push_back({in[p % a], out[q], out[(q + 1) % b]});
        ++q;
      } else {
        mesh.triangles.push_back({in[p], out[q % b], in[(p + 1) % a]});
        ++p;
      }
    }
  }
  return mesh;
}

// Latitude-longitude cap: pole plus `rings` rings of `segments` vertices, polar angle in (0, phi_max].
inline LabeledTriMesh lat_long_cap(const Vec3& center, double R, double phi_max, int rings, int segments) {
  LabeledTriMesh mesh;
  mesh.positions.push_back(center + R * Vec3::UnitZ());
  for (int j = 1; j <= rings; ++j) {
    const double phi = j == rings ? phi_max : phi_max * j / rings;
    for (int k = 0; k < segments; ++k) {
      const double a = 2.0 * pi * k / segments;
      mesh.positions.push_back(center + R * Vec3(std::sin(phi) * std::cos(a), std::sin(phi) * std::sin(a), std::cos(phi)));
    }
  }
  auto id = [&](int j, int k) { return 1 + (j - 1) * segments + (k % segments); };
  for (int k = 0; k < segments; ++k) mesh.triangles.push_back({0, id(1, k), id(1, k + 1)});
  for (int j = 1; j < rings; ++j)
    for (int k = 0; k < segments; ++k) {
      mesh.triangles.push_back({id(j, k), id(j + 1, k), id(j + 1, k + 1)});
      mesh.triangles.push_back({id(j, k), id(j + 1, k + 1), id(j, k + 1)});
    }
  return mesh;
}

}  // namespace detail

/// Exact analytic fields of a family evaluated at the vertices of `mesh` (which must lie on the
/// family's surface, e.g. a generated or projector-refined mesh).
inline GeometryFields exact_fields(const FamilySpec& spec, const LabeledTriMesh& mesh) {
  const Topology topo = build_topology(mesh);
  GeometryFields f;
  f.exact = true;
  f.resize(mesh.num_vertices());
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    const auto g = detail::point_geometry(spec, mesh.positions[v]);
    f.N[v] = g.N;
    f.shape[v] = g.shape;
    f.H[v] = 0.5 * g.shape.trace();
    f.sigma_sq[v] = (g.shape * g.shape).trace();
  }
  for (int v : topo.boundary_vertices()) {
    const auto g = detail::point_geometry(spec, mesh.positions[v]);
    f.add_boundary(detail::boundary_point(spec, g, mesh.positions[v], v, mesh.label_of(v)));
  }
  return f;
}

inline SurfaceProjector family_projector(const FamilySpec& spec) {
  SurfaceProjector proj;
  if (const auto* c = std::get_if<Cap>(&spec.variant)) {
    const Vec3 center = detail::cap_center(*c);
    const double R = c->R, rim = c->R * std::sin(c->theta);
    proj.surface = [center, R](const Vec3& p) -> Vec3 { return center + R * (p - center).normalized(); };
    proj.boundary = [rim](const Vec3& p, int) -> Vec3 { return rim * detail::radial_xy(p); };
  } else if (const auto* s = std::get_if<ClosedSphere>(&spec.variant)) {
    const double R = s->R;
    proj.surface = [R](const Vec3& p) -> Vec3 { return R * p.normalized(); };
  } else if (const auto* y = std::get_if<Cylinder>(&spec.variant)) {
    const double r = y->r;
    auto radial = [r](const Vec3& p) -> Vec3 { return Vec3(0, 0, p.z()) + r * detail::radial_xy(p); };
    proj.surface = radial;
    proj.boundary = [radial](const Vec3& p, int) { return radial(p); };
  } else if (const auto* d = std::get_if<FlatDisk>(&spec.variant)) {
    const double R = d->R;
    proj.surface = [](const Vec3& p) -> Vec3 { return Vec3(p.x(), p.y(), 0.0); };
    proj.boundary = [R](const Vec3& p, int) -> Vec3 { return R * detail::radial_xy(p); };
  } else if (const auto* m = std::get_if<MongePatch>(&spec.variant)) {
    const MongePatch patch = *m;
    proj.surface = [patch](const Vec3& p) -> Vec3 { return Vec3(p.x(), p.y(), detail::monge_height(patch, p.x(), p.y())); };
    proj.boundary = [patch](const Vec3& p, int) -> Vec3 {
      const Vec3 q = patch.R * detail::radial_xy(p);
      return Vec3(q.x(), q.y(), detail::monge_height(patch, q.x(), q.y()));
    };
  }
  return proj;
}

/// Structured mesh whose vertices lie exactly on the analytic surface, with exact fields.
/// Resolution is the number of vertices around the circumference; the other parametric direction
/// is chosen to keep the spacing comparable.
inline FamilyMesh generate_mesh(const FamilySpec& spec) {
  check_spec(spec);
  const int res = spec.resolution;
  FamilyMesh out;
  out.walls = induced_walls(spec);

  if (const auto* c = std::get_if<Cap>(&spec.variant)) {
    const int rings = std::max(2, static_cast<int>(std::lround(res * c->theta / pi)));
    out.mesh = detail::lat_long_cap(detail::cap_center(*c), c->R, c->theta, rings, res);
    const int first_rim = 1 + (rings - 1) * res;
    for (int k = 0; k < res; ++k) {
      out.mesh.positions[first_rim + k].z() = 0.0;
      out.mesh.boundary_labels[first_rim + k] = 0;
    }
  } else if (const auto* s = std::get_if<ClosedSphere>(&spec.variant)) {
    // Cap with polar angle up to pi minus the south pole, closed by a fan.
    const int rings = std::max(3, res);
    const double R = s->R;
    out.mesh = detail::lat_long_cap(Vec3::Zero(), R, pi * (rings - 1) / rings, rings - 1, res);
    const int south = static_cast<int>(out.mesh.positions.size());
    out.mesh.positions.push_back(-R * Vec3::UnitZ());
    const int last = 1 + (rings - 2) * res;
    for (int k = 0; k < res; ++k) out.mesh.triangles.push_back({last + k, south, last + (k + 1) % res});
  } else if (const auto* y = std::get_if<Cylinder>(&spec.variant)) {
    const int rows = std::max(1, static_cast<int>(std::lround(y->L * res / (2.0 * pi * y->r))));
    auto id = [&](int k, int j) { return j * res + (k % res); };
    for (int j = 0; j <= rows; ++j) {
      const double z = j == rows ? y->L : y->L * j / rows;
      for (int k = 0; k < res; ++k) {
        const double a = 2.0 * pi * k / res;
        out.mesh.positions.emplace_back(y->r * std::cos(a), y->r * std::sin(a), z);
      }
    }
    for (int j = 0; j < rows; ++j)
      for (int k = 0; k < res; ++k) {
        out.mesh.triangles.push_back({id(k, j), id(k + 1, j), id(k + 1, j + 1)});
        out.mesh.triangles.push_back({id(k, j), id(k + 1, j + 1), id(k, j + 1)});
      }
    for (int k = 0; k < res; ++k) {
      out.mesh.boundary_labels[id(k, 0)] = 0;
      out.mesh.boundary_labels[id(k, rows)] = 1;
    }
  } else if (const auto* d = std::get_if<FlatDisk>(&spec.variant)) {
    out.mesh = detail::concentric_disk(d->R, std::max(2, res / 2));
  } else if (const auto* m = std::get_if<MongePatch>(&spec.variant)) {
    out.mesh = detail::concentric_disk(m->R, std::max(2, res / 2));
    for (auto& p : out.mesh.positions) p.z() = detail::monge_height(*m, p.x(), p.y());
  }
  out.fields = exact_fields(spec, out.mesh);
  out.projector = family_projector(spec);
  return out;
}

/// phi = 1 + H <psi, N> + <a, N> with exact fields, on the family's generated mesh.
inline VectorXd analytic_test_function(const FamilySpec& spec, const Vec3& a) {
  if (!is_capillary_family(spec)) throw Error(ErrorKind::unsupported_family, family_name(spec) + " has no capillary test function");
  const auto fm = generate_mesh(spec);
  VectorXd phi(static_cast<Eigen::Index>(fm.mesh.num_vertices()));
  for (std::size_t v = 0; v < fm.mesh.num_vertices(); ++v)
    phi[static_cast<Eigen::Index>(v)] = 1.0 + fm.fields.H[v] * fm.mesh.positions[v].dot(fm.fields.N[v]) + a.dot(fm.fields.N[v]);
  return phi;
}

}  // namespace caplab
