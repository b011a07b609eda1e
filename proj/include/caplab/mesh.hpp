#pragma once

#include "caplab/error.hpp"
#include "caplab/types.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace caplab {

/// Oriented triangle mesh realizing an immersion, with boundary vertices labeled by the wall
/// that supports them.
struct LabeledTriMesh {
  std::vector<Vec3> positions;
  std::vector<Tri> triangles;
  std::map<int, int> boundary_labels;

  std::size_t num_vertices() const { return positions.size(); }
  std::size_t num_faces() const { return triangles.size(); }

  /// -1 when the vertex carries no label.
  int label_of(int v) const {
    auto it = boundary_labels.find(v);
    return it == boundary_labels.end() ? -1 : it->second;
  }
};

inline double bounding_box_diameter(const std::vector<Vec3>& positions) {
  if (positions.empty()) return 0.0;
  Vec3 lo = positions.front(), hi = positions.front();
  for (const auto& p : positions) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

inline double surface_area(const LabeledTriMesh& mesh) {
  double area = 0.0;
  for (const auto& t : mesh.triangles)
    area += triangle_area(mesh.positions[t[0]], mesh.positions[t[1]], mesh.positions[t[2]]);
  return area;
}

inline LabeledTriMesh transform(const LabeledTriMesh& mesh, const Mat3& rotation, const Vec3& translation) {
  LabeledTriMesh out = mesh;
  for (auto& p : out.positions) p = rotation * p + translation;
  return out;
}

inline LabeledTriMesh scale(const LabeledTriMesh& mesh, double s) {
  LabeledTriMesh out = mesh;
  for (auto& p : out.positions) p *= s;
  return out;
}

inline WallSet scale(const WallSet& walls, double s) {
  WallSet out = walls;
  for (auto& w : out.walls) w.offset *= s;
  return out;
}

// ---------------------------------------------------------------------------
// Topology

namespace detail {
inline std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}
}  // namespace detail

/// Adjacency derived from the triangle list. Boundary edges keep the direction in which their
/// single triangle traverses them, so each boundary loop inherits the mesh orientation.
struct Topology {
  std::size_t num_vertices = 0;
  std::vector<std::vector<int>> neighbors;     // sorted one-rings
  std::vector<std::vector<int>> vertex_faces;  // incident triangles
  std::vector<std::array<int, 2>> boundary_edges;
  std::vector<int> boundary_edge_face;
  std::vector<std::vector<int>> boundary_loops;
  std::vector<int> boundary_next;  // -1 off the boundary
  std::vector<int> boundary_prev;

  // Defects found while building; empty for a valid manifold mesh.
  std::vector<std::array<int, 2>> nonmanifold_edges;
  std::vector<std::array<int, 2>> inconsistent_edges;
  std::vector<int> nonmanifold_boundary_vertices;
  std::vector<int> bad_faces;

  bool is_boundary(int v) const { return boundary_next[v] >= 0 || boundary_prev[v] >= 0; }

  std::vector<int> boundary_vertices() const {
    std::vector<int> out;
    for (std::size_t v = 0; v < num_vertices; ++v)
      if (is_boundary(static_cast<int>(v))) out.push_back(static_cast<int>(v));
    return out;
  }
};

inline Topology build_topology(const LabeledTriMesh& mesh) {
  Topology topo;
  const std::size_t nv = mesh.num_vertices();
  topo.num_vertices = nv;
  topo.neighbors.assign(nv, {});
  topo.vertex_faces.assign(nv, {});
  topo.boundary_next.assign(nv, -1);
  topo.boundary_prev.assign(nv, -1);

  struct EdgeUse {
    int count = 0;
    int forward = 0;  // traversals min -> max
    int face = -1;
    int from = -1, to = -1;
  };
  std::unordered_map<std::uint64_t, EdgeUse> edges;
  edges.reserve(mesh.num_faces() * 2);

  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const Tri& t = mesh.triangles[f];
    bool ok = true;
    for (int k = 0; k < 3; ++k)
      if (t[k] < 0 || static_cast<std::size_t>(t[k]) >= nv) ok = false;
    if (!ok || t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      topo.bad_faces.push_back(static_cast<int>(f));
      continue;
    }
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3];
      topo.vertex_faces[a].push_back(static_cast<int>(f));
      topo.neighbors[a].push_back(b);
      topo.neighbors[b].push_back(a);
      auto& e = edges[detail::edge_key(a, b)];
      ++e.count;
      if (a < b) ++e.forward;
      e.face = static_cast<int>(f);
      e.from = a;
      e.to = b;
    }
  }
  for (auto& ring : topo.neighbors) {
    std::sort(ring.begin(), ring.end());
    ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
  }

  std::vector<std::pair<std::uint64_t, EdgeUse>> sorted(edges.begin(), edges.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) { return x.first < y.first; });

  std::vector<int> out_degree(nv, 0), in_degree(nv, 0);
  for (const auto& [key, e] : sorted) {
    const int lo = static_cast<int>(key >> 32), hi = static_cast<int>(key & 0xffffffffu);
    if (e.count > 2) {
      topo.nonmanifold_edges.push_back({lo, hi});
    } else if (e.count == 2 && e.forward != 1) {
      topo.inconsistent_edges.push_back({lo, hi});
    } else if (e.count == 1) {
      topo.boundary_edges.push_back({e.from, e.to});
      topo.boundary_edge_face.push_back(e.face);
      ++out_degree[e.from];
      ++in_degree[e.to];
      topo.boundary_next[e.from] = e.to;
      topo.boundary_prev[e.to] = e.from;
    }
  }

  for (std::size_t v = 0; v < nv; ++v)
    if (out_degree[v] > 1 || in_degree[v] > 1 || out_degree[v] != in_degree[v])
      topo.nonmanifold_boundary_vertices.push_back(static_cast<int>(v));

  if (topo.nonmanifold_boundary_vertices.empty()) {
    std::vector<char> seen(nv, 0);
    for (std::size_t s = 0; s < nv; ++s) {
      if (topo.boundary_next[s] < 0 || seen[s]) continue;
      std::vector<int> loop;
      int v = static_cast<int>(s);
      while (!seen[v]) {
        seen[v] = 1;
        loop.push_back(v);
        v = topo.boundary_next[v];
      }
      topo.boundary_loops.push_back(std::move(loop));
    }
  }
  return topo;
}

/// Vertices within `rings` edge hops of v, excluding v, in sorted order.
inline std::vector<int> k_ring(const Topology& topo, int v, int rings) {
  std::vector<int> frontier{v}, found{v};
  for (int r = 0; r < rings; ++r) {
    std::vector<int> next;
    for (int u : frontier)
      for (int w : topo.neighbors[u])
        if (std::find(found.begin(), found.end(), w) == found.end()) {
          found.push_back(w);
          next.push_back(w);
        }
    frontier = std::move(next);
  }
  found.erase(found.begin());
  std::sort(found.begin(), found.end());
  return found;
}

// ---------------------------------------------------------------------------
// Validation

struct ValidationIssue {
  std::string kind;
  std::vector<int> indices;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool passed() const { return issues.empty(); }
  bool has(const std::string& kind) const {
    return std::any_of(issues.begin(), issues.end(), [&](const auto& i) { return i.kind == kind; });
  }
  std::string summary() const {
    std::ostringstream os;
    for (const auto& i : issues) {
      os << i.kind << " [";
      for (std::size_t k = 0; k < i.indices.size() && k < 8; ++k) os << (k ? "," : "") << i.indices[k];
      if (i.indices.size() > 8) os << ",...";
      os << "]";
      if (!i.detail.empty()) os << " " << i.detail;
      os << "; ";
    }
    return os.str();
  }
};

/// Centroid of the wall-labeled boundary vertices (of all vertices when there are none). A frame-free
/// anchor for choosing an origin inside the walls.
inline Vec3 boundary_centroid(const LabeledTriMesh& mesh) {
  Vec3 s = Vec3::Zero();
  std::size_t k = 0;
  for (const auto& [v, w] : mesh.boundary_labels) {
    s += mesh.positions[static_cast<std::size_t>(v)];
    ++k;
  }
  if (k == 0) {
    for (const auto& p : mesh.positions) s += p;
    k = mesh.positions.size();
  }
  return k ? Vec3(s / static_cast<double>(k)) : Vec3::Zero();
}

/// Plane-incidence tolerance, proportional to the bounding-box diameter.
inline double plane_tolerance(const LabeledTriMesh& mesh, double relative = 1e-9) {
  return relative * std::max(bounding_box_diameter(mesh.positions), 1e-300);
}

/// Checks every structural invariant of a labeled mesh against its walls. When `walls` is empty
/// the boundary is treated as unsupported and labels must be absent.
inline ValidationReport validate(const LabeledTriMesh& mesh, const WallSet& walls, double plane_tol_relative = 1e-9) {
  ValidationReport report;
  auto add = [&](std::string kind, std::vector<int> idx, std::string detail = {}) {
    if (!idx.empty()) report.issues.push_back({std::move(kind), std::move(idx), std::move(detail)});
  };

  if (mesh.triangles.empty() || mesh.positions.empty()) {
    report.issues.push_back({"empty-mesh", {}, "no triangles"});
    return report;
  }
  if (walls.walls.size() != walls.angles.size()) report.issues.push_back({"wall-set", {}, "walls and angles differ in length"});
  {
    std::vector<int> bad_normal, bad_angle;
    for (std::size_t i = 0; i < walls.size(); ++i) {
      if (std::abs(walls.walls[i].normal.norm() - 1.0) > 1e-12) bad_normal.push_back(static_cast<int>(i));
      if (i < walls.angles.size() && !(walls.angles[i] > 0.0 && walls.angles[i] < pi)) bad_angle.push_back(static_cast<int>(i));
    }
    add("wall-normal", bad_normal, "normal not unit length");
    add("wall-angle", bad_angle, "angle outside (0, pi)");
  }

  const Topology topo = build_topology(mesh);
  add("bad-face", topo.bad_faces, "index out of range or repeated vertex");
  {
    std::vector<int> idx;
    for (const auto& e : topo.nonmanifold_edges) idx.insert(idx.end(), e.begin(), e.end());
    add("non-manifold-edge", idx);
  }
  {
    std::vector<int> idx;
    for (const auto& e : topo.inconsistent_edges) idx.insert(idx.end(), e.begin(), e.end());
    add("orientation", idx, "interior edge traversed twice in the same direction");
  }
  add("boundary-loop", topo.nonmanifold_boundary_vertices, "boundary edges do not form simple closed loops");

  const double tol = plane_tolerance(mesh, plane_tol_relative);
  std::vector<int> missing, interior_labeled, out_of_range, off_plane, mixed;
  for (const auto& [v, w] : mesh.boundary_labels) {
    if (v < 0 || static_cast<std::size_t>(v) >= mesh.num_vertices()) {
      out_of_range.push_back(v);
      continue;
    }
    if (!topo.is_boundary(v)) interior_labeled.push_back(v);
    if (w < 0 || static_cast<std::size_t>(w) >= walls.size()) {
      out_of_range.push_back(v);
      continue;
    }
    if (std::abs(walls.walls[w].signed_distance(mesh.positions[v])) > tol) off_plane.push_back(v);
  }
  if (!walls.empty())
    for (int v : topo.boundary_vertices())
      if (!mesh.boundary_labels.count(v)) missing.push_back(v);
  for (const auto& e : topo.boundary_edges) {
    const int la = mesh.label_of(e[0]), lb = mesh.label_of(e[1]);
    if (la >= 0 && lb >= 0 && la != lb) {
      mixed.push_back(e[0]);
      mixed.push_back(e[1]);
    }
  }
  add("missing-label", missing, "boundary vertex without a wall label");
  add("interior-label", interior_labeled, "label on a non-boundary vertex");
  add("label-range", out_of_range, "label refers to no wall");
  add("plane-incidence", off_plane, "boundary vertex off its wall plane");
  add("mixed-label", mixed, "boundary edge joins two walls");
  return report;
}

// ---------------------------------------------------------------------------
// Refinement

/// Optional analytic projection used by refinement. `boundary` receives the wall label of the
/// new vertex, or -1 for a boundary vertex with no supporting wall.
struct SurfaceProjector {
  std::function<Vec3(const Vec3&)> surface;
  std::function<Vec3(const Vec3&, int)> boundary;
};

/// 1 -> 4 midpoint subdivision. New boundary midpoints inherit their edge's label and are placed
/// on the wall plane; with a projector every new vertex is first mapped back to the surface.
inline LabeledTriMesh refine(const LabeledTriMesh& mesh, const WallSet& walls,
                             const std::optional<SurfaceProjector>& projector = std::nullopt) {
  if (auto report = validate(mesh, walls); !report.passed())
    throw Error(ErrorKind::validation_failure, report.summary());

  const Topology topo = build_topology(mesh);
  LabeledTriMesh out;
  out.positions = mesh.positions;
  out.boundary_labels = mesh.boundary_labels;

  std::unordered_map<std::uint64_t, int> midpoint;
  midpoint.reserve(mesh.num_faces() * 2);
  // Deterministic numbering: edges in face order.
  auto get_mid = [&](int a, int b) {
    const auto key = detail::edge_key(a, b);
    if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
    const int id = static_cast<int>(out.positions.size());
    out.positions.push_back(0.5 * (mesh.positions[a] + mesh.positions[b]));
    midpoint.emplace(key, id);
    return id;
  };
  for (const auto& t : mesh.triangles) {
    const int ab = get_mid(t[0], t[1]), bc = get_mid(t[1], t[2]), ca = get_mid(t[2], t[0]);
    out.triangles.push_back({t[0], ab, ca});
    out.triangles.push_back({ab, t[1], bc});
    out.triangles.push_back({ca, bc, t[2]});
    out.triangles.push_back({ab, bc, ca});
  }

  std::vector<char> on_boundary(out.positions.size(), 0);
  std::vector<int> new_label(out.positions.size(), -1);
  for (const auto& e : topo.boundary_edges) {
    const int m = midpoint.at(detail::edge_key(e[0], e[1]));
    on_boundary[m] = 1;
    new_label[m] = mesh.label_of(e[0]);
  }
  for (std::size_t v = mesh.num_vertices(); v < out.positions.size(); ++v) {
    Vec3& p = out.positions[v];
    if (!on_boundary[v]) {
      if (projector && projector->surface) p = projector->surface(p);
      continue;
    }
    const int w = new_label[v];
    if (projector && projector->boundary) p = projector->boundary(p, w);
    if (w >= 0) {
      p = walls.walls[w].project(p);
      out.boundary_labels[static_cast<int>(v)] = w;
    }
  }
  return out;
}

}  // namespace caplab
