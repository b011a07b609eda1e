#pragma once

#include "caplab/error.hpp"
#include "caplab/mesh.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>

namespace caplab {

/// Shortest decimal form guaranteed to round-trip (17 significant digits).
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// CAPMESH 1
// <nv> <nf> <nb>
// nv lines "x y z", nf lines "i j k", nb lines "v w"
inline void write_capmesh(std::ostream& os, const LabeledTriMesh& mesh) {
  os << "CAPMESH 1\n";
  os << mesh.num_vertices() << ' ' << mesh.num_faces() << ' ' << mesh.boundary_labels.size() << '\n';
  for (const auto& p : mesh.positions)
    os << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << format_double(p.z()) << '\n';
  for (const auto& t : mesh.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto& [v, w] : mesh.boundary_labels) os << v << ' ' << w << '\n';
}

namespace detail {

class LineReader {
 public:
  explicit LineReader(std::istream& is) : is_(is) {}

  /// Next non-empty line split into tokens; throws at end of input.
  std::vector<std::string> next(const char* what) {
    std::string line;
    while (std::getline(is_, line)) {
      ++line_;
      std::istringstream ss(line);
      std::vector<std::string> tokens;
      for (std::string tok; ss >> tok;) tokens.push_back(tok);
      if (!tokens.empty()) return tokens;
    }
    throw ParseError(line_ + 1, std::string("unexpected end of file, expected ") + what);
  }

  bool at_end() {
    std::string line;
    while (std::getline(is_, line)) {
      ++line_;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return false;
    }
    return true;
  }

  std::size_t line() const { return line_; }

 private:
  std::istream& is_;
  std::size_t line_ = 0;
};

inline double parse_real(const std::string& tok, std::size_t line) {
  char* end = nullptr;
  const double x = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0' || !std::isfinite(x)) throw ParseError(line, "not a finite number: '" + tok + "'");
  return x;
}

inline long parse_int(const std::string& tok, std::size_t line) {
  char* end = nullptr;
  const long x = std::strtol(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0') throw ParseError(line, "not an integer: '" + tok + "'");
  return x;
}

}  // namespace detail

inline LabeledTriMesh read_capmesh(std::istream& is) {
  detail::LineReader reader(is);
  auto header = reader.next("header");
  if (header.size() != 2 || header[0] != "CAPMESH" || header[1] != "1")
    throw ParseError(reader.line(), "malformed header, expected 'CAPMESH 1'");

  auto counts = reader.next("counts");
  if (counts.size() != 3) throw ParseError(reader.line(), "expected '<nv> <nf> <nb>'");
  const long nv = detail::parse_int(counts[0], reader.line());
  const long nf = detail::parse_int(counts[1], reader.line());
  const long nb = detail::parse_int(counts[2], reader.line());
  if (nv < 0 || nf < 0 || nb < 0) throw ParseError(reader.line(), "negative count");

  LabeledTriMesh mesh;
  mesh.positions.reserve(static_cast<std::size_t>(nv));
  for (long i = 0; i < nv; ++i) {
    auto tok = reader.next("vertex");
    if (tok.size() != 3) throw ParseError(reader.line(), "vertex line needs 3 coordinates");
    mesh.positions.emplace_back(detail::parse_real(tok[0], reader.line()), detail::parse_real(tok[1], reader.line()),
                                detail::parse_real(tok[2], reader.line()));
  }
  std::vector<std::size_t> face_line;
  for (long i = 0; i < nf; ++i) {
    auto tok = reader.next("face");
    if (tok.size() != 3) throw ParseError(reader.line(), "face line needs 3 indices");
    Tri t;
    for (int k = 0; k < 3; ++k) {
      const long idx = detail::parse_int(tok[k], reader.line());
      if (idx < 0 || idx >= nv)
        throw ParseError(reader.line(), "vertex index " + std::to_string(idx) + " out of range [0, " + std::to_string(nv) + ")");
      t[k] = static_cast<int>(idx);
    }
    mesh.triangles.push_back(t);
  }
  const Topology topo = build_topology(mesh);
  for (long i = 0; i < nb; ++i) {
    auto tok = reader.next("boundary label");
    if (tok.size() != 2) throw ParseError(reader.line(), "label line needs '<vertex> <wall>'");
    const long v = detail::parse_int(tok[0], reader.line());
    const long w = detail::parse_int(tok[1], reader.line());
    if (v < 0 || v >= nv) throw ParseError(reader.line(), "labeled vertex " + std::to_string(v) + " out of range");
    if (w < 0) throw ParseError(reader.line(), "negative wall index");
    if (!topo.is_boundary(static_cast<int>(v)))
      throw ParseError(reader.line(), "label on non-boundary vertex " + std::to_string(v));
    if (!mesh.boundary_labels.emplace(static_cast<int>(v), static_cast<int>(w)).second)
      throw ParseError(reader.line(), "duplicate label for vertex " + std::to_string(v));
  }
  if (!reader.at_end()) throw ParseError(reader.line(), "trailing content after declared records");
  return mesh;
}

// Wall-set document: JSON array of {"normal": [x,y,z], "offset": d, "angle_rad": theta}.
inline nlohmann::json walls_to_json(const WallSet& walls) {
  auto doc = nlohmann::json::array();
  for (std::size_t i = 0; i < walls.size(); ++i) {
    const auto& w = walls.walls[i];
    doc.push_back({{"normal", {w.normal.x(), w.normal.y(), w.normal.z()}}, {"offset", w.offset}, {"angle_rad", walls.angles[i]}});
  }
  return doc;
}

inline WallSet walls_from_json(const nlohmann::json& doc) {
  if (!doc.is_array()) throw ParseError(0, "wall-set document must be a list");
  WallSet walls;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& item = doc[i];
    const std::string where = "wall " + std::to_string(i) + ": ";
    if (!item.is_object() || !item.contains("normal") || !item.contains("offset") || !item.contains("angle_rad"))
      throw ParseError(0, where + "expected keys normal, offset, angle_rad");
    const auto& n = item.at("normal");
    if (!n.is_array() || n.size() != 3 || !n[0].is_number() || !n[1].is_number() || !n[2].is_number())
      throw ParseError(0, where + "normal must be 3 numbers");
    if (!item.at("offset").is_number() || !item.at("angle_rad").is_number())
      throw ParseError(0, where + "offset and angle_rad must be numbers");
    Hyperplane plane;
    plane.normal = Vec3(n[0].get<double>(), n[1].get<double>(), n[2].get<double>());
    plane.offset = item.at("offset").get<double>();
    if (std::abs(plane.normal.norm() - 1.0) > 1e-12) throw ParseError(0, where + "normal is not unit length");
    walls.add(plane, item.at("angle_rad").get<double>());
  }
  return walls;
}

inline void write_walls(std::ostream& os, const WallSet& walls) {
  os << walls_to_json(walls).dump(2) << '\n';
}

inline WallSet read_walls(std::istream& is) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, std::string("wall-set document: ") + e.what());
  }
  return walls_from_json(doc);
}

/// Conventional companion path for a mesh's wall-set document: `foo.capmesh` -> `foo.walls.json`.
inline std::filesystem::path walls_path_for(const std::filesystem::path& mesh_path) {
  auto p = mesh_path;
  p.replace_extension(".walls.json");
  return p;
}

inline void save(const LabeledTriMesh& mesh, const WallSet& walls, const std::filesystem::path& mesh_path,
                 std::filesystem::path walls_path = {}) {
  if (walls_path.empty()) walls_path = walls_path_for(mesh_path);
  std::ofstream m(mesh_path);
  if (!m) throw Error(ErrorKind::invalid_spec, "cannot write " + mesh_path.string());
  write_capmesh(m, mesh);
  std::ofstream w(walls_path);
  if (!w) throw Error(ErrorKind::invalid_spec, "cannot write " + walls_path.string());
  write_walls(w, walls);
}

/// Loads a mesh and its wall set. A missing companion wall-set file yields an empty wall set.
inline std::pair<LabeledTriMesh, WallSet> load(const std::filesystem::path& mesh_path, std::filesystem::path walls_path = {}) {
  std::ifstream m(mesh_path);
  if (!m) throw ParseError(0, "cannot open " + mesh_path.string());
  LabeledTriMesh mesh = read_capmesh(m);

  WallSet walls;
  const bool explicit_walls = !walls_path.empty();
  if (!explicit_walls) walls_path = walls_path_for(mesh_path);
  if (std::filesystem::exists(walls_path)) {
    std::ifstream w(walls_path);
    walls = read_walls(w);
  } else if (explicit_walls) {
    throw ParseError(0, "cannot open " + walls_path.string());
  }
  for (const auto& [v, w] : mesh.boundary_labels)
    if (static_cast<std::size_t>(w) >= walls.size())
      throw ParseError(0, "vertex " + std::to_string(v) + " labeled with wall " + std::to_string(w) + " but only " +
                              std::to_string(walls.size()) + " walls are defined");
  return {std::move(mesh), std::move(walls)};
}

}  // namespace caplab
