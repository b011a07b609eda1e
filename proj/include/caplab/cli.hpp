#pragma once

// Command-line front end. Exit codes: 0 success, 1 tolerance failure, 2 input error,
// 3 solver failure.

#include "caplab/caplab.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace caplab::cli {

enum ExitCode : int { ok = 0, tolerance_failure = 1, input_error = 2, solver_failed = 3 };

inline constexpr const char* out_env = "CAPLAB_OUT";

inline double deg2rad(double d) { return d * pi / 180.0; }

/// Family or mesh source shared by most commands.
struct Source {
  std::string family;        // cap | cylinder | disk | sphere | monge
  double radius = 1.0;       // R, or r for the cylinder
  double angle_deg = 90.0;   // cap contact angle
  double length = 2.0;       // cylinder length
  double amplitude = 0.1;    // Monge patch
  int res = 32;
  std::string mesh;          // CAPMESH path (instead of a family)
  std::string walls;         // wall-set path, defaults to the companion of the mesh
  std::string fields = "auto";

  void add_options(CLI::App* app, bool family_positional = true) {
    if (family_positional)
      app->add_option("family", family, "cap, cylinder, disk, sphere or monge")
          ->check(CLI::IsMember({"cap", "cylinder", "disk", "sphere", "monge"}));
    app->add_option("--radius,--r", radius, "R (cap, disk, sphere, monge) or r (cylinder)");
    app->add_option("--angle-deg", angle_deg, "cap contact angle in degrees");
    app->add_option("--length", length, "cylinder length L");
    app->add_option("--amplitude", amplitude, "Monge patch amplitude");
    app->add_option("--res", res, "resolution (vertices per parametric direction)");
    app->add_option("--mesh", mesh, "CAPMESH file instead of a family");
    app->add_option("--walls", walls, "wall-set file (default: the mesh's companion .walls.json)");
    app->add_option("--fields", fields, "auto, exact or estimated")->check(CLI::IsMember({"auto", "exact", "estimated"}));
  }

  bool is_family() const { return mesh.empty(); }

  FamilySpec spec(int resolution) const {
    FamilySpec s;
    s.resolution = resolution;
    if (family == "cap") s.variant = Cap{radius, deg2rad(angle_deg)};
    else if (family == "cylinder") s.variant = Cylinder{radius, length};
    else if (family == "disk") s.variant = FlatDisk{radius};
    else if (family == "sphere") s.variant = ClosedSphere{radius};
    else if (family == "monge") s.variant = MongePatch{amplitude, radius};
    else throw Error(ErrorKind::invalid_spec, "a family or --mesh is required");
    check_spec(s);
    return s;
  }
  FamilySpec spec() const { return spec(res); }
};

/// Mesh, walls and the two field sets a command may need.
struct Loaded {
  LabeledTriMesh mesh;
  WallSet walls;
  std::optional<GeometryFields> exact;
  GeometryFields estimated_or_exact;  // the fields the command asked for
  std::string tag;
};

inline Loaded load_source(const Source& src, int resolution, bool prefer_exact) {
  Loaded out;
  bool use_exact = prefer_exact;
  if (src.fields == "exact") use_exact = true;
  if (src.fields == "estimated") use_exact = false;
  if (src.is_family()) {
    const FamilySpec s = src.spec(resolution);
    FamilyMesh fm = generate_mesh(s);
    out.mesh = std::move(fm.mesh);
    out.walls = std::move(fm.walls);
    out.exact = std::move(fm.fields);
    out.tag = std::to_string(resolution);
  } else {
    if (src.fields == "exact") throw Error(ErrorKind::invalid_spec, "exact fields need a family, not a mesh file");
    auto [m, w] = load(src.mesh, src.walls);
    const ValidationReport vr = validate(m, w);
    if (!vr.passed()) throw Error(ErrorKind::validation_failure, vr.summary());
    out.mesh = std::move(m);
    out.walls = std::move(w);
    out.tag = "level0";
    use_exact = false;
  }
  out.estimated_or_exact = use_exact ? *out.exact : estimate_fields(out.mesh, out.walls);
  return out;
}

inline std::filesystem::path out_dir(const std::string& flag) {
  std::filesystem::path p = flag;
  if (p.empty()) {
    const char* env = std::getenv(out_env);
    p = env && *env ? env : ".";
  }
  std::filesystem::create_directories(p);
  return p;
}

inline void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw Error(ErrorKind::invalid_spec, "cannot write " + p.string());
  os << s;
}

inline void write_json(const std::filesystem::path& p, const nlohmann::json& j) { write_text(p, j.dump(2) + "\n"); }

inline nlohmann::json source_json(const Source& src) {
  nlohmann::json j;
  if (src.is_family()) {
    j = to_json(src.spec());
  } else {
    j["mesh"] = src.mesh;
    if (!src.walls.empty()) j["walls"] = src.walls;
  }
  j["fields"] = src.fields;
  return j;
}

// ---------------------------------------------------------------------------------------------

inline int cmd_gen(const Source& src, const std::string& out, std::string name) {
  const FamilySpec spec = src.spec();
  const FamilyMesh fm = generate_mesh(spec);
  if (name.empty()) name = src.family;
  const auto dir = out_dir(out);
  const auto path = dir / (name + ".capmesh");
  save(fm.mesh, fm.walls, path);
  const ValidationReport vr = validate(fm.mesh, fm.walls);
  std::cout << path.string() << '\n' << walls_path_for(path).string() << '\n';
  std::cout << "vertices " << fm.mesh.num_vertices() << ", faces " << fm.mesh.num_faces() << ", walls " << fm.walls.size()
            << ", valid " << (vr.passed() ? "yes" : "no") << '\n';
  return vr.passed() ? ok : tolerance_failure;
}

inline int cmd_identities(const Source& src, int levels, double tol_scale, const std::string& out) {
  if (levels < 1 || levels > 6) throw Error(ErrorKind::invalid_spec, "levels must lie in [1, 6]");
  std::vector<std::vector<IdentityReport>> all;
  if (src.is_family()) {
    for (int k = 0; k < levels; ++k) {
      const int res = src.res << k;
      const Loaded l = load_source(src, res, false);
      SuiteOptions opt;
      if (l.exact && src.fields != "estimated") opt.jacobi_fields = &*l.exact;
      all.push_back(run_suite(l.mesh, l.walls, l.estimated_or_exact, l.tag, opt));
    }
  } else {
    Loaded l = load_source(src, src.res, false);
    LabeledTriMesh mesh = l.mesh;
    for (int k = 0; k < levels; ++k) {
      if (k > 0) mesh = refine(mesh, l.walls);
      const GeometryFields f = estimate_fields(mesh, l.walls);
      all.push_back(run_suite(mesh, l.walls, f, "level" + std::to_string(k)));
    }
  }
  for (auto& level : all)
    for (auto& r : level) r.tolerance *= tol_scale;

  const auto dir = out_dir(out);
  std::ostringstream csv;
  write_identity_csv_header(csv);
  nlohmann::json doc = report_header("identities");
  doc["source"] = source_json(src);
  doc["levels"] = levels;
  doc["tolerances"] = {{"default", 0.02 * tol_scale}, {"conormal_principal", 0.05 * tol_scale}};
  doc["reports"] = nlohmann::json::array();
  for (const auto& level : all)
    for (const auto& r : level) {
      write_identity_csv_row(csv, r);
      doc["reports"].push_back(to_json(r));
    }
  write_text(dir / "identities.csv", csv.str());
  write_json(dir / "identities.json", doc);
  std::cout << csv.str();

  int code = ok;
  for (const auto& r : all.back())
    if (!r.passed()) {
      std::cerr << "tolerance failure: ";
      write_identity_csv_row(std::cerr, r);
      code = tolerance_failure;
    }
  return code;
}

inline int cmd_stability(const Source& src, std::optional<double> tol, int count, const std::string& out) {
  const Loaded l = load_source(src, src.res, true);
  const IndexFormSystem sys = assemble_index_form(l.mesh, l.walls, l.estimated_or_exact);
  const StabilityVerdict v = stability_verdict(sys, tol, count);
  const auto dir = out_dir(out);
  nlohmann::json doc = report_header("stability");
  doc["source"] = source_json(src);
  doc["tolerances"] = {{"tol", v.tol_used}, {"tol_factor", tol ? nlohmann::json(nullptr) : nlohmann::json(default_tol_factor)}};
  doc["verdict"] = to_json(v);
  doc["vertices"] = l.mesh.num_vertices();
  write_json(dir / "stability.json", doc);
  std::ostringstream ef;
  write_vertex_function_csv(ef, v.eigenfunction, "eigenfunction");
  write_text(dir / "eigenfunction.csv", ef.str());
  std::cout << (v.stable ? "stable" : "unstable") << " lambda_min " << format_double(v.lambda_min) << " tol "
            << format_double(v.tol_used) << '\n';
  std::cout << "eigenvalues";
  for (double e : v.eigenvalues) std::cout << ' ' << format_double(e);
  std::cout << '\n';
  return ok;
}

inline int cmd_testfn(const Source& src, bool identity_mode, const std::vector<double>& a_in, double tol,
                      const std::string& out) {
  const Loaded l = load_source(src, src.res, false);
  TestFunctionReport r;
  if (identity_mode) {
    r = build_test_function(l.mesh, l.walls, l.estimated_or_exact, Vec3::Zero(), true);
  } else if (!a_in.empty()) {
    if (a_in.size() != 3) throw Error(ErrorKind::invalid_spec, "--a takes three components");
    r = build_test_function(l.mesh, l.walls, l.estimated_or_exact, Vec3(a_in[0], a_in[1], a_in[2]), false);
  } else {
    r = build_test_function(l.mesh, l.walls, l.estimated_or_exact);
  }
  const double scale = std::max({std::abs(r.index_quadratic), std::abs(r.index_closed), r.area * r.max_sigma_sq * 1e-12});
  const double rel = r.match_residual / scale;
  const auto dir = out_dir(out);
  nlohmann::json doc = report_header("testfn");
  doc["source"] = source_json(src);
  doc["tolerances"] = {{"match_relative", tol}};
  doc["report"] = to_json(r);
  doc["match_relative"] = rel;
  write_json(dir / "testfn.json", doc);
  std::ostringstream csv;
  write_vertex_function_csv(csv, r.phi, "phi");
  write_text(dir / "phi.csv", csv.str());
  std::cout << "phi^T A phi " << format_double(r.index_quadratic) << "\n-int(|sigma|^2-nH^2)phi " << format_double(r.index_closed)
            << "\nmax|phi| " << format_double(r.max_abs_phi) << "\nmean_residual " << format_double(r.mean_residual)
            << "\nrobin_max " << format_double(r.robin_max) << '\n';
  // a vanishing phi makes both sides round-off; the relative check only applies when they are not
  const bool trivial = scale <= 1e-3 * r.area * std::max(r.max_sigma_sq, 1e-300);
  return (trivial || rel <= tol) ? ok : tolerance_failure;
}

inline int cmd_wedge(const std::string& walls_path, const std::vector<std::vector<double>>& normals,
                     const std::vector<double>& angles_deg, const std::string& mesh_path, const std::string& out) {
  WallSet walls;
  if (!walls_path.empty()) {
    std::ifstream is(walls_path);
    if (!is) throw Error(ErrorKind::parse_error, "cannot open " + walls_path);
    walls = read_walls(is);
  } else {
    if (normals.size() != angles_deg.size() || normals.empty())
      throw Error(ErrorKind::invalid_spec, "give one --angle-deg per --normal");
    for (std::size_t i = 0; i < normals.size(); ++i) {
      if (normals[i].size() != 3) throw Error(ErrorKind::invalid_spec, "--normal takes three components");
      walls.add(Hyperplane{Vec3(normals[i][0], normals[i][1], normals[i][2]), 0.0}, deg2rad(angles_deg[i]));
    }
  }
  nlohmann::json doc = report_header("wedge");
  doc["walls"] = walls_to_json(walls);
  const WedgeSolution ws = solve_a(walls);
  std::vector<Vec3> ns;
  for (const auto& w : walls.walls) ns.push_back(w.normal);
  const double dm = delta_max(ns);
  doc["solution"] = to_json(ws);
  doc["delta_max"] = dm;
  std::cout << "a " << format_double(ws.a.x()) << ' ' << format_double(ws.a.y()) << ' ' << format_double(ws.a.z()) << "\n|a| "
            << format_double(ws.norm_a) << "\ndelta_max " << format_double(dm) << '\n';
  if (!mesh_path.empty()) {
    auto [m, w] = load(mesh_path, walls_path);
    const GeometryFields f = estimate_fields(m, w);
    const StabilityVerdict v = stability_verdict(assemble_index_form(m, w, f));
    const ClassifyReport cr = classify(m, w, f, v);
    doc["classify"] = to_json(cr);
    std::cout << "hypotheses " << (cr.hypotheses_met ? "met" : "not met");
    for (const auto& u : cr.unmet) std::cout << ' ' << u;
    std::cout << '\n';
    if (cr.sphere) std::cout << "sphericity " << format_double(cr.sphere->residual) << '\n';
  }
  write_json(out_dir(out) / "wedge.json", doc);
  return ok;
}

struct SweepRow {
  double param = 0.0;
  double lambda_min = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::optional<std::pair<double, double>> bracket;
  std::optional<double> root;  // linear interpolation inside the bracket
};

/// Runs the family over param in [from, to] (inclusive grid) and locates the first sign change
/// of lambda_min.
inline SweepResult run_sweep(const Source& src, const std::string& param, double from, double to, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw Error(ErrorKind::invalid_spec, "step must be positive");
  if (!(to >= from)) throw Error(ErrorKind::invalid_spec, "empty parameter range");
  const long n = static_cast<long>(std::floor((to - from) / step + 1e-9)) + 1;
  if (n > 10000) throw Error(ErrorKind::invalid_spec, "too many sweep points");
  std::vector<std::future<SweepRow>> jobs;
  for (long i = 0; i < n; ++i) {
    const double p = from + static_cast<double>(i) * step;
    Source s = src;
    if (param == "length") s.length = p;
    else if (param == "radius") s.radius = p;
    else if (param == "angle-deg") s.angle_deg = p;
    else if (param == "amplitude") s.amplitude = p;
    else throw Error(ErrorKind::invalid_spec, "unknown sweep parameter " + param);
    jobs.push_back(std::async(std::launch::async, [s, p] {
      const Loaded l = load_source(s, s.res, true);
      const StabilityVerdict v = stability_verdict(assemble_index_form(l.mesh, l.walls, l.estimated_or_exact));
      return SweepRow{p, v.lambda_min};
    }));
  }
  SweepResult out;
  for (auto& j : jobs) out.rows.push_back(j.get());
  std::sort(out.rows.begin(), out.rows.end(), [](const SweepRow& a, const SweepRow& b) { return a.param < b.param; });
  for (std::size_t i = 0; i + 1 < out.rows.size(); ++i) {
    const double a = out.rows[i].lambda_min, b = out.rows[i + 1].lambda_min;
    if ((a >= 0.0) != (b >= 0.0)) {
      out.bracket = std::make_pair(out.rows[i].param, out.rows[i + 1].param);
      out.root = out.rows[i].param + (out.rows[i + 1].param - out.rows[i].param) * a / (a - b);
      break;
    }
  }
  return out;
}

inline int cmd_sweep(const Source& src, const std::string& param, double from, double to, double step, const std::string& out) {
  if (!src.is_family()) throw Error(ErrorKind::invalid_spec, "sweep needs a family");
  const SweepResult r = run_sweep(src, param, from, to, step);
  const auto dir = out_dir(out);
  std::ostringstream csv;
  csv << param << ",lambda_min\n";
  for (const auto& row : r.rows) csv << format_double(row.param) << ',' << format_double(row.lambda_min) << '\n';
  write_text(dir / "sweep.csv", csv.str());
  nlohmann::json doc = report_header("sweep");
  doc["source"] = source_json(src);
  doc["parameter"] = param;
  doc["range"] = {from, to, step};
  if (r.bracket) {
    doc["bracket"] = {r.bracket->first, r.bracket->second};
    doc["root_estimate"] = *r.root;
  } else {
    doc["bracket"] = nullptr;
  }
  write_json(dir / "sweep.json", doc);
  std::cout << csv.str();
  if (r.bracket)
    std::cout << "sign change in [" << format_double(r.bracket->first) << ", " << format_double(r.bracket->second) << "]\n";
  else
    std::cout << "no sign change\n";
  return ok;
}

// ---------------------------------------------------------------------------------------------

inline int run(int argc, const char* const* argv) {
  CLI::App app{"caplab: capillary surface stability lab"};
  app.require_subcommand(1);
  std::string out, name;

  Source gen_src, id_src, st_src, tf_src, sw_src;
  auto* gen = app.add_subcommand("gen", "write a family mesh and its wall set");
  gen_src.add_options(gen);
  gen->add_option("--out", out, "output directory (default $CAPLAB_OUT or .)");
  gen->add_option("--name", name, "file stem (default: the family name)");

  int levels = 3;
  double tol_scale = 1.0;
  auto* ids = app.add_subcommand("identities", "run the identity suite across refinement levels");
  id_src.add_options(ids);
  ids->add_option("--levels", levels, "refinement levels in [1, 6]");
  ids->add_option("--tol-scale", tol_scale, "multiplies every identity tolerance");
  ids->add_option("--out", out, "output directory");

  std::optional<double> st_tol;
  int count = 4;
  auto* st = app.add_subcommand("stability", "smallest volume-constrained eigenvalues and the verdict");
  st_src.add_options(st);
  st->add_option("--tol", st_tol, "stability tolerance (default 0.05 max|sigma|^2)");
  st->add_option("--count", count, "number of eigenpairs (1..10)");
  st->add_option("--out", out, "output directory");

  bool identity_mode = false;
  std::vector<double> a_vec;
  double tf_tol = 0.02;
  auto* tf = app.add_subcommand("testfn", "build the test function and compare both index-form evaluations");
  tf_src.add_options(tf);
  tf->add_flag("--identity-mode", identity_mode, "a = 0 and no common-origin requirement");
  tf->add_option("--a", a_vec, "capillary vector (default: solved from the walls)")->expected(3);
  tf->add_option("--tol", tf_tol, "relative tolerance for the two evaluations");
  tf->add_option("--out", out, "output directory");

  std::string w_walls, w_mesh;
  std::vector<std::vector<double>> w_normals;
  std::vector<double> w_angles;
  auto* wd = app.add_subcommand("wedge", "capillary vector, angle window and optional classification");
  wd->add_option("--walls", w_walls, "wall-set file");
  wd->add_option("--normal", w_normals, "wall normal (repeatable)")->expected(3)->allow_extra_args(false);
  wd->add_option("--angle-deg", w_angles, "contact angle per normal, degrees (repeatable)");
  wd->add_option("--mesh", w_mesh, "classify this mesh against the walls");
  wd->add_option("--out", out, "output directory");

  std::string param = "length";
  double from = 2.0, to = 4.0, step = 0.1;
  auto* sw = app.add_subcommand("sweep", "lambda_min over a parameter grid");
  sw_src.add_options(sw);
  sw->add_option("--param", param, "length, radius, angle-deg or amplitude");
  sw->add_option("--from", from);
  sw->add_option("--to", to);
  sw->add_option("--step", step);
  sw->add_option("--out", out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : input_error;
  }

  try {
    if (*gen) return cmd_gen(gen_src, out, name);
    if (*ids) return cmd_identities(id_src, levels, tol_scale, out);
    if (*st) return cmd_stability(st_src, st_tol, count, out);
    if (*tf) return cmd_testfn(tf_src, identity_mode, a_vec, tf_tol, out);
    if (*wd) return cmd_wedge(w_walls, w_normals, w_angles, w_mesh, out);
    if (*sw) return cmd_sweep(sw_src, param, from, to, step, out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::solver_failure ? solver_failed : input_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return input_error;
  }
  return input_error;
}

}  // namespace caplab::cli
