#pragma once

#include "caplab/capmesh_io.hpp"
#include "caplab/classify.hpp"
#include "caplab/families.hpp"
#include "caplab/identities.hpp"
#include "caplab/stability.hpp"
#include "caplab/wedge.hpp"

#include <nlohmann/json.hpp>

#include <ostream>
#include <string>
#include <vector>

namespace caplab {

inline constexpr int report_version = 1;

namespace detail {

inline nlohmann::json vec_json(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

inline nlohmann::json vec_json(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace detail

/// Every report document starts from this header.
inline nlohmann::json report_header(const std::string& kind) {
  nlohmann::json j;
  j["version"] = report_version;
  j["kind"] = kind;
  return j;
}

inline nlohmann::json to_json(const FamilySpec& spec) {
  nlohmann::json j;
  j["family"] = family_name(spec);
  j["resolution"] = spec.resolution;
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Cap>) {
          j["R"] = f.R;
          j["theta"] = f.theta;
        } else if constexpr (std::is_same_v<T, Cylinder>) {
          j["r"] = f.r;
          j["L"] = f.L;
        } else if constexpr (std::is_same_v<T, FlatDisk> || std::is_same_v<T, ClosedSphere>) {
          j["R"] = f.R;
        } else {
          j["amplitude"] = f.amplitude;
          j["R"] = f.R;
        }
      },
      spec.variant);
  return j;
}

inline nlohmann::json to_json(const IdentityReport& r) {
  nlohmann::json j;
  j["name"] = r.name;
  j["lhs"] = r.lhs;
  j["rhs"] = r.rhs;
  j["abs_residual"] = r.abs_residual;
  j["rel_residual"] = r.rel_residual;
  j["scale"] = r.scale;
  j["tolerance"] = r.tolerance;
  j["resolution"] = r.resolution;
  j["status"] = r.skipped ? "skipped" : (r.passed() ? "ok" : "fail");
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline nlohmann::json to_json(const StabilityVerdict& v, bool with_eigenfunction = false) {
  nlohmann::json j;
  j["lambda_min"] = v.lambda_min;
  j["stable"] = v.stable;
  j["tol_used"] = v.tol_used;
  j["eigenvalues"] = v.eigenvalues;
  j["residuals"] = v.residuals;
  j["shift"] = v.shift;
  if (with_eigenfunction) j["eigenfunction"] = detail::vec_json(v.eigenfunction);
  return j;
}

inline nlohmann::json to_json(const TestFunctionReport& r) {
  nlohmann::json j;
  j["mode"] = r.identity_mode ? "identity" : "wedge";
  j["a"] = detail::vec_json(r.a);
  j["origin"] = detail::vec_json(r.origin);
  j["mean_H"] = r.mean_H;
  j["mean_residual"] = r.mean_residual;
  j["robin_max"] = r.robin_max;
  j["index_quadratic"] = r.index_quadratic;
  j["index_closed"] = r.index_closed;
  j["match_residual"] = r.match_residual;
  j["max_abs_phi"] = r.max_abs_phi;
  j["area"] = r.area;
  j["max_sigma_sq"] = r.max_sigma_sq;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline nlohmann::json to_json(const WedgeSolution& s) {
  nlohmann::json j;
  j["c"] = detail::vec_json(s.c);
  j["a"] = detail::vec_json(s.a);
  j["norm_a"] = s.norm_a;
  j["umbilical_conclusion"] = s.umbilical_conclusion;
  nlohmann::json g = nlohmann::json::array();
  for (Eigen::Index i = 0; i < s.gram.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(s.gram.cols()));
    for (Eigen::Index k = 0; k < s.gram.cols(); ++k) row[static_cast<std::size_t>(k)] = s.gram(i, k);
    g.push_back(row);
  }
  j["gram"] = g;
  return j;
}

inline nlohmann::json to_json(const ClassifyReport& r) {
  nlohmann::json j;
  j["hypotheses_met"] = r.hypotheses_met;
  j["unmet"] = r.unmet;
  j["delta_max"] = r.delta_max;
  j["angle_offsets"] = r.angle_offsets;
  if (r.norm_a) j["norm_a"] = *r.norm_a;
  j["stable"] = r.stable;
  j["lambda_min"] = r.lambda_min;
  j["tol_used"] = r.tol_used;
  if (r.sphere) {
    nlohmann::json s;
    s["center"] = detail::vec_json(r.sphere->center);
    s["radius"] = r.sphere->radius;
    s["rms"] = r.sphere->rms;
    s["plane_rms"] = r.sphere->plane_rms;
    s["bounding_radius"] = r.sphere->bounding_radius;
    s["residual"] = r.sphere->residual;
    s["planar"] = r.sphere->planar;
    j["sphere"] = s;
  }
  if (r.certificate.size() > 0) j["certificate_size"] = r.certificate.size();
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline void write_identity_csv_header(std::ostream& os) { os << "identity,lhs,rhs,abs,rel,resolution,status\n"; }

inline void write_identity_csv_row(std::ostream& os, const IdentityReport& r) {
  auto join = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + format_double(v[i]);
    return s;
  };
  os << r.name << ',' << join(r.lhs) << ',' << join(r.rhs) << ',' << format_double(r.abs_residual) << ','
     << format_double(r.rel_residual) << ',' << r.resolution << ',' << (r.skipped ? "skipped" : (r.passed() ? "ok" : "fail"))
     << '\n';
}

/// One row per vertex: index, value.
inline void write_vertex_function_csv(std::ostream& os, const VectorXd& f, const std::string& column = "value") {
  os << "vertex," << column << '\n';
  for (Eigen::Index i = 0; i < f.size(); ++i) os << i << ',' << format_double(f[i]) << '\n';
}

}  // namespace caplab
