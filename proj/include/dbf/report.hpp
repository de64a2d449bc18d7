#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "dbf/filters.hpp"
#include "dbf/image.hpp"
#include "dbf/sure.hpp"
#include "dbf/tensor.hpp"

// JSON sidecars for sweeps and denoising runs. Keys are sorted and numbers
// are printed in shortest round-trip form, so equal inputs give equal bytes.

namespace dbf {

using Json = nlohmann::json;

/// Free-form key=value settings echoed into every report.
using ConfigEcho = std::map<std::string, std::string>;

/// key=value lines; '#' starts a comment, blank lines are skipped and
/// whitespace around keys and values is trimmed.
inline ConfigEcho parse_config(std::istream& in, const std::string& origin = "<config>") {
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  ConfigEcho cfg;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string key = eq == std::string::npos ? "" : trim(line.substr(0, eq));
    if (key.empty()) {
      throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": expected key=value");
    }
    cfg[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

inline ConfigEcho load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return parse_config(in, path.string());
}

inline std::string_view to_string(ThetaFormula f) noexcept {
  return f == ThetaFormula::ratio ? "ratio" : "eigen";
}

inline ThetaFormula parse_theta_formula(std::string_view s) {
  if (s == "eigen") return ThetaFormula::eigen;
  if (s == "ratio") return ThetaFormula::ratio;
  throw std::invalid_argument("unknown theta formula '" + std::string(s) +
                              "' (expected eigen or ratio)");
}

/// Non-finite values have no JSON literal; they are written as strings.
inline Json json_real(double v) {
  if (std::isfinite(v)) return v;
  return format_real(v);
}

inline Json to_json(const TensorScales& t) {
  Json j;
  j["sigma_g"] = t.sigma_g;
  j["rho"] = t.rho;
  j["eps_flat"] = t.eps_flat ? Json(*t.eps_flat) : Json("auto");
  j["theta_formula"] = to_string(t.theta_formula);
  return j;
}

inline Json to_json(const FilterParams& p) {
  Json j;
  j["variant"] = to_string(p.variant);
  j["rho_d"] = p.domain_scale;
  if (uses_range_kernel(p.variant)) j["rho_r"] = p.range_scale;
  j["window_radius"] = p.window_radius;
  j["boundary"] = "mirror";
  return j;
}

inline Json to_json(const SweepGrid& g) {
  return Json{{"rho_d", g.domain_scales}, {"rho_r", g.range_scales}};
}

inline Json sigma_json(double sigma, bool estimated) {
  Json j;
  j["value"] = sigma;
  j["source"] = estimated ? "estimated (MAD extension)" : "given";
  return j;
}

/// Sidecar of a SURE sweep: best_params, sigma, variant, tensor scales, seed, PRNG.
inline Json sweep_json(const SweepReport& r, const ConfigEcho& config = {}) {
  Json j;
  j["best_params"] = to_json(r.best_params());
  j["best_sure"] = json_real(r.sure_at(r.best.domain_index, r.best.range_index));
  if (r.mse_surface) {
    const GridCell m = mse_minimum(r);
    j["best_mse"] = json_real(r.mse_at(r.best.domain_index, r.best.range_index));
    j["mse_optimal_params"] = to_json(r.params_at(m.domain_index, m.range_index));
  }
  j["sigma"] = sigma_json(r.sigma, r.sigma_estimated);
  j["variant"] = to_string(r.variant);
  j["tensor"] = to_json(r.tensor);
  j["grid"] = to_json(r.grid);
  j["seed"] = r.seed ? Json(*r.seed) : Json(nullptr);
  j["prng"] = r.prng;
  j["config"] = config;
  return j;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write error on " + path.string());
}

inline void write_json(const std::filesystem::path& path, const Json& j) {
  write_text(path, j.dump(2) + "\n");
}

/// Sidecar path next to an output file: out.pgm -> out.json.
inline std::filesystem::path sidecar_path(const std::filesystem::path& out) {
  std::filesystem::path p = out;
  return p.replace_extension(".json");
}

}  // namespace dbf
