#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dbf/filters.hpp"
#include "dbf/format.hpp"
#include "dbf/image.hpp"
#include "dbf/metrics.hpp"
#include "dbf/noise.hpp"
#include "dbf/pgm.hpp"
#include "dbf/report.hpp"
#include "dbf/sure.hpp"
#include "dbf/synthetic.hpp"

// Repeated-noise benchmark: for every (sigma, seed, variant) the noisy image
// is denoised at its SURE-optimal grid cell and scored against the clean one.

namespace dbf {

struct ExperimentSpec {
  std::optional<std::filesystem::path> image_path;  // otherwise `synthetic`
  SyntheticImageSpec synthetic;
  std::vector<double> sigmas{10.0, 20.0, 30.0, 40.0, 50.0};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::vector<Variant> variants{Variant::gbf, Variant::adf, Variant::dbf};
  std::optional<SweepGrid> grid;  // default_grid(sigma) per noise level when unset
  TensorScales tensor;
  std::optional<int> window_radius;
  int threads = 1;

  void validate() const {
    if (sigmas.empty()) throw std::invalid_argument("experiment: no noise levels");
    if (seeds.empty()) throw std::invalid_argument("experiment: no seeds");
    if (variants.empty()) throw std::invalid_argument("experiment: no variants");
    for (double s : sigmas) {
      if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("experiment: sigma must be > 0");
    }
    if (grid) grid->validate();
    if (!image_path) synthetic.validate();
  }

  SweepGrid grid_for(double sigma) const { return grid ? *grid : default_grid(sigma); }

  GrayImage load_clean() const {
    return image_path ? load_image(*image_path) : generate(synthetic);
  }
};

struct RunRecord {
  Variant variant = Variant::dbf;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  double input_psnr = 0.0;
  double output_psnr = 0.0;
  double output_mse = 0.0;
  double best_sure = 0.0;
  FilterParams best;
};

struct CellStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single run
  std::size_t runs = 0;
};

inline CellStats summarize(const std::vector<double>& v) {
  CellStats s;
  s.runs = v.size();
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

/// Rows = variants, columns = noise levels.
struct BenchTable {
  std::vector<Variant> variants;
  std::vector<double> sigmas;
  std::vector<CellStats> input;   // per sigma, input PSNR
  std::vector<CellStats> output;  // row-major, variant outer

  const CellStats& at(std::size_t variant, std::size_t sigma) const {
    return output.at(variant * sigmas.size() + sigma);
  }
};

/// Table from run records. Records are grouped by exact (variant, sigma)
/// match and averaged in seed order.
inline BenchTable tabulate(const std::vector<RunRecord>& runs,
                           const std::vector<Variant>& variants,
                           const std::vector<double>& sigmas) {
  BenchTable t{variants, sigmas, {}, {}};
  std::vector<RunRecord> sorted = runs;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const RunRecord& a, const RunRecord& b) { return a.seed < b.seed; });
  for (double s : sigmas) {
    std::map<std::uint64_t, double> by_seed;
    for (const RunRecord& r : sorted) {
      if (r.sigma == s) by_seed.emplace(r.seed, r.input_psnr);
    }
    std::vector<double> v;
    for (const auto& [seed, p] : by_seed) v.push_back(p);
    t.input.push_back(summarize(v));
  }
  for (Variant var : variants) {
    for (double s : sigmas) {
      std::vector<double> v;
      for (const RunRecord& r : sorted) {
        if (r.variant == var && r.sigma == s) v.push_back(r.output_psnr);
      }
      t.output.push_back(summarize(v));
    }
  }
  return t;
}

struct BenchResult {
  std::vector<RunRecord> runs;  // sigma outer, then seed, then variant
  BenchTable table;
};

/// Called after each run; for progress reporting.
using RunObserver = std::function<void(const RunRecord&)>;

inline BenchResult run_bench(const ExperimentSpec& spec, const GrayImage& clean,
                             const RunObserver& observer = {}) {
  spec.validate();
  BenchResult result;
  for (double sigma : spec.sigmas) {
    const SweepGrid grid = spec.grid_for(sigma);
    for (std::uint64_t seed : spec.seeds) {
      // The same seed gives the same standard-normal field at every sigma.
      const GrayImage y = add_awgn(clean, NoiseSpec{sigma, seed});
      const double input_psnr = psnr(y, clean);
      std::optional<OrientationField> field;
      for (Variant v : spec.variants) {
        SweepOptions opt{v, spec.tensor, spec.window_radius, spec.threads};
        const SweepReport report = sweep(y, sigma, grid, opt);
        if (uses_orientation(v) && !field) field = orientation_field(y, spec.tensor);
        const FilterParams best = report.best_params();
        const GrayImage est =
            apply_filter(y, best, uses_orientation(v) ? &*field : nullptr, spec.threads);
        RunRecord r;
        r.variant = v;
        r.sigma = sigma;
        r.seed = seed;
        r.input_psnr = input_psnr;
        r.output_mse = mse(est, clean);
        r.output_psnr = psnr_from_mse(r.output_mse);
        r.best_sure = report.sure_at(report.best.domain_index, report.best.range_index);
        r.best = best;
        result.runs.push_back(r);
        if (observer) observer(r);
      }
    }
  }
  result.table = tabulate(result.runs, spec.variants, spec.sigmas);
  return result;
}

// --- serialization ---

inline Json to_json(const RunRecord& r) {
  Json j;
  j["variant"] = to_string(r.variant);
  j["sigma"] = r.sigma;
  j["seed"] = r.seed;
  j["input_psnr_db"] = json_real(r.input_psnr);
  j["output_psnr_db"] = json_real(r.output_psnr);
  j["output_mse"] = r.output_mse;
  j["best_sure"] = json_real(r.best_sure);
  j["best_params"] = to_json(r.best);
  return j;
}

inline double real_from_json(const Json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    return NAN;
  }
  return j.get<double>();
}

inline RunRecord run_from_json(const Json& j) {
  RunRecord r;
  r.variant = parse_variant(j.at("variant").get<std::string>());
  r.sigma = j.at("sigma").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.input_psnr = real_from_json(j.at("input_psnr_db"));
  r.output_psnr = real_from_json(j.at("output_psnr_db"));
  r.output_mse = j.at("output_mse").get<double>();
  r.best_sure = real_from_json(j.at("best_sure"));
  const Json& p = j.at("best_params");
  r.best.variant = r.variant;
  r.best.domain_scale = p.at("rho_d").get<double>();
  r.best.range_scale = p.contains("rho_r") ? p.at("rho_r").get<double>() : 1.0;
  r.best.window_radius = p.at("window_radius").get<int>();
  return r;
}

/// One JSON object per line.
inline std::string runs_jsonl(const std::vector<RunRecord>& runs) {
  std::string out;
  for (const RunRecord& r : runs) out += to_json(r).dump() + "\n";
  return out;
}

inline std::vector<RunRecord> parse_runs_jsonl(std::istream& in) {
  std::vector<RunRecord> runs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    runs.push_back(run_from_json(Json::parse(line)));
  }
  return runs;
}

/// Long form: variant,sigma,input_psnr_db,mean_psnr_db,std_psnr_db,runs.
inline std::string table_csv(const BenchTable& t) {
  std::ostringstream os;
  os << "variant,sigma,input_psnr_db,mean_psnr_db,std_psnr_db,runs\n";
  for (std::size_t i = 0; i < t.variants.size(); ++i) {
    for (std::size_t k = 0; k < t.sigmas.size(); ++k) {
      const CellStats& c = t.at(i, k);
      os << to_string(t.variants[i]) << ',' << format_real(t.sigmas[k]) << ','
         << format_real(t.input[k].mean) << ',' << format_real(c.mean) << ','
         << format_real(c.stddev) << ',' << c.runs << '\n';
    }
  }
  return os.str();
}

inline std::string table_markdown(const BenchTable& t) {
  std::ostringstream os;
  os << "| Input PSNR (dB) |";
  for (std::size_t k = 0; k < t.sigmas.size(); ++k) {
    os << ' ' << format_fixed(t.input[k].mean, 2) << " (sigma " << format_real(t.sigmas[k])
       << ") |";
  }
  os << "\n|---|";
  for (std::size_t k = 0; k < t.sigmas.size(); ++k) os << "---|";
  os << '\n';
  for (std::size_t i = 0; i < t.variants.size(); ++i) {
    std::string name(to_string(t.variants[i]));
    std::transform(name.begin(), name.end(), name.begin(), ::toupper);
    os << "| " << name << " |";
    for (std::size_t k = 0; k < t.sigmas.size(); ++k) {
      const CellStats& c = t.at(i, k);
      os << ' ' << format_fixed(c.mean, 2) << " ± " << format_fixed(c.stddev, 2) << " |";
    }
    os << '\n';
  }
  return os.str();
}

inline Json to_json(const ExperimentSpec& spec) {
  Json j;
  if (spec.image_path) {
    j["image"] = {{"path", spec.image_path->generic_string()}};
  } else {
    const SyntheticImageSpec& s = spec.synthetic;
    j["image"] = {{"kind", to_string(s.kind)}, {"width", s.width},   {"height", s.height},
                  {"angle_deg", s.angle_deg},  {"period", s.period}, {"amplitude", s.amplitude},
                  {"offset", s.offset},        {"steps", s.steps}};
  }
  j["sigmas"] = spec.sigmas;
  j["seeds"] = spec.seeds;
  Json variants = Json::array();
  for (Variant v : spec.variants) variants.push_back(to_string(v));
  j["variants"] = variants;
  if (spec.grid) {
    j["grid"] = to_json(*spec.grid);
  } else {
    j["grid"] = "default: rho_d 0.5..5 px, rho_r 0.5..5 sigma, 10 x 10 log-spaced";
  }
  j["tensor"] = to_json(spec.tensor);
  j["window_radius"] = spec.window_radius ? Json(*spec.window_radius) : Json("default");
  j["prng"] = kPrngName;
  return j;
}

struct BenchFiles {
  std::filesystem::path table_csv;
  std::filesystem::path table_md;
  std::filesystem::path runs_jsonl;
  std::filesystem::path summary_json;
};

inline BenchFiles bench_files(const std::filesystem::path& dir) {
  return {dir / "table.csv", dir / "table.md", dir / "runs.jsonl", dir / "bench.json"};
}

/// Writes table.csv, table.md, runs.jsonl and bench.json into `dir`.
inline BenchFiles write_bench(const std::filesystem::path& dir, const ExperimentSpec& spec,
                              const BenchResult& result, const ConfigEcho& config = {}) {
  std::filesystem::create_directories(dir);
  const BenchFiles f = bench_files(dir);
  write_text(f.table_csv, table_csv(result.table));
  write_text(f.table_md, table_markdown(result.table));
  write_text(f.runs_jsonl, runs_jsonl(result.runs));
  Json summary;
  summary["experiment"] = to_json(spec);
  summary["config"] = config;
  summary["runs"] = result.runs.size();
  write_json(f.summary_json, summary);
  return f;
}

/// Rebuilds the table from a runs.jsonl log.
inline BenchTable table_from_log(const std::filesystem::path& runs_path,
                                 const std::vector<Variant>& variants,
                                 const std::vector<double>& sigmas) {
  std::ifstream in(runs_path);
  if (!in) throw IoError("cannot open " + runs_path.string());
  return tabulate(parse_runs_jsonl(in), variants, sigmas);
}

}  // namespace dbf
