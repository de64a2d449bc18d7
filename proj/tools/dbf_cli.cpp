// dbf: command-line front end for the bilateral filter toolkit.
//
//   dbf gen        synthetic test image
//   dbf add-noise  additive white Gaussian noise
//   dbf denoise    filter at given or SURE-optimal parameters
//   dbf sweep      SURE (and MSE) surface over a parameter grid
//   dbf eval       PSNR / MSE between two images
//   dbf tensor     orientation and coherence maps
//   dbf bench      repeated-noise PSNR table

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dbf/dbf.hpp"

namespace {

struct Options {
  // shared
  std::string in;
  std::string out;
  std::string clean;
  std::string config;
  double sigma = 0.0;
  std::vector<double> sigmas;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> seeds;
  std::string filter = "dbf";
  std::vector<std::string> filters;
  double rho_d = 1.0;
  double rho_r = 20.0;
  int window = -1;
  double sigma_g = 1.0;
  double rho_tensor = 2.0;
  std::optional<double> eps_flat;
  std::string theta_formula = "eigen";
  std::string grid_d;
  std::string grid_r;
  bool autotune = false;
  bool estimate_sigma = false;
  int threads = 1;
  double peak = 255.0;
  // eval
  std::string ref;
  std::string test;
  // tensor
  std::string csv;
  // gen
  std::string kind = "oriented-fringe";
  int width = 256;
  int height = 256;
  double angle = 30.0;
  double period = 32.0;
  double amplitude = 100.0;
  double offset = 128.0;
  int steps = 8;
  bool quiet = false;
};

void add_tensor_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--sigma-g", o.sigma_g, "Gradient (DoG) scale")->capture_default_str();
  cmd->add_option("--rho-tensor", o.rho_tensor, "Structure tensor smoothing scale")
      ->capture_default_str();
  cmd->add_option("--eps-flat", o.eps_flat,
                  "Flat-region threshold on the tensor trace (default: 1e-6 x mean trace)");
  cmd->add_option("--theta-formula", o.theta_formula, "Orientation formula")
      ->check(CLI::IsMember({"eigen", "ratio"}))
      ->capture_default_str();
}

void add_filter_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--filter", o.filter, "Filter variant")
      ->check(CLI::IsMember({"gbf", "adf", "dbf"}))
      ->capture_default_str();
  cmd->add_option("--window", o.window, "Window radius (default: from the domain scale)");
  cmd->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_tensor_flags(cmd, o);
}

void add_grid_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--grid-d", o.grid_d, "Domain scales lo:hi:n (default 0.5:5:10)");
  cmd->add_option("--grid-r", o.grid_r, "Range scales lo:hi:n (default 0.5s:5s:10)");
}

void add_sigma_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--sigma", o.sigma, "Noise standard deviation");
  cmd->add_flag("--estimate-sigma", o.estimate_sigma,
                "Estimate sigma from the image (robust MAD; extension)");
  cmd->add_option("--seed", o.seed, "Seed of the noise realization (recorded in reports)");
}

void add_config_flag(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "key=value file supplying any flag not given")
      ->check(CLI::ExistingFile);
}

struct Commands {
  CLI::App* gen;
  CLI::App* add_noise;
  CLI::App* denoise;
  CLI::App* sweep;
  CLI::App* eval;
  CLI::App* tensor;
  CLI::App* bench;
};

void add_synthetic_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--kind", o.kind, "oriented-fringe | concentric-rings | step-wedge")
      ->capture_default_str();
  cmd->add_option("--width", o.width)->capture_default_str();
  cmd->add_option("--height", o.height)->capture_default_str();
  cmd->add_option("--angle", o.angle, "Direction of intensity variation, degrees")
      ->capture_default_str();
  cmd->add_option("--period", o.period, "Pixels per cycle (per step for the wedge)")
      ->capture_default_str();
  cmd->add_option("--amplitude", o.amplitude)->capture_default_str();
  cmd->add_option("--offset", o.offset)->capture_default_str();
  cmd->add_option("--steps", o.steps, "Wedge levels")->capture_default_str();
}

Commands build(CLI::App& app, Options& o) {
  app.require_subcommand(1);
  Commands c{};

  c.gen = app.add_subcommand("gen", "Write a synthetic test image");
  add_synthetic_flags(c.gen, o);
  c.gen->add_option("--out", o.out, "Output PGM")->required();
  add_config_flag(c.gen, o);

  c.add_noise = app.add_subcommand("add-noise", "Add white Gaussian noise");
  c.add_noise->add_option("--in", o.in, "Input image")->required();
  c.add_noise->add_option("--sigma", o.sigma, "Noise standard deviation")->required();
  c.add_noise->add_option("--seed", o.seed, "PRNG seed")->capture_default_str();
  c.add_noise->add_option("--out", o.out, "Output PGM")->required();
  add_config_flag(c.add_noise, o);

  c.denoise = app.add_subcommand("denoise", "Denoise an image");
  c.denoise->add_option("--in", o.in, "Noisy image")->required();
  c.denoise->add_option("--out", o.out, "Output PGM; a JSON report is written beside it")
      ->required();
  add_sigma_flags(c.denoise, o);
  add_filter_flags(c.denoise, o);
  c.denoise->add_option("--rho-d", o.rho_d, "Domain scale (sigma_d for gbf)")
      ->capture_default_str();
  c.denoise->add_option("--rho-r", o.rho_r, "Range scale (sigma_r for gbf)")
      ->capture_default_str();
  c.denoise->add_flag("--auto", o.autotune, "Choose rho-d, rho-r by minimizing SURE");
  add_grid_flags(c.denoise, o);
  c.denoise->add_option("--clean", o.clean, "Clean reference (adds PSNR/MSE to the report)");
  add_config_flag(c.denoise, o);

  c.sweep = app.add_subcommand("sweep", "SURE surface over a parameter grid");
  c.sweep->add_option("--in", o.in, "Noisy image")->required();
  c.sweep->add_option("--out", o.out, "Output CSV; a JSON sidecar is written beside it")
      ->required();
  add_sigma_flags(c.sweep, o);
  add_filter_flags(c.sweep, o);
  add_grid_flags(c.sweep, o);
  c.sweep->add_option("--clean", o.clean, "Clean reference (adds the MSE surface)");
  add_config_flag(c.sweep, o);

  c.eval = app.add_subcommand("eval", "PSNR and MSE of a test image against a reference");
  c.eval->add_option("--ref", o.ref, "Reference image")->required();
  c.eval->add_option("--test", o.test, "Test image")->required();
  c.eval->add_option("--peak", o.peak, "Peak value for PSNR")->capture_default_str();
  add_config_flag(c.eval, o);

  c.tensor = app.add_subcommand("tensor", "Orientation (theta) and coherence maps");
  c.tensor->add_option("--in", o.in, "Input image")->required();
  c.tensor->add_option("--out", o.out,
                       "Output prefix: <out>_theta.pgm, <out>_coherence.pgm")->required();
  c.tensor->add_option("--csv", o.csv, "Also write the raw tensor field as CSV");
  add_tensor_flags(c.tensor, o);
  add_config_flag(c.tensor, o);

  c.bench = app.add_subcommand("bench", "PSNR table over noise levels and seeds");
  c.bench->add_option("--in", o.in, "Clean image (default: synthetic, see generator flags)");
  add_synthetic_flags(c.bench, o);
  c.bench->add_option("--sigma", o.sigmas, "Noise levels, comma separated")
      ->delimiter(',')
      ->default_str("10,20,30,40,50");
  c.bench->add_option("--seed", o.seeds, "Seeds, comma separated")
      ->delimiter(',')
      ->default_str("1,2,3,4,5");
  c.bench->add_option("--filters", o.filters, "Variants, comma separated")
      ->delimiter(',')
      ->check(CLI::IsMember({"gbf", "adf", "dbf"}))
      ->default_str("gbf,adf,dbf");
  c.bench->add_option("--window", o.window, "Window radius (default: from the domain scale)");
  c.bench->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  add_tensor_flags(c.bench, o);
  add_grid_flags(c.bench, o);
  c.bench->add_option("--out", o.out,
                      "Output directory (table.csv, table.md, runs.jsonl, bench.json)")
      ->required();
  c.bench->add_flag("--quiet", o.quiet, "No progress output");
  add_config_flag(c.bench, o);
  return c;
}

CLI::App* chosen(const CLI::App& app) {
  const auto subs = app.get_subcommands();
  return subs.empty() ? nullptr : subs.front();
}

// Config entries become extra "--key value" arguments for every flag that
// was not given on the command line.
std::vector<std::string> config_arguments(CLI::App* cmd, const dbf::ConfigEcho& cfg) {
  std::vector<std::string> extra;
  for (const auto& [key, value] : cfg) {
    if (key == "config") throw std::invalid_argument("config: nested config is not allowed");
    const CLI::Option* opt = nullptr;
    try {
      opt = cmd->get_option("--" + key);
    } catch (const CLI::OptionNotFound&) {
      throw std::invalid_argument("config: '" + key + "' is not a flag of '" + cmd->get_name() +
                                  "'");
    }
    if (opt->count() > 0) continue;
    if (opt->get_type_size() == 0) {
      if (value == "true" || value == "1" || value == "yes") extra.push_back("--" + key);
      else if (value != "false" && value != "0" && value != "no")
        throw std::invalid_argument("config: '" + key + "' expects true or false");
      continue;
    }
    extra.push_back("--" + key);
    extra.push_back(value);
  }
  return extra;
}

dbf::TensorScales tensor_scales(const Options& o) {
  dbf::TensorScales t;
  t.sigma_g = o.sigma_g;
  t.rho = o.rho_tensor;
  t.eps_flat = o.eps_flat;
  t.theta_formula = dbf::parse_theta_formula(o.theta_formula);
  return t;
}

dbf::SyntheticImageSpec synthetic_spec(const Options& o) {
  dbf::SyntheticImageSpec s;
  s.kind = dbf::parse_synthetic_kind(o.kind);
  s.width = o.width;
  s.height = o.height;
  s.angle_deg = o.angle;
  s.period = o.period;
  s.amplitude = o.amplitude;
  s.offset = o.offset;
  s.steps = o.steps;
  s.validate();
  return s;
}

std::optional<int> window_flag(const Options& o) {
  if (o.window < 0) return std::nullopt;
  return o.window;
}

// Sigma from --sigma, or estimated when --estimate-sigma is given.
std::pair<double, bool> resolve_sigma(const CLI::App* cmd, const Options& o,
                                      const dbf::GrayImage& y) {
  const bool given = cmd->get_option("--sigma")->count() > 0;
  if (given && o.estimate_sigma) {
    throw std::invalid_argument("--sigma and --estimate-sigma are mutually exclusive");
  }
  if (o.estimate_sigma) return {dbf::estimate_noise_sigma(y), true};
  if (!given) throw std::invalid_argument("--sigma is required (or use --estimate-sigma)");
  if (!(o.sigma > 0.0)) throw std::invalid_argument("--sigma must be > 0");
  return {o.sigma, false};
}

dbf::SweepGrid grid_from(const Options& o, double sigma) {
  dbf::SweepGrid g = dbf::default_grid(sigma);
  if (!o.grid_d.empty()) g.domain_scales = dbf::parse_grid_axis(o.grid_d);
  if (!o.grid_r.empty()) g.range_scales = dbf::parse_grid_axis(o.grid_r);
  g.validate();
  return g;
}

std::optional<std::uint64_t> seed_flag(const CLI::App* cmd, const Options& o) {
  if (cmd->get_option("--seed")->count() == 0) return std::nullopt;
  return o.seed;
}

int run_gen(const Options& o) {
  dbf::save_image(dbf::generate(synthetic_spec(o)), o.out);
  return 0;
}

int run_add_noise(const Options& o) {
  const dbf::GrayImage clean = dbf::load_image(o.in);
  dbf::save_image(dbf::add_awgn(clean, {o.sigma, o.seed}), o.out);
  return 0;
}

int run_denoise(const CLI::App* cmd, const Options& o, const dbf::ConfigEcho& cfg) {
  const dbf::GrayImage y = dbf::load_image(o.in);
  std::optional<dbf::GrayImage> clean;
  if (!o.clean.empty()) clean = dbf::load_image(o.clean);
  const dbf::Variant variant = dbf::parse_variant(o.filter);
  const dbf::TensorScales ts = tensor_scales(o);

  dbf::Json report;
  dbf::GrayImage est = y;
  if (o.autotune) {
    const auto [sigma, estimated] = resolve_sigma(cmd, o, y);
    const dbf::SweepOptions opt{variant, ts, window_flag(o), o.threads};
    dbf::AutoDenoiseResult r =
        dbf::denoise_auto(y, sigma, grid_from(o, sigma), opt, clean ? &*clean : nullptr);
    r.report.sigma_estimated = estimated;
    r.report.seed = seed_flag(cmd, o);
    report = dbf::sweep_json(r.report, cfg);
    est = std::move(r.estimate);
  } else {
    dbf::FilterParams p = dbf::FilterParams::with_default_window(variant, o.rho_d, o.rho_r);
    if (o.window >= 0) p.window_radius = o.window;
    std::optional<dbf::OrientationField> field;
    if (dbf::uses_orientation(variant)) field = dbf::orientation_field(y, ts);
    const dbf::FilterResult r =
        dbf::filter_with_sensitivity(y, p, field ? &*field : nullptr, o.threads);
    report["params"] = dbf::to_json(p);
    report["variant"] = dbf::to_string(variant);
    report["tensor"] = dbf::to_json(ts);
    report["divergence"] = dbf::total(r.sensitivity);
    const bool has_sigma = cmd->get_option("--sigma")->count() > 0 || o.estimate_sigma;
    if (has_sigma) {
      const auto [sigma, estimated] = resolve_sigma(cmd, o, y);
      report["sigma"] = dbf::sigma_json(sigma, estimated);
      report["sure"] = dbf::sure(y, r.estimate, dbf::total(r.sensitivity), sigma);
    }
    const auto seed = seed_flag(cmd, o);
    report["seed"] = seed ? dbf::Json(*seed) : dbf::Json(nullptr);
    report["prng"] = dbf::kPrngName;
    report["config"] = cfg;
    est = r.estimate;
  }
  if (clean) {
    const double m = dbf::mse(est, *clean);
    report["output_mse"] = m;
    report["output_psnr_db"] = dbf::json_real(dbf::psnr_from_mse(m));
    report["input_psnr_db"] = dbf::json_real(dbf::psnr(y, *clean));
  }
  dbf::save_image(est, o.out);
  dbf::write_json(dbf::sidecar_path(o.out), report);
  return 0;
}

int run_sweep(const CLI::App* cmd, const Options& o, const dbf::ConfigEcho& cfg) {
  const dbf::GrayImage y = dbf::load_image(o.in);
  std::optional<dbf::GrayImage> clean;
  if (!o.clean.empty()) clean = dbf::load_image(o.clean);
  const auto [sigma, estimated] = resolve_sigma(cmd, o, y);
  const dbf::SweepOptions opt{dbf::parse_variant(o.filter), tensor_scales(o), window_flag(o),
                              o.threads};
  dbf::SweepReport r = dbf::sweep(y, sigma, grid_from(o, sigma), opt, clean ? &*clean : nullptr);
  r.sigma_estimated = estimated;
  r.seed = seed_flag(cmd, o);
  std::ostringstream csv;
  dbf::write_sweep_csv(csv, r);
  dbf::write_text(o.out, csv.str());
  dbf::write_json(dbf::sidecar_path(o.out), dbf::sweep_json(r, cfg));
  return 0;
}

int run_eval(const Options& o) {
  const dbf::GrayImage ref = dbf::load_image(o.ref);
  const dbf::GrayImage test = dbf::load_image(o.test);
  dbf::require_same_shape(ref, test, "eval");
  if (!(o.peak > 0.0)) throw std::invalid_argument("--peak must be > 0");
  const double m = dbf::mse(test, ref);
  std::cout << "psnr_db=" << dbf::format_real(dbf::psnr_from_mse(m, o.peak))
            << " mse=" << dbf::format_real(m) << '\n';
  return 0;
}

int run_tensor(const Options& o) {
  const dbf::GrayImage img = dbf::load_image(o.in);
  const dbf::TensorScales ts = tensor_scales(o);
  const dbf::TensorField t =
      dbf::structure_tensor(dbf::gradient_dog(img, ts.sigma_g), ts.rho);
  const dbf::OrientationField f = dbf::orientation_from_tensor(t, ts.eps_flat, ts.theta_formula);
  dbf::save_image(dbf::theta_map(f), o.out + "_theta.pgm");
  dbf::save_image(dbf::coherence_map(f), o.out + "_coherence.pgm");
  if (!o.csv.empty()) {
    std::ostringstream os;
    dbf::write_tensor_csv(os, t);
    dbf::write_text(o.csv, os.str());
  }
  return 0;
}

int run_bench(const Options& o, const dbf::ConfigEcho& cfg) {
  dbf::ExperimentSpec spec;
  if (!o.in.empty()) {
    spec.image_path = o.in;
  } else {
    spec.synthetic = synthetic_spec(o);
  }
  if (!o.sigmas.empty()) spec.sigmas = o.sigmas;
  if (!o.seeds.empty()) spec.seeds = o.seeds;
  if (!o.filters.empty()) {
    spec.variants.clear();
    for (const std::string& f : o.filters) spec.variants.push_back(dbf::parse_variant(f));
  }
  if (!o.grid_d.empty() || !o.grid_r.empty()) {
    if (o.grid_d.empty() || o.grid_r.empty()) {
      throw std::invalid_argument("bench: give both --grid-d and --grid-r, or neither");
    }
    spec.grid = dbf::SweepGrid{dbf::parse_grid_axis(o.grid_d), dbf::parse_grid_axis(o.grid_r)};
  }
  spec.tensor = tensor_scales(o);
  spec.window_radius = window_flag(o);
  spec.threads = o.threads;
  const dbf::GrayImage clean = spec.load_clean();
  const auto progress = [&](const dbf::RunRecord& r) {
    if (o.quiet) return;
    std::cerr << "sigma " << dbf::format_real(r.sigma) << " seed " << r.seed << ' '
              << dbf::to_string(r.variant) << ": " << dbf::format_fixed(r.output_psnr, 2)
              << " dB\n";
  };
  const dbf::BenchResult result = dbf::run_bench(spec, clean, progress);
  dbf::write_bench(o.out, spec, result, cfg);
  std::cout << dbf::table_markdown(result.table);
  return 0;
}

int dispatch(const CLI::App& app, const Commands& c, const Options& o,
             const dbf::ConfigEcho& cfg) {
  const CLI::App* cmd = chosen(app);
  if (cmd == c.gen) return run_gen(o);
  if (cmd == c.add_noise) return run_add_noise(o);
  if (cmd == c.denoise) return run_denoise(cmd, o, cfg);
  if (cmd == c.sweep) return run_sweep(cmd, o, cfg);
  if (cmd == c.eval) return run_eval(o);
  if (cmd == c.tensor) return run_tensor(o);
  if (cmd == c.bench) return run_bench(o, cfg);
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  Options o;
  CLI::App app{"Directional bilateral filter toolkit"};
  Commands c = build(app, o);
  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    dbf::ConfigEcho cfg;
    if (!o.config.empty()) {
      cfg = dbf::load_config(o.config);
      const auto extra = config_arguments(chosen(app), cfg);
      if (!extra.empty()) {
        std::vector<std::string> all = args;
        all.insert(all.end(), extra.begin(), extra.end());
        Options merged;
        CLI::App again{"Directional bilateral filter toolkit"};
        const Commands c2 = build(again, merged);
        again.parse(std::vector<std::string>(all.rbegin(), all.rend()));
        return dispatch(again, c2, merged, cfg);
      }
    }
    return dispatch(app, c, o, cfg);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: config: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
