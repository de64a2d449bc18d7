// Acceptance run: one PASS/FAIL line per criterion.
//
//   dbf_acceptance            all criteria
//   dbf_acceptance 1 3 6      a subset
//
// Exit status is 0 only if every selected criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dbf/dbf.hpp"
#include "oracles.hpp"

namespace {

namespace fs = std::filesystem;
using dbf::FilterParams;
using dbf::Variant;

constexpr Variant kAll[] = {Variant::gbf, Variant::adf, Variant::dbf};

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

dbf::GrayImage fringe(int size) {
  dbf::SyntheticImageSpec s;
  s.width = s.height = size;
  return dbf::generate(s);
}

oracle::Field oracle_field(const dbf::OrientationField& f) {
  oracle::Field o;
  o.theta.assign(f.theta.pixels().begin(), f.theta.pixels().end());
  o.gamma1.assign(f.gamma1.pixels().begin(), f.gamma1.pixels().end());
  o.gamma2.assign(f.gamma2.pixels().begin(), f.gamma2.pixels().end());
  return o;
}

oracle::Kind kind_of(Variant v) {
  return v == Variant::gbf ? oracle::Kind::gbf
                           : v == Variant::adf ? oracle::Kind::adf : oracle::Kind::dbf;
}

double max_abs_diff(const dbf::Plane& a, const dbf::Plane& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d = std::max(d, std::abs(a.pixels()[i] - b.pixels()[i]));
  }
  return d;
}

Verdict oracle_equivalence() {
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const dbf::GrayImage y(oracle::random_plane(8, 8, 100 + k));
    const auto field = dbf::orientation_field(y);
    const auto of = oracle_field(field);
    for (Variant v : kAll) {
      for (int r : {1, 2}) {
        const double rho_d = 0.8 + 0.1 * double(k % 7);
        const double rho_r = 15.0 + 5.0 * double(k % 5);
        const auto fast = dbf::apply_filter(y, {v, rho_d, rho_r, r}, &field);
        worst = std::max(worst, max_abs_diff(fast.plane(),
                                             oracle::filter(y.plane(), kind_of(v), rho_d, rho_r, r, of)));
      }
    }
  }
  return {worst <= 1e-12, fmt("max |fast - brute force| = %.2e over 20 images x 3 variants x r=1,2", worst)};
}

Verdict divergence_correctness() {
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 10; ++k) {
    const dbf::GrayImage y(oracle::random_plane(8, 8, 200 + k));
    const auto field = dbf::orientation_field(y);
    for (Variant v : kAll) {
      const FilterParams p{v, 1.2 + 0.1 * double(k), 30.0, 3};
      const double analytic = dbf::filter_with_divergence(y, p, &field).divergence;
      const double numeric = oracle::fd_divergence(y.plane(), [&](const dbf::Plane& in) {
        return dbf::apply_filter(dbf::GrayImage(in), p, &field).plane();
      });
      worst = std::max(worst, std::abs(analytic - numeric) / std::abs(numeric));
    }
  }
  return {worst < 1e-5, fmt("max relative error vs central differences = %.2e (10 images x 3 variants)", worst)};
}

struct BiasStats {
  double mean, sem;
};

BiasStats sure_bias(const dbf::GrayImage& clean, const FilterParams& p, double sigma, bool clean_field) {
  std::vector<double> gap;
  const auto fixed_field = dbf::orientation_field(clean);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto y = dbf::add_awgn(clean, {sigma, seed});
    const auto field = clean_field ? fixed_field : dbf::orientation_field(y);
    const auto r = dbf::filter_with_divergence(y, p, &field);
    gap.push_back(dbf::sure(y, r.estimate, r.divergence, sigma) - dbf::mse(r.estimate, clean));
  }
  const auto s = dbf::summarize(gap);
  return {s.mean, s.stddev / std::sqrt(double(gap.size()))};
}

Verdict sure_unbiasedness() {
  const double sigma = 20.0;
  const auto clean = fringe(128);
  const auto y = dbf::add_awgn(clean, {sigma, 1});
  const auto field = dbf::orientation_field(y);
  bool identity_exact = true;
  for (Variant v : kAll) {
    const auto r = dbf::filter_with_divergence(y, {v, 1.0, sigma, 0}, &field);
    identity_exact = identity_exact && dbf::sure(y, r.estimate, r.divergence, sigma) == sigma * sigma;
  }
  const FilterParams p = FilterParams::with_default_window(Variant::dbf, 1.5, 2.0 * sigma);
  const BiasStats b = sure_bias(clean, p, sigma, false);
  const BiasStats control = sure_bias(clean, p, sigma, true);
  const bool unbiased = std::abs(b.mean) <= 3.0 * b.sem;
  return {identity_exact && unbiased,
          fmt("identity SURE == sigma^2: %s; DBF rho_d=1.5 rho_r=40 sigma=20, 20 seeds: "
              "mean(SURE-MSE) = %.3f, SEM %.3f (%.1f SEM); field from clean image: %.3f, SEM %.3f",
              identity_exact ? "yes" : "no", b.mean, b.sem, b.mean / b.sem, control.mean,
              control.sem)};
}

Verdict sure_tracks_mse() {
  const double sigma = 20.0;
  const auto clean = fringe(128);
  std::string detail;
  bool pass = true;
  for (Variant v : {Variant::dbf, Variant::gbf}) {
    int good = 0;
    std::string cells;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto y = dbf::add_awgn(clean, {sigma, seed});
      const auto r = dbf::sweep(y, sigma, dbf::default_grid(sigma), {v, {}, std::nullopt, 1}, &clean);
      const auto m = dbf::mse_minimum(r);
      const long di = long(r.best.domain_index) - long(m.domain_index);
      const long ri = long(r.best.range_index) - long(m.range_index);
      const long cheb = std::max(std::labs(di), std::labs(ri));
      const double loss = dbf::psnr_from_mse(r.mse_at(m.domain_index, m.range_index)) -
                          dbf::psnr_from_mse(r.mse_at(r.best.domain_index, r.best.range_index));
      if (cheb <= 1 && loss <= 0.2) ++good;
      cells += fmt(" %ld/%.2f", cheb, loss);
    }
    pass = pass && good >= 4;
    detail += fmt("%s %d/5 seeds ok (cells/dB:%s); ", std::string(dbf::to_string(v)).c_str(), good,
                  cells.c_str());
  }
  return {pass, detail};
}

Verdict psnr_trend() {
  dbf::ExperimentSpec spec;
  const auto clean = spec.load_clean();
  const auto result = dbf::run_bench(spec, clean);
  const auto& t = result.table;
  bool pass = true;
  std::string detail = "input";
  for (std::size_t k = 0; k < t.sigmas.size(); ++k) detail += fmt(" %.2f", t.input[k].mean);
  detail += " dB;";
  for (std::size_t k = 0; k < t.sigmas.size(); ++k) {
    const double g = t.at(0, k).mean, a = t.at(1, k).mean, d = t.at(2, k).mean;
    const double need = k < 2 ? 0.1 : 0.0;
    pass = pass && d - g >= need && std::abs(a - g) <= 1.5;
    detail += fmt(" s%g D-G %+.2f A-G %+.2f;", t.sigmas[k], d - g, a - g);
  }
  return {pass, detail};
}

Verdict invariants() {
  std::vector<std::string> failed;
  auto check = [&](bool ok, const char* name) {
    if (!ok) failed.push_back(name);
  };
  const dbf::GrayImage y(oracle::random_plane(24, 20, 300));
  const auto field = dbf::orientation_field(y);

  bool fixed = true;
  const dbf::GrayImage flat(24, 20, 141.7);
  const auto flat_field = dbf::orientation_field(flat);
  for (Variant v : kAll) fixed = fixed && dbf::apply_filter(flat, {v, 2.0, 10.0, 5}, &flat_field) == flat;
  check(fixed, "constant fixed point");

  bool bounded = true;
  for (Variant v : kAll) {
    const int r = 3;
    const auto out = dbf::apply_filter(y, {v, 1.5, 30.0, r}, &field);
    for (int m = 0; m < y.height(); ++m) {
      for (int n = 0; n < y.width(); ++n) {
        double lo = INFINITY, hi = -INFINITY;
        for (int a = -r; a <= r; ++a) {
          for (int b = -r; b <= r; ++b) {
            const double q = y(oracle::mirror(m + a, y.height()), oracle::mirror(n + b, y.width()));
            lo = std::min(lo, q);
            hi = std::max(hi, q);
          }
        }
        bounded = bounded && out(m, n) >= lo && out(m, n) <= hi;
      }
    }
  }
  check(bounded, "convex bounds");

  bool fields = true;
  for (std::size_t i = 0; i < field.theta.size(); ++i) {
    const double c = field.coherence.pixels()[i];
    fields = fields && c >= 0.0 && c <= 1.0 &&
             std::abs(field.gamma1.pixels()[i] * field.gamma2.pixels()[i] - 1.0) <= 1e-15;
  }
  check(fields, "gamma1 gamma2 = 1, C in [0,1]");

  auto g = dbf::gradient_dog(y, 1.0);
  const auto t = dbf::structure_tensor(g, 2.0);
  for (double& v : g.gx.pixels()) v = -v;
  for (double& v : g.gy.pixels()) v = -v;
  const auto tn = dbf::structure_tensor(g, 2.0);
  check(t.j11 == tn.j11 && t.j12 == tn.j12 && t.j22 == tn.j22, "sign-flip tensor invariance");

  auto unit = dbf::isotropic_field(y.width(), y.height());
  unit.theta = field.theta;
  check(dbf::apply_filter(y, {Variant::dbf, 1.7, 25.0, 5}, &unit) ==
            dbf::apply_filter(y, {Variant::gbf, 1.7, 25.0, 5}),
        "DBF -> GBF with unit scalings");

  const double limit = max_abs_diff(dbf::apply_filter(y, {Variant::dbf, 1.5, 1e9, 4}, &field).plane(),
                                    dbf::apply_filter(y, {Variant::adf, 1.5, 1.0, 4}, &field).plane());
  check(limit < 1e-6, "rho_r -> inf ADF limit");

  dbf::GrayImage shifted = y;
  for (double& v : shifted.pixels()) v += 63.0;
  double shift = 0.0;
  for (Variant v : kAll) {
    const auto a = dbf::apply_filter(y, {v, 1.5, 30.0, 4}, &field);
    const auto b = dbf::apply_filter(shifted, {v, 1.5, 30.0, 4}, &field);
    for (std::size_t i = 0; i < a.size(); ++i) {
      shift = std::max(shift, std::abs(b.pixels()[i] - a.pixels()[i] - 63.0));
    }
  }
  check(shift < 1e-9, "shift equivariance");

  std::string detail = failed.empty() ? "7 invariants hold" : "failed:";
  for (const auto& f : failed) detail += " " + f + ";";
  detail += fmt(" (ADF limit %.1e, shift %.1e)", limit, shift);
  return {failed.empty(), detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / "dbf_acceptance_bench";
  fs::remove_all(root);
  const std::string args = " bench --width 48 --height 48 --sigma 10,30 --seed 1,2 "
                           "--grid-d 0.5:3:4 --grid-r 5:60:4 --quiet --out ";
  for (const char* run : {"a", "b"}) {
    const std::string cmd = std::string(DBF_CLI_PATH) + args + (root / run).string() + " > " +
                            (root / (std::string(run) + ".stdout")).string();
    fs::create_directories(root);
    if (std::system(cmd.c_str()) != 0) return {false, "bench exited with an error"};
  }
  bool same = slurp(root / "a.stdout") == slurp(root / "b.stdout");
  std::size_t bytes = 0;
  for (const char* f : {"table.csv", "table.md", "runs.jsonl", "bench.json"}) {
    const std::string a = slurp(root / "a" / f);
    same = same && !a.empty() && a == slurp(root / "b" / f);
    bytes += a.size();
  }
  fs::remove_all(root);
  return {same, fmt("two bench runs: table.csv, table.md, runs.jsonl, bench.json and stdout identical "
                    "(%zu bytes compared)", bytes)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "oracle equivalence", 1.0, oracle_equivalence},
      {2, "divergence correctness", 10.0, divergence_correctness},
      {3, "SURE unbiasedness", 120.0, sure_unbiasedness},
      {4, "SURE argmin tracks MSE argmin", 300.0, sure_tracks_mse},
      {5, "PSNR trend over noise levels", 1200.0, psnr_trend},
      {6, "invariant suite", 60.0, invariants},
      {7, "bench determinism", INFINITY, determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  bool all_pass = true;
  for (const Criterion& c : all) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = v.pass && in_time;
    all_pass = all_pass && pass;
    std::string budget = std::isinf(c.budget_s) ? "no limit" : fmt("limit %.0f s", c.budget_s);
    if (!in_time) budget += ", OVER TIME";
    std::printf("AC%d %s  %s: %s [%.2f s, %s]\n", c.id, pass ? "PASS" : "FAIL", c.name,
                v.detail.c_str(), secs, budget.c_str());
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}
