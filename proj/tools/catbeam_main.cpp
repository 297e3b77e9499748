// Command-line driver: run the atom-beam protocol, integrate the engineered
// Lindbladian directly, execute the invariant checks, or sweep one config key.

#include "CLI11.hpp"

#include "catbeam/csv.hpp"
#include "catbeam/fock.hpp"
#include "catbeam/oracle.hpp"
#include "catbeam/protocol.hpp"
#include "catbeam/version.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace catbeam;

namespace {

constexpr double kPi = 3.141592653589793238462643;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::pair<std::string, std::string>> seed_override(const std::string& seed) {
  if (seed.empty()) return {};
  return {{"seed", seed}};
}

void print_run_summary(const RunConfig& cfg, const TrajectoryRecord& rec) {
  const ObservableSample* peak = rec.peak_fidelity_sample();
  std::printf("alpha = %g, gamma1 = %g, gamma2 = %g, kappa/r = %g\n", cfg.alpha, cfg.gamma1,
              cfg.gamma2, cfg.kappa_over_r);
  std::printf("events = %ld, samples = %zu, peak F = %.6f at t = %g, final F = %.6f\n",
              rec.events_applied, rec.samples.size(), peak ? peak->fidelity : 0.0,
              peak ? peak->time : 0.0, rec.final_fidelity());
  for (const auto& w : rec.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
}

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 const std::string& seed) {
  RunConfig cfg = parse_config(read_file(config_path), seed_override(seed));
  for (const auto& w : cfg.warnings) std::fprintf(stderr, "config warning: %s\n", w.c_str());
  TrajectoryRecord rec = run_protocol(cfg);
  write_file_atomic(out_path, format_trajectory_csv(cfg, rec));
  print_run_summary(cfg, rec);
  return 0;
}

int cmd_ideal(const std::string& config_path, const std::string& out_path,
              const std::string& seed) {
  RunConfig cfg = parse_config(read_file(config_path), seed_override(seed));
  HilbertSpec field = HilbertSpec::field(cfg.cutoff_a, cfg.cutoff_b);
  TrajectoryRecord rec =
      ideal_evolution(cfg.alpha, cfg.gamma1, cfg.gamma2, cfg.kappa_over_r,
                      DensityMatrix::pure(vacuum_state(field)), cfg.horizon,
                      cfg.sample_interval);
  write_file_atomic(out_path, format_trajectory_csv(cfg, rec));
  print_run_summary(cfg, rec);
  return 0;
}

// ---------------------------------------------------------------------------
// check: invariant suite

struct CheckRunner {
  int failures = 0;
  void item(const std::string& name, bool ok, const std::string& detail) {
    std::printf("%s  %s (%s)\n", ok ? "ok  " : "FAIL", name.c_str(), detail.c_str());
    if (!ok) ++failures;
  }
};

int cmd_check(const std::string& config_path) {
  double alpha = 1.0;
  int cutoff_a = 16, cutoff_b = 16;
  SchemeL2Params l2;
  l2.gb_tau2 = 100.0;
  l2.gb_over_delta = 1e-3;
  l2.ga_over_gb = 1.0;
  l2.omega_tau2 = 0.1;
  l2.variant = L2Variant::HPrime;
  SchemeL1Params l1;
  l1.g_a_tau1 = l1.g_b_tau1 = 0.1;
  if (!config_path.empty()) {
    RunConfig cfg = parse_config(read_file(config_path));
    alpha = cfg.alpha;
    cutoff_a = cfg.cutoff_a;
    cutoff_b = cfg.cutoff_b;
    l2 = SchemeL2Params::from_config(cfg);
    l1 = SchemeL1Params::from_config(cfg);
  }

  CheckRunner run;
  HilbertSpec field = HilbertSpec::field(cutoff_a, cutoff_b);
  char buf[256];

  DarkSubspaceReport dark = dark_subspace_check(alpha, field);
  std::snprintf(buf, sizeof buf, "max ||C_j phi|| = %.3g", dark.max_residual);
  run.item("dark-subspace residuals < 1e-6", dark.max_residual < 1e-6, buf);
  std::snprintf(buf, sizeof buf, "<Pi+> = %.9f / %.9f", dark.even_parity, dark.odd_parity);
  run.item("cat parity eigenvalues +1/-1",
           std::abs(dark.even_parity - 1.0) < 1e-6 &&
               (dark.odd_degenerate || std::abs(dark.odd_parity + 1.0) < 1e-6),
           buf);

  double pdev = 0.0;
  Operator parity = parity_plus(field, &pdev);
  double unit_err = (parity.matrix * parity.matrix - CMatrix::Identity(field.dim(), field.dim()))
                        .cwiseAbs()
                        .maxCoeff();
  std::snprintf(buf, sizeof buf, "||Pi^2 - I|| = %.3g, edge deviation %.3g", unit_err, pdev);
  run.item("parity squares to identity", unit_err < 1e-8, buf);

  Generator gen = ideal_generator(alpha, 1.0, 1.0, 0.0, field);
  double resid = steady_state_residual(gen, DensityMatrix::pure(cat_state(alpha, field)));
  std::snprintf(buf, sizeof buf, "||L rho_cat|| = %.3g", resid);
  run.item("cat state is a fixed point (residual < 1e-5)", resid < 1e-5, buf);

  if (l2.variant != L2Variant::Bare) {
    CancellationReport canc = cancellation_check(l2);
    std::snprintf(buf, sizeof buf, "relative residual %.3g", canc.relative_residual);
    run.item("Stark-cancellation condition", canc.pass, buf);
  }

  // transit-time limit cases at a resonant phase Delta*tau2 = 2 n pi
  double n = std::max(1.0, std::round(l2.delta_tau2() / (2.0 * kPi)));
  double resonant = 2.0 * kPi * n;
  SchemeL2Params l2r = l2;
  l2r.gb_over_delta = l2r.gb_tau2 / resonant;
  EffectiveRates delta_rates = effective_rates(l1, l2r, {TauKind::Delta, 0.0, resonant});
  std::snprintf(buf, sizeof buf, "f1 = %.3g, f2 = %.3g", delta_rates.f1, delta_rates.f2);
  run.item("delta transit time at 2n pi: f1 = f2 = 0",
           std::abs(delta_rates.f1) < 1e-12 && std::abs(delta_rates.f2) < 1e-12, buf);

  EffectiveRates flat_rates = effective_rates(l1, l2r, {TauKind::Flat, 0.0, resonant});
  std::snprintf(buf, sizeof buf, "f1 factor = %.3g, f2 factor = %.9f", flat_rates.f1_factor,
                flat_rates.f2_factor);
  run.item("flat transit times: f1 = 0, f2 factor = 1/2",
           std::abs(flat_rates.f1_factor) < 1e-10 &&
               std::abs(flat_rates.f2_factor - 0.5) < 1e-6,
           buf);

  double eps = 0.1;
  EffectiveRates gauss_rates =
      effective_rates(l1, l2r, {TauKind::Gaussian, eps / resonant, resonant});
  std::snprintf(buf, sizeof buf, "f2 factor = %.6g vs eps^2/4 = %.6g", gauss_rates.f2_factor,
                eps * eps / 4.0);
  run.item("narrow gaussian: f2 factor = eps^2/4",
           std::abs(gauss_rates.f2_factor - eps * eps / 4.0) < 1e-4, buf);

  std::printf("%s\n", run.failures == 0 ? "all checks passed" : "CHECK FAILURES");
  return run.failures == 0 ? 0 : 2;
}

// ---------------------------------------------------------------------------
// sweep

std::string sanitize_token(const std::string& token) {
  std::string out;
  for (char c : token)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '+' || c == '-')
               ? c
               : '_';
  return out;
}

int cmd_sweep(const std::vector<std::string>& spec_tokens, const std::string& config_path,
              const std::string& out_dir, const std::string& seed, int workers) {
  std::string spec;
  for (const auto& t : spec_tokens) spec += t;
  auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 >= spec.size())
    throw std::invalid_argument("sweep expects KEY=V1,V2,...");
  const std::string key = spec.substr(0, eq);
  std::vector<std::string> tokens;
  for (std::size_t pos = eq + 1; pos <= spec.size();) {
    std::size_t comma = spec.find(',', pos);
    if (comma == std::string::npos) comma = spec.size();
    if (comma > pos) tokens.push_back(spec.substr(pos, comma - pos));
    pos = comma + 1;
  }
  if (tokens.empty()) throw std::invalid_argument("sweep: empty value list");

  const std::string text = read_file(config_path);
  fs::create_directories(out_dir);

  // parse every point up front so bad values fail before any work starts
  std::vector<RunConfig> cfgs;
  for (const auto& tok : tokens) {
    auto overrides = seed_override(seed);
    overrides.emplace_back(key, tok);
    cfgs.push_back(parse_config(text, overrides));
  }

  std::vector<SweepRow> rows(tokens.size());
  std::vector<std::string> errors(tokens.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= tokens.size()) return;
      try {
        TrajectoryRecord rec = run_protocol(cfgs[i]);
        const ObservableSample* peak = rec.peak_fidelity_sample();
        rows[i] = {tokens[i], std::stod(tokens[i]), peak ? peak->fidelity : 0.0,
                   peak ? peak->time : 0.0, rec.final_fidelity()};
        fs::path point = fs::path(out_dir) / (key + "_" + sanitize_token(tokens[i]) + ".csv");
        write_file_atomic(point.string(), format_trajectory_csv(cfgs[i], rec));
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const int n_workers = std::max(1, workers);
  std::vector<std::thread> pool;
  for (int w = 0; w < n_workers - 1; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int status = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (!errors[i].empty()) {
      std::fprintf(stderr, "sweep point %s = %s failed: %s\n", key.c_str(), tokens[i].c_str(),
                   errors[i].c_str());
      status = 1;
    }
  if (status == 0) {
    fs::path summary = fs::path(out_dir) / "summary.csv";
    write_file_atomic(summary.string(), format_sweep_summary(cfgs.front(), key, rows));
    for (const auto& r : rows)
      std::printf("%s = %s: peak F = %.6f at t = %g, final F = %.6f\n", key.c_str(),
                  r.value_token.c_str(), r.peak_fidelity, r.peak_time, r.final_fidelity);
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-mode cat-state generation in an atom-pumped cavity"};
  app.set_version_flag("--version", std::string("catbeam ") + kVersion);
  app.require_subcommand(1);

  std::string config_path, out_path, seed;
  int workers = 1;
  std::vector<std::string> sweep_spec;

  CLI::App* simulate = app.add_subcommand("simulate", "run the atom-beam protocol");
  simulate->add_option("--config", config_path, "config file")->required();
  simulate->add_option("--out", out_path, "output CSV path")->required();
  simulate->add_option("--seed", seed, "override the config seed");

  CLI::App* ideal = app.add_subcommand("ideal", "integrate the engineered Lindbladian");
  ideal->add_option("--config", config_path, "config file")->required();
  ideal->add_option("--out", out_path, "output CSV path")->required();
  ideal->add_option("--seed", seed, "override the config seed");

  CLI::App* check = app.add_subcommand("check", "run the invariant checks");
  check->add_option("--config", config_path, "config file (defaults used when omitted)");

  CLI::App* sweep = app.add_subcommand("sweep", "vary one config key over a list");
  sweep->add_option("spec", sweep_spec, "KEY=V1,V2,...")->required()->expected(-1);
  sweep->add_option("--config", config_path, "config file")->required();
  sweep->add_option("--out", out_path, "output directory")->required();
  sweep->add_option("--seed", seed, "override the config seed");
  sweep->add_option("--workers", workers, "concurrent sweep points")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(config_path, out_path, seed);
    if (ideal->parsed()) return cmd_ideal(config_path, out_path, seed);
    if (check->parsed()) return cmd_check(config_path);
    if (sweep->parsed()) return cmd_sweep(sweep_spec, config_path, out_path, seed, workers);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
