#pragma once

// Plain key = value run configuration. All physical inputs are the
// dimensionless products quoted with the reference results (g*tau couplings,
// ratios to the detuning, kappa/r); time is measured in units of 1/r with
// r1 = r2 = 1. Exactly one of {alpha, omega_tau2} is given, the other is
// derived through alpha^2 = (Omega tau2)(Delta tau2) / (ga' tau2)(gb' tau2).

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace catbeam {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class L2Variant { Bare, HPrime, HAux };
enum class ScheduleMode { Poisson, Uniform };
enum class TauKind { Delta, Flat, Gaussian };

std::string to_string(L2Variant v);
std::string to_string(ScheduleMode m);
std::string to_string(TauKind k);

struct RunConfig {
  // resolved physics
  double alpha = 0.0;       // target-cat amplitude
  double omega_tau2 = 0.0;  // drive * tau2
  double ga_tau2 = 0.0;     // derived: ga_over_gb * gb_tau2
  double delta_tau2 = 0.0;  // derived: gb_tau2 / gb_over_delta
  double gamma1 = 0.0;      // units of r
  double gamma2 = 0.0;
  double horizon = 0.0;     // units of 1/r
  bool alpha_given = false;

  // raw keys
  int cutoff_a = 16;
  int cutoff_b = 16;
  L2Variant scheme_variant = L2Variant::HPrime;
  double g_a_tau1 = 0.0;
  double g_b_tau1 = 0.0;
  double gb_tau2 = 0.0;
  double gb_over_delta = 0.0;
  double ga_over_gb = 0.0;
  double phi = 0.7853981633974483;  // pi/4
  double kappa_over_r = 0.0;
  ScheduleMode schedule_mode = ScheduleMode::Poisson;
  TauKind tau_distribution = TauKind::Delta;
  double delta_tau = 0.0;  // relative spread dtau/tau2
  double sample_interval = 1.0;
  std::uint64_t seed = 0;
  double n_events = 0.0;  // 0 unless horizon was derived from it
  // compensation-scheme couplings; negative means "matched default"
  double ga2_over_gb = -1.0;
  double deltap_over_delta = -1.0;
  double g_aux_over_gb = -1.0;
  double delta_aux_over_delta = -1.0;

  std::vector<std::string> warnings;  // non-fatal validity notes
};

// Parses and validates; throws ParseError (naming the offending or missing
// keys) or ValidationError (naming the violated inequality).
RunConfig parse_config(std::string_view text);

// Same, with key overrides applied before validation (used by sweeps).
RunConfig parse_config(std::string_view text,
                       const std::vector<std::pair<std::string, std::string>>& overrides);

RunConfig load_config_file(const std::string& path);

// Canonical "key = value" lines of the fully resolved configuration,
// including derived quantities; stable ordering and 12-digit formatting.
std::string echo_config(const RunConfig& cfg);

}  // namespace catbeam
