#include "catbeam/config.hpp"

#include "catbeam/protocol.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace catbeam {

std::string to_string(L2Variant v) {
  switch (v) {
    case L2Variant::Bare: return "bare";
    case L2Variant::HPrime: return "h_prime";
    case L2Variant::HAux: return "h_aux";
  }
  return "?";
}

std::string to_string(ScheduleMode m) {
  return m == ScheduleMode::Poisson ? "poisson" : "uniform";
}

std::string to_string(TauKind k) {
  switch (k) {
    case TauKind::Delta: return "delta";
    case TauKind::Flat: return "flat";
    case TauKind::Gaussian: return "gaussian";
  }
  return "?";
}

namespace {

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "alpha",        "omega_tau2",     "cutoff_a",      "cutoff_b",
      "scheme_variant", "g_a_tau1",     "g_b_tau1",      "gb_tau2",
      "gb_over_delta", "ga_over_gb",    "phi",           "kappa_over_r",
      "schedule_mode", "tau_distribution", "delta_tau",  "n_events",
      "horizon",      "sample_interval", "seed",         "ga2_over_gb",
      "deltap_over_delta", "g_aux_over_gb", "delta_aux_over_delta"};
  return keys;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_double(const std::string& key, std::string_view value) {
  double out = 0.0;
  const char* begin = value.data();
  const char* end = begin + value.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc{} || ptr != end)
    throw ParseError("key '" + key + "': cannot parse number from '" + std::string(value) + "'");
  if (!std::isfinite(out)) throw ParseError("key '" + key + "': value must be finite");
  return out;
}

std::uint64_t parse_u64(const std::string& key, std::string_view value) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw ParseError("key '" + key + "': cannot parse integer from '" + std::string(value) + "'");
  return out;
}

int parse_int(const std::string& key, std::string_view value) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw ParseError("key '" + key + "': cannot parse integer from '" + std::string(value) + "'");
  return out;
}

void validate(bool ok, const std::string& inequality) {
  if (!ok) throw ValidationError("violated: " + inequality);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

RunConfig parse_config(std::string_view text) { return parse_config(text, {}); }

RunConfig parse_config(std::string_view text,
                       const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::map<std::string, std::string> kv;
  std::size_t pos = 0;
  int lineno = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? eol : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++lineno;
    if (std::size_t hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ParseError("line " + std::to_string(lineno) + ": expected 'key = value'");
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty() || value.empty())
      throw ParseError("line " + std::to_string(lineno) + ": expected 'key = value'");
    if (std::find(known_keys().begin(), known_keys().end(), key) == known_keys().end())
      throw ParseError("unknown key '" + key + "'");
    if (kv.count(key)) throw ParseError("duplicate key '" + key + "'");
    kv.emplace(std::move(key), std::move(value));
  }
  for (const auto& [key, value] : overrides) {
    if (std::find(known_keys().begin(), known_keys().end(), key) == known_keys().end())
      throw ParseError("unknown key '" + key + "'");
    kv[key] = value;
  }

  // required keys first, reported together
  std::vector<std::string> missing;
  for (const char* req : {"scheme_variant", "g_a_tau1", "g_b_tau1", "gb_tau2", "gb_over_delta",
                          "ga_over_gb", "kappa_over_r"})
    if (!kv.count(req)) missing.push_back(req);
  if (!kv.count("alpha") && !kv.count("omega_tau2")) missing.push_back("alpha (or omega_tau2)");
  if (!kv.count("n_events") && !kv.count("horizon")) missing.push_back("n_events (or horizon)");
  if (!missing.empty()) {
    std::string msg = "missing required keys:";
    for (const auto& k : missing) msg += " " + k + ",";
    msg.pop_back();
    throw ParseError(msg);
  }
  if (kv.count("alpha") && kv.count("omega_tau2"))
    throw ParseError("keys 'alpha' and 'omega_tau2' are mutually exclusive");
  if (kv.count("n_events") && kv.count("horizon"))
    throw ParseError("keys 'n_events' and 'horizon' are mutually exclusive");

  RunConfig cfg;
  auto take = [&](const char* key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };

  if (auto v = take("cutoff_a")) cfg.cutoff_a = parse_int("cutoff_a", *v);
  if (auto v = take("cutoff_b")) cfg.cutoff_b = parse_int("cutoff_b", *v);
  if (auto v = take("scheme_variant")) {
    if (*v == "bare") cfg.scheme_variant = L2Variant::Bare;
    else if (*v == "h_prime") cfg.scheme_variant = L2Variant::HPrime;
    else if (*v == "h_aux") cfg.scheme_variant = L2Variant::HAux;
    else throw ParseError("scheme_variant must be one of bare, h_prime, h_aux");
  }
  if (auto v = take("schedule_mode")) {
    if (*v == "poisson") cfg.schedule_mode = ScheduleMode::Poisson;
    else if (*v == "uniform") cfg.schedule_mode = ScheduleMode::Uniform;
    else throw ParseError("schedule_mode must be poisson or uniform");
  }
  if (auto v = take("tau_distribution")) {
    if (*v == "delta") cfg.tau_distribution = TauKind::Delta;
    else if (*v == "flat") cfg.tau_distribution = TauKind::Flat;
    else if (*v == "gaussian") cfg.tau_distribution = TauKind::Gaussian;
    else throw ParseError("tau_distribution must be delta, flat, or gaussian");
  }
  cfg.g_a_tau1 = parse_double("g_a_tau1", *take("g_a_tau1"));
  cfg.g_b_tau1 = parse_double("g_b_tau1", *take("g_b_tau1"));
  cfg.gb_tau2 = parse_double("gb_tau2", *take("gb_tau2"));
  cfg.gb_over_delta = parse_double("gb_over_delta", *take("gb_over_delta"));
  cfg.ga_over_gb = parse_double("ga_over_gb", *take("ga_over_gb"));
  cfg.kappa_over_r = parse_double("kappa_over_r", *take("kappa_over_r"));
  if (auto v = take("phi")) cfg.phi = parse_double("phi", *v);
  if (auto v = take("delta_tau")) cfg.delta_tau = parse_double("delta_tau", *v);
  if (auto v = take("sample_interval")) cfg.sample_interval = parse_double("sample_interval", *v);
  if (auto v = take("seed")) cfg.seed = parse_u64("seed", *v);
  if (auto v = take("ga2_over_gb")) cfg.ga2_over_gb = parse_double("ga2_over_gb", *v);
  if (auto v = take("deltap_over_delta"))
    cfg.deltap_over_delta = parse_double("deltap_over_delta", *v);
  if (auto v = take("g_aux_over_gb")) cfg.g_aux_over_gb = parse_double("g_aux_over_gb", *v);
  if (auto v = take("delta_aux_over_delta"))
    cfg.delta_aux_over_delta = parse_double("delta_aux_over_delta", *v);

  // --- derived quantities ---
  validate(cfg.cutoff_a >= 1 && cfg.cutoff_b >= 1, "cutoff_a, cutoff_b >= 1");
  validate(cfg.g_a_tau1 > 0.0 && cfg.g_b_tau1 > 0.0, "g_a_tau1, g_b_tau1 > 0");
  validate(cfg.gb_tau2 > 0.0, "gb_tau2 > 0");
  validate(cfg.gb_over_delta > 0.0, "gb_over_delta > 0");
  validate(cfg.ga_over_gb > 0.0, "ga_over_gb > 0");
  validate(cfg.kappa_over_r >= 0.0, "kappa_over_r >= 0");
  validate(cfg.sample_interval > 0.0, "sample_interval > 0");
  validate(cfg.delta_tau >= 0.0, "delta_tau >= 0");

  cfg.ga_tau2 = cfg.ga_over_gb * cfg.gb_tau2;
  cfg.delta_tau2 = cfg.gb_tau2 / cfg.gb_over_delta;

  if (auto v = take("alpha")) {
    cfg.alpha = parse_double("alpha", *v);
    cfg.alpha_given = true;
    validate(cfg.alpha > 0.0, "alpha > 0");
    cfg.omega_tau2 = cfg.alpha * cfg.alpha * cfg.ga_tau2 * cfg.gb_tau2 / cfg.delta_tau2;
  } else {
    cfg.omega_tau2 = parse_double("omega_tau2", *take("omega_tau2"));
    validate(cfg.omega_tau2 > 0.0, "omega_tau2 > 0");
    cfg.alpha = std::sqrt(cfg.omega_tau2 * cfg.delta_tau2 / (cfg.ga_tau2 * cfg.gb_tau2));
  }

  if (auto v = take("horizon")) {
    cfg.horizon = parse_double("horizon", *v);
    validate(cfg.horizon > 0.0, "horizon > 0");
  } else {
    cfg.n_events = parse_double("n_events", *take("n_events"));
    validate(cfg.n_events > 0.0, "n_events > 0");
    cfg.horizon = cfg.n_events / 2.0;  // expected count at total rate r1 + r2 = 2
  }

  if (cfg.scheme_variant != L2Variant::HPrime &&
      (kv.count("ga2_over_gb") || kv.count("deltap_over_delta")))
    throw ValidationError("ga2_over_gb/deltap_over_delta apply only to scheme_variant = h_prime");
  if (cfg.scheme_variant != L2Variant::HAux &&
      (kv.count("g_aux_over_gb") || kv.count("delta_aux_over_delta")))
    throw ValidationError(
        "g_aux_over_gb/delta_aux_over_delta apply only to scheme_variant = h_aux");

  // --- scheme validity inequalities ---
  validate(cfg.delta_tau2 >= 10.0, "|Delta| tau2 >> 1 (require gb_tau2/gb_over_delta >= 10)");
  validate(cfg.omega_tau2 <= 0.5, "Omega tau2 << 1 (require <= 0.5)");
  validate(cfg.delta_tau2 * cfg.omega_tau2 >= 10.0,
           "(|Delta| tau2)(Omega tau2) >> 1 (require >= 10)");
  const double n_scale = std::sqrt(cfg.alpha * cfg.alpha + 1.0);
  validate(std::max(cfg.ga_tau2, cfg.gb_tau2) / cfg.delta_tau2 * n_scale <= 0.2,
           "g' sqrt(<n>+1) << |Delta| (require ratio <= 0.2)");
  const double g_tau1 = std::hypot(cfg.g_a_tau1, cfg.g_b_tau1);
  validate(g_tau1 * std::sqrt(cfg.alpha * cfg.alpha + 0.5) <= 0.5,
           "g tau1 sqrt(N- + 1/2) << 1 (require <= 0.5)");
  validate(cfg.alpha * cfg.alpha <= std::min(cfg.cutoff_a, cfg.cutoff_b) / 4.0,
           "alpha^2 <= cutoff/4 (coherent-state truncation)");

  if (cfg.scheme_variant == L2Variant::Bare) {
    double stark_phase = cfg.ga_tau2 * cfg.ga_tau2 / cfg.delta_tau2;
    if (stark_phase > 1e-3)
      cfg.warnings.push_back("bare variant: uncompensated Stark phase " + fmt(stark_phase) +
                             " rad per transit");
  }

  EffectiveRates rates = effective_rates(SchemeL1Params::from_config(cfg),
                                         SchemeL2Params::from_config(cfg),
                                         TauDistribution::from_config(cfg));
  cfg.gamma1 = rates.gamma1;
  cfg.gamma2 = rates.gamma2;

  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string echo_config(const RunConfig& cfg) {
  std::ostringstream out;
  auto line = [&](const char* key, const std::string& value) {
    out << key << " = " << value << "\n";
  };
  line("alpha", fmt(cfg.alpha));
  line("omega_tau2", fmt(cfg.omega_tau2));
  line("cutoff_a", std::to_string(cfg.cutoff_a));
  line("cutoff_b", std::to_string(cfg.cutoff_b));
  line("scheme_variant", to_string(cfg.scheme_variant));
  line("g_a_tau1", fmt(cfg.g_a_tau1));
  line("g_b_tau1", fmt(cfg.g_b_tau1));
  line("gb_tau2", fmt(cfg.gb_tau2));
  line("gb_over_delta", fmt(cfg.gb_over_delta));
  line("ga_over_gb", fmt(cfg.ga_over_gb));
  if (cfg.scheme_variant == L2Variant::HPrime) {
    SchemeL2Params p = SchemeL2Params::from_config(cfg);
    line("ga2_over_gb", fmt(p.ga2_tau2() / p.gb_tau2));
    line("deltap_over_delta", fmt(p.deltap_over_delta));
  }
  if (cfg.scheme_variant == L2Variant::HAux) {
    SchemeL2Params p = SchemeL2Params::from_config(cfg);
    line("g_aux_over_gb", fmt(p.g_aux_tau2() / p.gb_tau2));
    line("delta_aux_over_delta", fmt(p.delta_aux_over_delta));
    line("phi", fmt(cfg.phi));
  }
  line("kappa_over_r", fmt(cfg.kappa_over_r));
  line("schedule_mode", to_string(cfg.schedule_mode));
  line("tau_distribution", to_string(cfg.tau_distribution));
  line("delta_tau", fmt(cfg.delta_tau));
  line("horizon", fmt(cfg.horizon));
  line("sample_interval", fmt(cfg.sample_interval));
  line("seed", std::to_string(cfg.seed));
  line("delta_tau2", fmt(cfg.delta_tau2));
  line("ga_tau2", fmt(cfg.ga_tau2));
  line("gamma1", fmt(cfg.gamma1));
  line("gamma2", fmt(cfg.gamma2));
  return out.str();
}

}  // namespace catbeam
