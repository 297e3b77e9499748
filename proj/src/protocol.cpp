#include "catbeam/protocol.hpp"

#include "catbeam/fock.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace catbeam {

using detail::require;

namespace {

constexpr double kPi = 3.141592653589793238462643;

CMatrix lift_field(const CMatrix& m, int dim_atom) {
  return Eigen::kroneckerProduct(m, CMatrix::Identity(dim_atom, dim_atom)).eval();
}

CMatrix lift_atom(const CMatrix& m, int dim_field) {
  return Eigen::kroneckerProduct(CMatrix::Identity(dim_field, dim_field), m).eval();
}

// |j><k| on the composite space
CMatrix sigma_jk(const HilbertSpec& spec, const char* j, const char* k) {
  const int nat = spec.dim_atom();
  CMatrix s = CMatrix::Zero(nat, nat);
  s(spec.level_index(j), spec.level_index(k)) = 1.0;
  return lift_atom(s, spec.dim_a() * spec.dim_b());
}

HilbertSpec field_part(const HilbertSpec& spec) {
  return HilbertSpec{spec.cutoff_a, spec.cutoff_b, {}};
}

}  // namespace

// ---------------------------------------------------------------------------
// Scheme parameters

double SchemeL1Params::g_tau1() const { return std::hypot(g_a_tau1, g_b_tau1); }

SchemeL1Params SchemeL1Params::from_config(const RunConfig& cfg) {
  SchemeL1Params p;
  p.g_a_tau1 = cfg.g_a_tau1;
  p.g_b_tau1 = cfg.g_b_tau1;
  p.r1 = 1.0;
  return p;
}

double SchemeL2Params::ga2_tau2() const {
  return (ga2_over_gb < 0.0 ? ga_over_gb : ga2_over_gb) * gb_tau2;
}
double SchemeL2Params::deltap_tau2() const { return deltap_over_delta * delta_tau2(); }
double SchemeL2Params::g_aux_tau2() const {
  return (g_aux_over_gb < 0.0 ? ga_over_gb : g_aux_over_gb) * gb_tau2;
}
double SchemeL2Params::delta_aux_tau2() const { return delta_aux_over_delta * delta_tau2(); }

SchemeL2Params SchemeL2Params::from_config(const RunConfig& cfg) {
  SchemeL2Params p;
  p.gb_tau2 = cfg.gb_tau2;
  p.gb_over_delta = cfg.gb_over_delta;
  p.ga_over_gb = cfg.ga_over_gb;
  p.omega_tau2 = cfg.omega_tau2;
  p.r2 = 1.0;
  p.variant = cfg.scheme_variant;
  p.ga2_over_gb = cfg.ga2_over_gb;
  p.deltap_over_delta = cfg.deltap_over_delta;
  p.g_aux_over_gb = cfg.g_aux_over_gb;
  p.delta_aux_over_delta = cfg.delta_aux_over_delta;
  p.phi = cfg.phi;
  return p;
}

TauDistribution TauDistribution::from_config(const RunConfig& cfg) {
  return {cfg.tau_distribution, cfg.delta_tau, cfg.delta_tau2};
}

// ---------------------------------------------------------------------------
// Hamiltonians

std::vector<std::string> l1_atom_levels() { return {"1", "2", "3"}; }

std::vector<std::string> l2_atom_levels(L2Variant v) {
  std::vector<std::string> levels = {"1'", "2'", "3'"};
  if (v == L2Variant::HPrime) levels.push_back("e");
  if (v == L2Variant::HAux) {
    levels.push_back("1aux");
    levels.push_back("2aux");
  }
  return levels;
}

Operator build_hamiltonian_L1(const SchemeL1Params& p, const HilbertSpec& spec) {
  if (spec.atom_levels != l1_atom_levels())
    throw std::invalid_argument("build_hamiltonian_L1: spec atom levels must be {1,2,3}");
  Operator a = embed(annihilation_op(spec.cutoff_a), Slot::ModeA, spec);
  Operator b = embed(annihilation_op(spec.cutoff_b), Slot::ModeB, spec);
  CMatrix m = p.g_a_tau1 * (a.matrix.adjoint() * sigma_jk(spec, "1", "3")) +
              p.g_b_tau1 * (b.matrix.adjoint() * sigma_jk(spec, "2", "3"));
  CMatrix h = m + m.adjoint();
  return {spec, std::move(h), true};
}

Operator build_hamiltonian_L2(const SchemeL2Params& p, const HilbertSpec& spec) {
  if (spec.atom_levels != l2_atom_levels(p.variant))
    throw std::invalid_argument("build_hamiltonian_L2: spec atom levels do not match variant");
  Operator a = embed(annihilation_op(spec.cutoff_a), Slot::ModeA, spec);
  Operator b = embed(annihilation_op(spec.cutoff_b), Slot::ModeB, spec);
  CMatrix m = p.ga_tau2() * (a.matrix.adjoint() * sigma_jk(spec, "1'", "2'")) +
              p.gb_tau2 * (b.matrix.adjoint() * sigma_jk(spec, "2'", "3'")) +
              p.omega_tau2 * sigma_jk(spec, "1'", "3'");
  CMatrix h = p.delta_tau2() * sigma_jk(spec, "2'", "2'");
  if (p.variant == L2Variant::HPrime) {
    m += p.ga2_tau2() * (a.matrix.adjoint() * sigma_jk(spec, "1'", "e"));
    h += p.deltap_tau2() * sigma_jk(spec, "e", "e");
  } else if (p.variant == L2Variant::HAux) {
    m += p.g_aux_tau2() * (a.matrix.adjoint() * sigma_jk(spec, "1aux", "2aux"));
    h += p.delta_aux_tau2() * sigma_jk(spec, "2aux", "2aux");
  }
  h += m + m.adjoint();
  return {spec, std::move(h), true};
}

CVector initial_atom_state_l1(const SchemeL1Params& p) {
  CVector v = CVector::Zero(3);
  if (p.initial_atom_state == SchemeL1Params::Init::One) {
    v(0) = 1.0;
  } else {
    double g = p.g_tau1();
    require(g > 0.0, "initial_atom_state_l1: couplings must not both vanish");
    v(0) = p.g_b_tau1 / g;
    v(1) = -p.g_a_tau1 / g;
  }
  return v;
}

CVector initial_atom_state_l2(const SchemeL2Params& p) {
  const int nat = static_cast<int>(l2_atom_levels(p.variant).size());
  CVector v = CVector::Zero(nat);
  if (p.variant == L2Variant::HAux) {
    v(0) = std::cos(p.phi);
    v(3) = std::sin(p.phi);  // |1aux>
  } else {
    v(0) = 1.0;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Derived scheme quantities

CancellationReport cancellation_check(const SchemeL2Params& p) {
  double t1 = 0.0, t2 = 0.0;
  if (p.variant == L2Variant::HPrime) {
    t1 = p.ga_tau2() * p.ga_tau2() / p.delta_tau2();
    t2 = p.ga2_tau2() * p.ga2_tau2() / p.deltap_tau2();
  } else if (p.variant == L2Variant::HAux) {
    double c = std::cos(p.phi), s = std::sin(p.phi);
    t1 = c * c * p.ga_tau2() * p.ga_tau2() / p.delta_tau2();
    t2 = s * s * p.g_aux_tau2() * p.g_aux_tau2() / p.delta_aux_tau2();
  } else {
    throw std::invalid_argument("cancellation_check: not applicable to the bare variant");
  }
  CancellationReport rep;
  rep.residual = t1 + t2;
  double scale = std::abs(t1) + std::abs(t2);
  rep.relative_residual = scale > 0.0 ? std::abs(rep.residual) / scale : 0.0;
  rep.pass = rep.relative_residual <= 1e-12;
  return rep;
}

Complex alpha_from_drive(const SchemeL2Params& p) {
  require(p.ga_tau2() > 0.0 && p.gb_tau2 > 0.0, "alpha_from_drive: couplings must be > 0");
  // alpha^2 = Omega*Delta/(ga' gb'); principal square root, alpha >= 0 for
  // positive products, +i sqrt(|.|) otherwise
  Complex alpha2 = p.omega_tau2 * p.delta_tau2() / (p.ga_tau2() * p.gb_tau2);
  return std::sqrt(alpha2);
}

// ---------------------------------------------------------------------------
// Coarse-grained rates and the transit-time integrals

namespace {

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
}

// Weighted mean of g over [lo,hi] with weight function wf, composite
// Gauss-Legendre with `panels` panels of 16 nodes; normalized by the weight
// integral so the weight need not be exactly unit-mass on [lo,hi].
template <class F, class W>
double weighted_mean(F g, W wf, double lo, double hi, int panels) {
  static std::vector<double> xs, ws;
  if (xs.empty()) gauss_legendre(16, xs, ws);
  double num = 0.0, den = 0.0;
  double h = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    double a = lo + p * h;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double t = a + 0.5 * h * (xs[i] + 1.0);
      double wt = 0.5 * h * ws[i] * wf(t);
      num += wt * g(t);
      den += wt;
    }
  }
  return num / den;
}

// Converged weighted mean; doubles the panel count until stable.
template <class F, class W>
double converged_mean(F g, W wf, double lo, double hi, int panels0, const char* what) {
  double prev = weighted_mean(g, wf, lo, hi, panels0);
  for (int panels = 2 * panels0; panels <= 64 * panels0; panels *= 2) {
    double cur = weighted_mean(g, wf, lo, hi, panels);
    if (std::abs(cur - prev) <= 1e-9 * (1.0 + std::abs(cur))) return cur;
    prev = cur;
  }
  throw NumericError(std::string(what) + ": quadrature did not converge");
}

}  // namespace

EffectiveRates effective_rates(const SchemeL1Params& l1, const SchemeL2Params& l2,
                               const TauDistribution& dist) {
  EffectiveRates out;
  const double ga1 = l1.g_a_tau1, gb1 = l1.g_b_tau1;
  require(ga1 > 0.0 || gb1 > 0.0, "effective_rates: L1 couplings must not both vanish");
  out.gamma1 = l1.r1 * (ga1 * ga1 * gb1 * gb1) / (ga1 * ga1 + gb1 * gb1);

  const double dphase = dist.delta_tau2 != 0.0 ? dist.delta_tau2 : l2.delta_tau2();
  const double s = dist.relative_spread;
  require(s >= 0.0, "effective_rates: spread must be >= 0");

  // relative second moment E[(tau/tau2)^2] and the two phase integrals
  double second_moment = 1.0;
  switch (dist.kind) {
    case TauKind::Delta: {
      out.f1_factor = std::sin(dphase);
      out.f2_factor = std::pow(std::sin(0.5 * dphase), 2);
      second_moment = 1.0;
      break;
    }
    case TauKind::Gaussian: {
      // tau/tau2 = 1 + s z with standard normal z; integrand phase spans
      // ~20*eps over z in [-10,10], panel count follows eps = Delta*dtau
      double eps = std::abs(dphase) * s;
      if (eps > 300.0) throw NumericError("effective_rates: gaussian spread too oscillatory");
      int panels = std::max(8, int(std::ceil(4.0 * eps)));
      auto wf = [](double z) { return std::exp(-0.5 * z * z); };
      out.f1_factor = converged_mean([&](double z) { return std::sin(dphase * (1.0 + s * z)); },
                                     wf, -10.0, 10.0, panels, "f1");
      out.f2_factor = converged_mean(
          [&](double z) { return std::pow(std::sin(0.5 * dphase * (1.0 + s * z)), 2); }, wf,
          -10.0, 10.0, panels, "f2");
      second_moment = 1.0 + s * s;
      break;
    }
    case TauKind::Flat: {
      // flat over tau in [0, 2pi/Delta]
      require(dphase > 0.0, "effective_rates: flat distribution requires Delta*tau2 > 0");
      double span = 2.0 * kPi / dphase;  // in units of tau2
      auto wf = [](double) { return 1.0; };
      out.f1_factor = converged_mean([&](double u) { return std::sin(dphase * u); }, wf, 0.0,
                                     span, 8, "f1");
      out.f2_factor = converged_mean(
          [&](double u) { return std::pow(std::sin(0.5 * dphase * u), 2); }, wf, 0.0, span, 8,
          "f2");
      second_moment = span * span / 3.0;
      break;
    }
  }

  const double pair_rate = l2.ga_tau2() * l2.gb_tau2 / l2.delta_tau2();
  out.gamma2 = (l2.r2 / 8.0) * pair_rate * pair_rate * second_moment;
  const double one_photon = std::pow(l2.ga_tau2() / l2.delta_tau2(), 2);
  out.f1 = l2.r2 * one_photon * out.f1_factor;
  out.f2 = l2.r2 * one_photon * out.f2_factor;
  return out;
}

// ---------------------------------------------------------------------------
// Beam schedule

namespace {

// Explicit draws so schedules are reproducible independent of the standard
// library's distribution implementations.
class BeamRng {
 public:
  explicit BeamRng(std::uint64_t seed) : eng_(seed) {}
  double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }
  double normal() {
    double u1 = std::max(uniform(), 0x1.0p-53);
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

 private:
  std::mt19937_64 eng_;
};

double draw_transit_factor(const TauDistribution& dist, BeamRng& rng) {
  switch (dist.kind) {
    case TauKind::Delta: return 1.0;
    case TauKind::Gaussian: return std::max(0.0, 1.0 + dist.relative_spread * rng.normal());
    case TauKind::Flat: {
      require(dist.delta_tau2 > 0.0, "make_schedule: flat distribution requires delta_tau2 > 0");
      return rng.uniform() * 2.0 * kPi / dist.delta_tau2;
    }
  }
  return 1.0;
}

}  // namespace

BeamSchedule make_schedule(double r1, double r2, double horizon, ScheduleMode mode,
                           std::uint64_t seed, const TauDistribution& dist, double r_tau2) {
  require(r1 >= 0.0 && r2 >= 0.0, "make_schedule: rates must be >= 0");
  require(horizon > 0.0, "make_schedule: horizon must be > 0");
  require(r_tau2 >= 0.0, "make_schedule: r_tau2 must be >= 0");

  BeamSchedule sched;
  sched.horizon = horizon;
  sched.mode = mode;
  sched.seed = seed;
  BeamRng rng(seed);
  double busy_until = 0.0;

  auto push = [&](double t, AtomType type) {
    if (r_tau2 > 0.0 && t < busy_until) {
      ++sched.dropped_overlaps;
      return;
    }
    double factor = type == AtomType::L2 ? draw_transit_factor(dist, rng) : 1.0;
    sched.events.push_back({t, type, factor});
    busy_until = t + r_tau2 * factor;
  };

  if (mode == ScheduleMode::Poisson) {
    const double inf = std::numeric_limits<double>::infinity();
    double next1 = r1 > 0.0 ? rng.exponential(r1) : inf;
    double next2 = r2 > 0.0 ? rng.exponential(r2) : inf;
    while (std::min(next1, next2) <= horizon) {
      if (next1 <= next2) {
        push(next1, AtomType::L1);
        next1 += rng.exponential(r1);
      } else {
        push(next2, AtomType::L2);
        next2 += rng.exponential(r2);
      }
    }
  } else {
    const double total = r1 + r2;
    require(total > 0.0, "make_schedule: uniform mode needs a positive total rate");
    const double spacing = 1.0 / total;
    long emitted1 = 0, emitted2 = 0;
    for (long k = 1;; ++k) {
      double t = k * spacing;
      if (t > horizon) break;
      // deficit interleaving keeps each type at its nominal rate
      double d1 = r1 * t - double(emitted1);
      double d2 = r2 * t - double(emitted2);
      if (r1 > 0.0 && (r2 == 0.0 || d1 >= d2)) {
        push(t, AtomType::L1);
        ++emitted1;
      } else {
        push(t, AtomType::L2);
        ++emitted2;
      }
    }
  }
  return sched;
}

// ---------------------------------------------------------------------------
// Transit maps

DensityMatrix atom_event(const DensityMatrix& rho_field, const TransitScheme& scheme,
                         const Propagator& propagator) {
  const HilbertSpec& comp = scheme.composite;
  require(comp.has_atom(), "atom_event: composite space must carry an atom slot");
  require(propagator.unitary.space == comp, "atom_event: propagator space mismatch");
  require(rho_field.space == field_part(comp), "atom_event: field space mismatch");
  const int nat = comp.dim_atom();
  require(scheme.initial_atom.size() == nat, "atom_event: initial atom dimension mismatch");

  const int df = rho_field.space.dim();
  const int d = comp.dim();
  const CMatrix& u = propagator.unitary.matrix;
  using StridedMap =
      Eigen::Map<const CMatrix, 0, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>>;

  CMatrix out = CMatrix::Zero(df, df);
  CMatrix k_m(df, df), x(df, df);
  for (int m = 0; m < nat; ++m) {
    k_m.setZero();
    for (int s = 0; s < nat; ++s) {
      Complex amp = scheme.initial_atom(s);
      if (std::abs(amp) < 1e-300) continue;
      StridedMap slice(u.data() + m + std::ptrdiff_t(s) * d, df, df,
                       Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(std::ptrdiff_t(nat) * d,
                                                                     nat));
      k_m += amp * slice;
    }
    x.noalias() = k_m * rho_field.matrix;
    out.noalias() += x * k_m.adjoint();
  }
  out = 0.5 * (out + out.adjoint()).eval();
  return {rho_field.space, std::move(out)};
}

TransitEngine::TransitEngine(Operator hamiltonian_dimensionless, CVector initial_atom)
    : hamiltonian_(std::move(hamiltonian_dimensionless)),
      field_(field_part(hamiltonian_.space)), initial_atom_(std::move(initial_atom)) {
  const HilbertSpec& comp = hamiltonian_.space;
  require(comp.has_atom(), "TransitEngine: composite space must carry an atom slot");
  const int nat = comp.dim_atom();
  require(initial_atom_.size() == nat, "TransitEngine: initial atom dimension mismatch");
  if (std::abs(initial_atom_.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("TransitEngine: initial atom state must be normalized");

  Eigen::SelfAdjointEigenSolver<CMatrix> es(hamiltonian_.matrix);
  if (es.info() != Eigen::Success)
    throw NumericError("TransitEngine: eigendecomposition failed");
  eigenvalues_ = es.eigenvalues();
  const CMatrix& v = es.eigenvectors();

  const int df = field_.dim();
  const int d = comp.dim();
  // embedding of the initial atom state, (I x |init>)
  CMatrix e = CMatrix::Zero(d, df);
  for (int f = 0; f < df; ++f)
    for (int s = 0; s < nat; ++s) e(f * nat + s, f) = initial_atom_(s);
  w_ = v.adjoint() * e;

  projections_.assign(nat, CMatrix(df, d));
  for (int m = 0; m < nat; ++m)
    for (int f = 0; f < df; ++f) projections_[m].row(f) = v.row(f * nat + m);
}

const std::vector<CMatrix>& TransitEngine::cached_kraus(double transit_factor) const {
  auto it = cache_.find(transit_factor);
  if (it != cache_.end()) return it->second;
  if (cache_.size() > 64) cache_.clear();

  CVector phases = (eigenvalues_.array() * Complex(0.0, -transit_factor)).exp();
  CMatrix w_tau = phases.asDiagonal() * w_;
  std::vector<CMatrix> kraus;
  kraus.reserve(projections_.size());
  for (const auto& p : projections_) kraus.emplace_back(p * w_tau);
  return cache_.emplace(transit_factor, std::move(kraus)).first->second;
}

std::vector<CMatrix> TransitEngine::kraus(double transit_factor) const {
  return cached_kraus(transit_factor);
}

DensityMatrix TransitEngine::apply(const DensityMatrix& rho_field, double transit_factor) const {
  require(rho_field.space == field_, "TransitEngine::apply: field space mismatch");
  const auto& ks = cached_kraus(transit_factor);
  const int df = field_.dim();
  CMatrix out = CMatrix::Zero(df, df), x(df, df);
  for (const auto& k : ks) {
    x.noalias() = k * rho_field.matrix;
    out.noalias() += x * k.adjoint();
  }
  out = 0.5 * (out + out.adjoint()).eval();
  return {field_, std::move(out)};
}

// ---------------------------------------------------------------------------
// Full protocol run

TrajectoryRecord run_protocol(const RunConfig& cfg, const RunHooks* hooks,
                              const RunOptions* options) {
  RunOptions opts = options ? *options : RunOptions{};
  TauDistribution dist = TauDistribution::from_config(cfg);
  BeamSchedule sched = make_schedule(1.0, 1.0, cfg.horizon, cfg.schedule_mode, cfg.seed, dist,
                                     opts.r_tau2);
  HilbertSpec field = HilbertSpec::field(cfg.cutoff_a, cfg.cutoff_b);
  return run_protocol(cfg, sched, DensityMatrix::pure(vacuum_state(field)), hooks, options);
}

TrajectoryRecord run_protocol(const RunConfig& cfg, const BeamSchedule& schedule,
                              DensityMatrix rho0, const RunHooks* hooks,
                              const RunOptions* options) {
  const RunOptions opts = options ? *options : RunOptions{};
  const HilbertSpec field = HilbertSpec::field(cfg.cutoff_a, cfg.cutoff_b);
  require(rho0.space == field, "run_protocol: initial state space mismatch");

  const SchemeL1Params l1 = SchemeL1Params::from_config(cfg);
  const SchemeL2Params l2 = SchemeL2Params::from_config(cfg);

  const HilbertSpec spec1 = HilbertSpec::with_atom(cfg.cutoff_a, cfg.cutoff_b, l1_atom_levels());
  const HilbertSpec spec2 =
      HilbertSpec::with_atom(cfg.cutoff_a, cfg.cutoff_b, l2_atom_levels(l2.variant));
  const TransitEngine engine1(build_hamiltonian_L1(l1, spec1), initial_atom_state_l1(l1));
  const TransitEngine engine2(build_hamiltonian_L2(l2, spec2), initial_atom_state_l2(l2));

  const StateVector target = cat_state(cfg.alpha, field);
  const Operator parity = parity_plus(field);
  auto [c_minus, c_plus] = collective_modes(field);
  const Operator n_minus{field, c_minus.matrix.adjoint() * c_minus.matrix, true};

  const double kappa = cfg.kappa_over_r;
  DensityMatrix rho = std::move(rho0);
  TrajectoryRecord rec;
  rec.dropped_overlaps = schedule.dropped_overlaps;

  double clock = 0.0;
  bool trunc_warned = false, l1_warned = false;
  long applied = 0;

  auto advance_to = [&](double t) {
    if (kappa > 0.0 && t > clock) rho = apply_cavity_damping(rho, kappa, t - clock);
    clock = std::max(clock, t);
  };

  auto apply_event = [&](const BeamEvent& ev) {
    const double half_transit =
        opts.decay_during_transit ? 0.5 * opts.r_tau2 * ev.transit_factor : 0.0;
    if (half_transit > 0.0) rho = apply_cavity_damping(rho, kappa, half_transit);
    const double trace_before = std::real(rho.matrix.trace());
    rho = ev.type == AtomType::L1 ? engine1.apply(rho, ev.transit_factor)
                                  : engine2.apply(rho, ev.transit_factor);
    if (half_transit > 0.0) rho = apply_cavity_damping(rho, kappa, half_transit);
    const double trace_after = std::real(rho.matrix.trace());
    if (std::abs(trace_after - trace_before) > 1e-12 * std::max(1.0, std::abs(trace_before)))
      throw NumericError("run_protocol: transit map did not preserve the trace");
    ++applied;
    if (opts.positivity_check_every > 0 && applied % opts.positivity_check_every == 0) {
      if (rho.min_eigenvalue() < -1e-8)
        throw NumericError("run_protocol: state lost positivity at event " +
                           std::to_string(applied));
    }
  };

  auto record_sample = [&](double t) {
    ObservableSample s;
    s.time = t;
    s.event_index = applied;
    s.fidelity = fidelity(rho, target);
    s.purity = purity(rho);
    auto [na, nb] = mean_photons(rho);
    s.n_a = na;
    s.n_b = nb;
    s.parity = parity_expectation(rho, parity);
    s.trace_error = rho.trace_error();
    rec.samples.push_back(s);
    if (hooks && hooks->on_sample) hooks->on_sample(s, rho);

    // truncation leakage: population of the top two levels of either mode
    double top_a = 0.0, top_b = 0.0;
    for (int i = 0; i < field.dim_a(); ++i)
      for (int j = 0; j < field.dim_b(); ++j) {
        double p = std::real(rho.matrix(i * field.dim_b() + j, i * field.dim_b() + j));
        if (i >= field.cutoff_a - 1) top_a += p;
        if (j >= field.cutoff_b - 1) top_b += p;
      }
    if (std::max(top_a, top_b) > 1e-4) {
      ++rec.truncation_warnings;
      if (!trunc_warned) {
        rec.warnings.push_back("truncation: top-two Fock level population " +
                               std::to_string(std::max(top_a, top_b)) + " at t = " +
                               std::to_string(t));
        trunc_warned = true;
      }
    }
    // weak-excitation validity of the Lambda scheme against the running state
    double n_odd = std::real(trace_with(rho, n_minus));
    if (l1.g_tau1() * std::sqrt(std::max(0.0, n_odd) + 0.5) > 0.5 && !l1_warned) {
      rec.warnings.push_back("validity: g*tau1*sqrt(N- + 1/2) exceeded 0.5 at t = " +
                             std::to_string(t));
      l1_warned = true;
    }
  };

  std::size_t iev = 0;
  for (long k = 0;; ++k) {
    const double ts = double(k) * cfg.sample_interval;
    if (ts > cfg.horizon + 1e-9) break;
    while (iev < schedule.events.size() && schedule.events[iev].arrival_time <= ts) {
      advance_to(schedule.events[iev].arrival_time);
      apply_event(schedule.events[iev]);
      ++iev;
    }
    advance_to(ts);
    record_sample(ts);
  }
  rec.events_applied = applied;
  return rec;
}

}  // namespace catbeam
