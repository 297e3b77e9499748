#pragma once

// Atom-beam protocol: the two transit schemes, their exact single-transit
// maps, coarse-grained rates, beam scheduling, and the full injection run.
//
// Scheme Hamiltonians are built in dimensionless form (all couplings are
// coupling x transit-time products), so a transit of duration tau = f * tau2
// is exp(-i H f). One eigendecomposition per scheme serves every event.

#include "catbeam/config.hpp"
#include "catbeam/dynamics.hpp"
#include "catbeam/observables.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <utility>
#include <vector>

namespace catbeam {

struct SchemeL1Params {
  double g_a_tau1 = 0.0;
  double g_b_tau1 = 0.0;
  double r1 = 1.0;  // injections per unit time
  enum class Init { Minus, One } initial_atom_state = Init::Minus;

  double g_tau1() const;  // sqrt(ga^2 + gb^2) * tau1
  static SchemeL1Params from_config(const RunConfig& cfg);
};

struct SchemeL2Params {
  double gb_tau2 = 0.0;
  double gb_over_delta = 0.0;
  double ga_over_gb = 1.0;
  double omega_tau2 = 0.0;
  double r2 = 1.0;
  L2Variant variant = L2Variant::HPrime;
  // negative = matched default (ga'' = ga', Delta' = -Delta; g_aux = ga',
  // Delta_aux = -Delta, phi = pi/4)
  double ga2_over_gb = -1.0;
  double deltap_over_delta = -1.0;
  double g_aux_over_gb = -1.0;
  double delta_aux_over_delta = -1.0;
  double phi = 0.7853981633974483;

  double ga_tau2() const { return ga_over_gb * gb_tau2; }
  double delta_tau2() const { return gb_tau2 / gb_over_delta; }
  double ga2_tau2() const;        // g_a'' tau2
  double deltap_tau2() const;     // Delta' tau2
  double g_aux_tau2() const;
  double delta_aux_tau2() const;
  static SchemeL2Params from_config(const RunConfig& cfg);
};

// Distribution p(tau) of dispersive-scheme transit times, parameterized
// relative to the mean tau2. delta_tau2 (the phase Delta*tau2) fixes the flat
// span [0, 2pi/Delta] and the f1/f2 integrands.
struct TauDistribution {
  TauKind kind = TauKind::Delta;
  double relative_spread = 0.0;  // dtau / tau2
  double delta_tau2 = 0.0;

  static TauDistribution from_config(const RunConfig& cfg);
};

enum class AtomType { L1, L2 };

struct BeamEvent {
  double arrival_time = 0.0;  // units of 1/r
  AtomType type = AtomType::L1;
  double transit_factor = 1.0;  // tau / tau2 (always 1 for L1 atoms)
};

struct BeamSchedule {
  std::vector<BeamEvent> events;  // strictly increasing arrival times
  double horizon = 0.0;
  ScheduleMode mode = ScheduleMode::Poisson;
  std::uint64_t seed = 0;
  long dropped_overlaps = 0;
};

struct EffectiveRates {
  double gamma1 = 0.0;  // units of r
  double gamma2 = 0.0;
  double f1 = 0.0;
  double f2 = 0.0;
  double f1_factor = 0.0;  // the integrals int p(tau) sin(Delta tau) dtau
  double f2_factor = 0.0;  // and int p(tau) sin^2(Delta tau / 2) dtau
};

struct CancellationReport {
  double residual = 0.0;  // value of the Stark-cancellation condition
  double relative_residual = 0.0;
  bool pass = false;  // |relative| <= 1e-12
};

// Atom level label sets, in the fixed basis order used by the Hamiltonians.
std::vector<std::string> l1_atom_levels();               // {"1","2","3"}
std::vector<std::string> l2_atom_levels(L2Variant v);    // {"1'","2'","3'"} (+ "e" | "1aux","2aux")

// Resonant Lambda-scheme Hamiltonian (dimensionless, x tau1):
// ga(a^dag s13 + h.c.) + gb(b^dag s23 + h.c.); conserves a^dag a + b^dag b + s33.
Operator build_hamiltonian_L1(const SchemeL1Params& p, const HilbertSpec& spec);

// Dispersive pair-pumping Hamiltonian (dimensionless, x tau2):
// Delta s2'2' + (ga' a^dag s1'2' + gb' b^dag s2'3' + Omega s1'3' + h.c.),
// plus the variant compensation term (h' or h_aux).
Operator build_hamiltonian_L2(const SchemeL2Params& p, const HilbertSpec& spec);

// Atom preparation states in the scheme's level basis.
CVector initial_atom_state_l1(const SchemeL1Params& p);
CVector initial_atom_state_l2(const SchemeL2Params& p);

// Residual of the applicable Stark-cancellation condition; throws for bare.
CancellationReport cancellation_check(const SchemeL2Params& p);

// alpha = principal sqrt of Omega*Delta/(ga' gb').
Complex alpha_from_drive(const SchemeL2Params& p);

// gamma1 = r1 (ga^2 gb^2/g^2) tau1^2; gamma2 = (r2/8)(ga' gb'/Delta)^2 E[tau^2];
// f1, f2 by quadrature over p(tau).
EffectiveRates effective_rates(const SchemeL1Params& l1, const SchemeL2Params& l2,
                               const TauDistribution& dist);

// Beam schedule over [0, horizon]. Poisson mode draws per-type exponential
// inter-arrival gaps from the seed; uniform mode places events at spacing
// 1/(r1+r2) with deterministic type interleaving. r_tau2 > 0 gives transits a
// finite footprint r*tau2 on the beam clock and drops overlapping arrivals
// (counted); the default treats transits as instantaneous.
BeamSchedule make_schedule(double r1, double r2, double horizon, ScheduleMode mode,
                           std::uint64_t seed, const TauDistribution& dist, double r_tau2 = 0.0);

struct TransitScheme {
  HilbertSpec composite;
  CVector initial_atom;  // normalized, length = atom dimension
};

// rho' = Tr_atom[ U (rho x |init><init|) U^dag ], evaluated through the
// Kraus slices K_m = (I x <m|) U (I x |init>).
DensityMatrix atom_event(const DensityMatrix& rho_field, const TransitScheme& scheme,
                         const Propagator& propagator);

// Per-scheme transit machinery: one eigendecomposition, Kraus sets per
// transit factor with a small cache (delta-distributed beams reuse a single
// entry). Each protocol run owns its engines; not shared across threads.
class TransitEngine {
 public:
  TransitEngine(Operator hamiltonian_dimensionless, CVector initial_atom);

  const HilbertSpec& composite() const { return hamiltonian_.space; }
  const HilbertSpec& field() const { return field_; }

  std::vector<CMatrix> kraus(double transit_factor) const;
  DensityMatrix apply(const DensityMatrix& rho_field, double transit_factor) const;

 private:
  const std::vector<CMatrix>& cached_kraus(double transit_factor) const;

  Operator hamiltonian_;
  HilbertSpec field_;
  CVector initial_atom_;
  RVector eigenvalues_;
  std::vector<CMatrix> projections_;  // P_m = (I x <m|) V, field_dim x D
  CMatrix w_;                         // V^dag (I x |init>), D x field_dim
  mutable std::map<double, std::vector<CMatrix>> cache_;
};

struct RunHooks {
  std::function<void(const ObservableSample&, const DensityMatrix&)> on_sample;
};

struct RunOptions {
  long positivity_check_every = 100;  // events between min-eigenvalue checks
  double r_tau2 = 0.0;                // transit footprint on the beam clock
  bool decay_during_transit = false;  // symmetric decay split around events
};

// Full injection run from the cavity vacuum: between events the exact decay
// map, at each event the scheme's transit map; observables sampled on the
// time grid k * sample_interval.
TrajectoryRecord run_protocol(const RunConfig& cfg, const RunHooks* hooks = nullptr,
                              const RunOptions* options = nullptr);

// Same engine with an explicit schedule and initial state.
TrajectoryRecord run_protocol(const RunConfig& cfg, const BeamSchedule& schedule,
                              DensityMatrix rho0, const RunHooks* hooks = nullptr,
                              const RunOptions* options = nullptr);

}  // namespace catbeam
