#pragma once

// Independent verification paths: direct integration of the engineered
// Lindbladian, exact-vs-perturbative single-transit comparisons, and
// dark-subspace residual checks. These are the cross-checks behind the
// `check` and `ideal` commands and the regression suite.

#include "catbeam/dynamics.hpp"
#include "catbeam/observables.hpp"
#include "catbeam/protocol.hpp"

#include <string>
#include <vector>

namespace catbeam {

// RK4 integration of gamma1 D[C1] + gamma2 D[C2] + kappa(D[a]+D[b]) from
// rho0, sampling the same observables as the event-based run. dt = 0 picks
// the stability-limited step automatically.
TrajectoryRecord ideal_evolution(double alpha, double gamma1, double gamma2, double kappa,
                                 const DensityMatrix& rho0, double duration,
                                 double sample_interval = 1.0, double dt = 0.0,
                                 const RunHooks* hooks = nullptr);

// The engineered generator itself (shared by ideal_evolution and tests).
Generator ideal_generator(double alpha, double gamma1, double gamma2, double kappa,
                          const HilbertSpec& field);

struct PerturbativeL1Report {
  struct Entry {
    std::string state;
    double diff_full = 0.0;  // max elementwise |exact - predicted| at (ga,gb)tau1
    double diff_half = 0.0;  // same at half couplings
  };
  std::vector<Entry> states;
  double max_difference = 0.0;
  double scaling_exponent = 0.0;  // log2(diff_full/diff_half), ~4
};

// Exact traced transit map against the second-order odd-mode damping map,
// rho + (ga^2 gb^2/g^2) tau1^2 (2 c- rho c-^dag - {c-^dag c-, rho}).
// The exponent is fit from the given couplings and couplings/2.
PerturbativeL1Report perturbative_step_check_L1(const SchemeL1Params& params,
                                                const std::vector<StateVector>& test_states);

struct PerturbativeL2Report {
  // least-squares coefficients of the four predicted lines
  double c2_line = 0.0;         // 2 C2 rho C2^dag - {C2^dag C2, rho}
  double stark_line = 0.0;      // i[n_a, rho]
  double loss_line = 0.0;       // 2 a rho a^dag - {n_a, rho}
  double dephasing_line = 0.0;  // [n_a, [n_a, rho]]
  // closed-form predictions at the same parameters
  double c2_predicted = 0.0;         // (ga' gb' tau/Delta)^2 / 8
  double stark_predicted = 0.0;      // (ga'/Delta)^2 (Delta tau - sin Delta tau)
  double loss_predicted = 0.0;       // 2 (ga'/Delta)^2 sin^2(Delta tau / 2)
  double dephasing_predicted = 0.0;  // -(ga'^2 tau/Delta)^2 / 2
  double relative_residual = 0.0;    // norm of the unfitted remainder / norm of data
};

// Fits the exact traced transit map (minus identity) onto the four predicted
// superoperator structures over the test states. Throws NumericError if the
// fit Gram matrix is degenerate.
PerturbativeL2Report perturbative_step_check_L2(const SchemeL2Params& params,
                                                const std::vector<StateVector>& test_states);

// Default probe states for the map checks (field spec): vacuum, low Fock
// states, a coherent product, a mode-A superposition, and the target cat.
std::vector<StateVector> default_probe_states(double alpha, const HilbertSpec& field);

struct DarkSubspaceReport {
  struct Entry {
    std::string state;
    double c1_residual = 0.0;
    double c2_residual = 0.0;
  };
  std::vector<Entry> entries;  // branch products and both cats
  double even_parity = 0.0;
  double odd_parity = 0.0;
  bool odd_degenerate = false;  // alpha = 0: the odd combination vanishes
  double max_residual = 0.0;
};

DarkSubspaceReport dark_subspace_check(double alpha, const HilbertSpec& field);

}  // namespace catbeam
