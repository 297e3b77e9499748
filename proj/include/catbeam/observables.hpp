#pragma once

// Scalar diagnostics of field states and the sampled trajectory record.

#include "catbeam/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace catbeam {

struct ObservableSample {
  double time = 0.0;  // units of 1/r
  long event_index = 0;
  double fidelity = 0.0;
  double purity = 0.0;
  double n_a = 0.0;
  double n_b = 0.0;
  double parity = 0.0;
  double trace_error = 0.0;
};

struct TrajectoryRecord {
  std::vector<ObservableSample> samples;
  std::vector<std::string> warnings;
  long truncation_warnings = 0;  // samples with top-two-level population > 1e-4
  long dropped_overlaps = 0;
  long events_applied = 0;

  const ObservableSample* peak_fidelity_sample() const;
  double final_fidelity() const { return samples.empty() ? 0.0 : samples.back().fidelity; }
};

// F = <psi|rho|psi> for a pure target, clamped into [0,1] with 1e-9 slack.
double fidelity(const DensityMatrix& rho, const StateVector& target);

// (tr rho n_a, tr rho n_b)
std::pair<double, double> mean_photons(const DensityMatrix& rho);

// tr(rho Pi+); the overload with a precomputed parity operator avoids the
// eigendecomposition on repeated calls.
double parity_expectation(const DensityMatrix& rho);
double parity_expectation(const DensityMatrix& rho, const Operator& parity_op);

// tr(rho^2)
double purity(const DensityMatrix& rho);

// tr(rho M) without forming the product matrix.
Complex trace_with(const DensityMatrix& rho, const Operator& op);

}  // namespace catbeam
