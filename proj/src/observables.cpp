#include "catbeam/observables.hpp"

#include "catbeam/fock.hpp"

#include <algorithm>
#include <cmath>

namespace catbeam {

using detail::require;

const ObservableSample* TrajectoryRecord::peak_fidelity_sample() const {
  const ObservableSample* best = nullptr;
  for (const auto& s : samples)
    if (!best || s.fidelity > best->fidelity) best = &s;
  return best;
}

double fidelity(const DensityMatrix& rho, const StateVector& target) {
  require(rho.space == target.space, "fidelity: space mismatch");
  double f = std::real(target.amplitudes.dot(rho.matrix * target.amplitudes));
  if (f < -1e-9 || f > 1.0 + 1e-9)
    throw NumericError("fidelity: value " + std::to_string(f) + " outside [0,1]");
  return std::clamp(f, 0.0, 1.0);
}

std::pair<double, double> mean_photons(const DensityMatrix& rho) {
  const HilbertSpec& s = rho.space;
  require(!s.has_atom(), "mean_photons: field-only states");
  double na = 0.0, nb = 0.0;
  for (int i = 0; i < s.dim_a(); ++i)
    for (int j = 0; j < s.dim_b(); ++j) {
      double p = std::real(rho.matrix(i * s.dim_b() + j, i * s.dim_b() + j));
      na += double(i) * p;
      nb += double(j) * p;
    }
  return {na, nb};
}

double parity_expectation(const DensityMatrix& rho) {
  return parity_expectation(rho, parity_plus(rho.space));
}

double parity_expectation(const DensityMatrix& rho, const Operator& parity_op) {
  return std::real(trace_with(rho, parity_op));
}

double purity(const DensityMatrix& rho) {
  // tr(rho^2) = ||rho||_F^2 for Hermitian rho
  return rho.matrix.squaredNorm();
}

Complex trace_with(const DensityMatrix& rho, const Operator& op) {
  require(rho.space == op.space, "trace_with: space mismatch");
  return (rho.matrix.transpose().cwiseProduct(op.matrix)).sum();
}

}  // namespace catbeam
