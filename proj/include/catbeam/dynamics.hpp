#pragma once

// Liouvillian generators and integrators. Dissipators use the convention
// D[C]rho = 2 C rho C^dag - {C^dag C, rho}, and cavity decay enters as
// kappa * (D[a] + D[b]), so <n> decays as e^{-2 kappa t}.

#include "catbeam/types.hpp"

#include <optional>
#include <vector>

namespace catbeam {

struct DissipationChannel {
  double rate = 0.0;  // units of the chosen time scale
  Operator jump;
};

// Immutable generator L(rho) = -i[H,rho] + sum_j rate_j D[C_j] + kappa(D[a]+D[b]).
// Construction precomputes the non-Hermitian drift A = -iH - W with
// W = sum_j rate_j C_j^dag C_j + kappa(n_a + n_b), so one application costs
// one drift product plus two products per channel (Hermitian inputs assumed;
// every RK4 stage preserves Hermiticity).
class Generator {
 public:
  Generator();  // empty generator on no space; apply() not usable
  Generator(std::optional<Operator> hamiltonian, std::vector<DissipationChannel> channels,
            double decay_kappa, const HilbertSpec& space);

  const HilbertSpec& space() const { return space_; }
  const std::optional<Operator>& hamiltonian() const { return hamiltonian_; }
  const std::vector<DissipationChannel>& channels() const { return channels_; }
  double decay_kappa() const { return kappa_; }
  bool empty() const { return !hamiltonian_ && jumps_.empty(); }

  // Spectral-norm scales used for step-size validation: ||H||_2 and the
  // stiffness bound 2*lambda_max(W) + 2*||H||_2.
  double hamiltonian_norm() const { return h_norm_; }
  double stiffness() const { return stiffness_; }

  CMatrix apply(const CMatrix& rho_hermitian) const;
  void apply_into(const CMatrix& rho_hermitian, CMatrix& out, CMatrix& scratch) const;

 private:
  HilbertSpec space_;
  std::optional<Operator> hamiltonian_;
  std::vector<DissipationChannel> channels_;
  double kappa_ = 0.0;
  CMatrix drift_;                        // -iH - W
  std::vector<std::pair<double, CMatrix>> jumps_;  // (2*rate, C) incl. kappa channels
  double h_norm_ = 0.0;
  double stiffness_ = 0.0;
  bool has_drift_ = false;
};

struct Propagator {
  Operator unitary;     // exp(-i H tau), hbar = 1
  double transit_time = 0.0;
};

struct RkReport {
  int steps = 0;
  double dt_used = 0.0;
  double trace_drift = 0.0;
};

// Single-channel Lindblad increment 2 C rho C^dag - {C^dag C, rho} (unit rate).
DensityIncrement dissipator(const Operator& jump, const DensityMatrix& rho);

// kappa * (D[a] + D[b]) applied to rho; mode B is skipped on single-mode specs.
DensityIncrement cavity_decay_term(const DensityMatrix& rho, double kappa);

// Fixed-step fourth-order integration of d rho/dt = L rho. The step is
// shrunk (never grown) so an integer number of steps lands on `duration`.
// Validation: dt*||H|| < 0.1 and dt*stiffness <= 2.5 (explicit stability
// region), else StabilityError. The state is re-Hermitized every step.
DensityMatrix rk4_evolve(const Generator& gen, const DensityMatrix& rho, double duration,
                         double dt, RkReport* report = nullptr);

// Step size saturating the stability bound with the given margin (<= 2.5).
double suggested_rk4_dt(const Generator& gen, double margin = 2.2);

// Exact transit propagator from the eigendecomposition of a Hermitian H.
Propagator transit_propagator(const Operator& hamiltonian, double tau);

// Frobenius norm of L(rho); zero iff rho is a fixed point.
double steady_state_residual(const Generator& gen, const DensityMatrix& rho);

// Closed-form amplitude-damping map e^{kappa K t} for both modes (exact for
// states supported inside the truncation, which damping never leaves).
DensityMatrix apply_cavity_damping(const DensityMatrix& rho, double kappa, double time);

}  // namespace catbeam
