#include "catbeam/dynamics.hpp"

#include "catbeam/fock.hpp"

#include <cmath>

namespace catbeam {

using detail::require;

namespace {

double spectral_norm_hermitian(const CMatrix& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
  return std::max(std::abs(es.eigenvalues().minCoeff()), std::abs(es.eigenvalues().maxCoeff()));
}

}  // namespace

Generator::Generator() = default;

Generator::Generator(std::optional<Operator> hamiltonian, std::vector<DissipationChannel> channels,
                     double decay_kappa, const HilbertSpec& space)
    : space_(space), hamiltonian_(std::move(hamiltonian)), channels_(std::move(channels)),
      kappa_(decay_kappa) {
  require(kappa_ >= 0.0, "Generator: decay_kappa must be >= 0");
  if (hamiltonian_) require(hamiltonian_->space == space_, "Generator: Hamiltonian space mismatch");
  for (const auto& ch : channels_) {
    require(ch.rate >= 0.0, "Generator: channel rate must be >= 0");
    require(ch.jump.space == space_, "Generator: jump operator space mismatch");
  }

  const int d = space_.dim();
  CMatrix w = CMatrix::Zero(d, d);
  for (const auto& ch : channels_) {
    if (ch.rate == 0.0) continue;
    jumps_.emplace_back(2.0 * ch.rate, ch.jump.matrix);
    w.noalias() += ch.rate * (ch.jump.matrix.adjoint() * ch.jump.matrix);
  }
  if (kappa_ > 0.0) {
    Operator a = embed(annihilation_op(space_.cutoff_a), Slot::ModeA, space_);
    jumps_.emplace_back(2.0 * kappa_, a.matrix);
    w.noalias() += kappa_ * (a.matrix.adjoint() * a.matrix);
    if (space_.cutoff_b >= 1) {
      Operator b = embed(annihilation_op(space_.cutoff_b), Slot::ModeB, space_);
      jumps_.emplace_back(2.0 * kappa_, b.matrix);
      w.noalias() += kappa_ * (b.matrix.adjoint() * b.matrix);
    }
  }

  h_norm_ = hamiltonian_ ? spectral_norm_hermitian(hamiltonian_->matrix) : 0.0;
  stiffness_ = 2.0 * spectral_norm_hermitian(w) + 2.0 * h_norm_;

  drift_ = -w;
  if (hamiltonian_) drift_.noalias() += -kI * hamiltonian_->matrix;
  has_drift_ = hamiltonian_.has_value() || !jumps_.empty();
}

void Generator::apply_into(const CMatrix& rho, CMatrix& out, CMatrix& scratch) const {
  const int d = space_.dim();
  require(rho.rows() == d && rho.cols() == d, "Generator::apply: dimension mismatch");
  if (!has_drift_) {
    out.setZero(d, d);
    return;
  }
  // A rho + (A rho)^dag reproduces -i[H,rho] - {W,rho} for Hermitian rho
  scratch.noalias() = drift_ * rho;
  out = scratch + scratch.adjoint();
  for (const auto& [two_rate, c] : jumps_) {
    scratch.noalias() = c * rho;
    out.noalias() += two_rate * (scratch * c.adjoint());
  }
}

CMatrix Generator::apply(const CMatrix& rho) const {
  CMatrix out, scratch;
  apply_into(rho, out, scratch);
  return out;
}

DensityIncrement dissipator(const Operator& jump, const DensityMatrix& rho) {
  require(jump.space == rho.space, "dissipator: space mismatch");
  CMatrix x = jump.matrix * rho.matrix;
  CMatrix cdc = jump.matrix.adjoint() * jump.matrix;
  DensityIncrement out = 2.0 * (x * jump.matrix.adjoint());
  out.noalias() -= cdc * rho.matrix;
  out.noalias() -= rho.matrix * cdc;
  return out;
}

DensityIncrement cavity_decay_term(const DensityMatrix& rho, double kappa) {
  require(kappa >= 0.0, "cavity_decay_term: kappa must be >= 0");
  const HilbertSpec& spec = rho.space;
  require(spec.cutoff_a >= 1, "cavity_decay_term: field mode required");
  Operator a = embed(annihilation_op(spec.cutoff_a), Slot::ModeA, spec);
  DensityIncrement out = dissipator(a, rho);
  if (spec.cutoff_b >= 1) {
    Operator b = embed(annihilation_op(spec.cutoff_b), Slot::ModeB, spec);
    out += dissipator(b, rho);
  }
  return kappa * out;
}

double suggested_rk4_dt(const Generator& gen, double margin) {
  double s = gen.stiffness();
  if (s <= 0.0) return 1.0;
  return margin / s;
}

DensityMatrix rk4_evolve(const Generator& gen, const DensityMatrix& rho0, double duration,
                         double dt, RkReport* report) {
  require(gen.space() == rho0.space, "rk4_evolve: space mismatch");
  require(dt > 0.0, "rk4_evolve: dt must be > 0");
  require(duration >= 0.0, "rk4_evolve: duration must be >= 0");
  if (gen.hamiltonian_norm() * dt >= 0.1)
    throw StabilityError("rk4_evolve: dt*||H|| >= 0.1; step does not resolve the Hamiltonian");
  if (gen.stiffness() * dt > 2.5)
    throw StabilityError("rk4_evolve: dt exceeds the explicit stability bound 2.5/stiffness");

  if (duration == 0.0 || gen.empty()) {
    if (report) *report = {0, dt, 0.0};
    return rho0;
  }

  const int steps = std::max(1, int(std::ceil(duration / dt - 1e-9)));
  const double h = duration / steps;
  const double trace0 = std::real(rho0.matrix.trace());

  CMatrix rho = rho0.matrix;
  CMatrix k1, k2, k3, k4, stage, scratch;
  for (int s = 0; s < steps; ++s) {
    gen.apply_into(rho, k1, scratch);
    stage = rho + (0.5 * h) * k1;
    gen.apply_into(stage, k2, scratch);
    stage = rho + (0.5 * h) * k2;
    gen.apply_into(stage, k3, scratch);
    stage = rho + h * k3;
    gen.apply_into(stage, k4, scratch);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    if ((s & 63) == 0 && !rho.allFinite())
      throw NumericError("rk4_evolve: non-finite state at step " + std::to_string(s));
  }
  if (!rho.allFinite()) throw NumericError("rk4_evolve: non-finite final state");

  if (report) {
    report->steps = steps;
    report->dt_used = h;
    report->trace_drift = std::abs(std::real(rho.trace()) - trace0);
  }
  return {rho0.space, std::move(rho)};
}

Propagator transit_propagator(const Operator& hamiltonian, double tau) {
  const CMatrix& h = hamiltonian.matrix;
  double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("transit_propagator: Hamiltonian is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  if (es.info() != Eigen::Success)
    throw NumericError("transit_propagator: eigendecomposition failed");
  CVector phases = (es.eigenvalues().array() * Complex(0.0, -tau)).exp();
  CMatrix u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  return {Operator{hamiltonian.space, std::move(u)}, tau};
}

double steady_state_residual(const Generator& gen, const DensityMatrix& rho) {
  require(gen.space() == rho.space, "steady_state_residual: space mismatch");
  return gen.apply(rho.matrix).norm();
}

namespace {

// One-mode binomial damping ladder applied in place; mode A varies the slow
// index. eta = e^{-2 kappa t} is the surviving-photon weight.
void damp_mode(CMatrix& rho, int dim_slow, int dim_fast, bool slow_mode, double eta) {
  const int d = dim_slow * dim_fast;
  const int n_levels = slow_mode ? dim_slow : dim_fast;
  std::vector<double> lg(n_levels + 1);
  for (int n = 0; n <= n_levels; ++n) lg[n] = std::lgamma(double(n) + 1.0);
  auto binom = [&](int n, int k) { return std::exp(lg[n] - lg[k] - lg[n - k]); };
  const double loss = 1.0 - eta;

  CMatrix out = CMatrix::Zero(d, d);
  for (int k = 0; k < n_levels; ++k) {
    if (k > 0 && loss == 0.0) break;
    for (int m = k; m < n_levels; ++m) {
      for (int n = k; n < n_levels; ++n) {
        double w = std::sqrt(binom(m, k) * binom(n, k)) *
                   std::pow(eta, 0.5 * double(m + n - 2 * k)) * std::pow(loss, double(k));
        if (w == 0.0) continue;
        if (slow_mode) {
          out.block((m - k) * dim_fast, (n - k) * dim_fast, dim_fast, dim_fast) +=
              w * rho.block(m * dim_fast, n * dim_fast, dim_fast, dim_fast);
        } else {
          for (int i = 0; i < dim_slow; ++i)
            for (int j = 0; j < dim_slow; ++j)
              out(i * dim_fast + (m - k), j * dim_fast + (n - k)) +=
                  w * rho(i * dim_fast + m, j * dim_fast + n);
        }
      }
    }
  }
  rho.swap(out);
}

}  // namespace

DensityMatrix apply_cavity_damping(const DensityMatrix& rho, double kappa, double time) {
  require(kappa >= 0.0 && time >= 0.0, "apply_cavity_damping: kappa and time must be >= 0");
  require(!rho.space.has_atom(), "apply_cavity_damping: field-only states");
  if (kappa == 0.0 || time == 0.0) return rho;
  const double eta = std::exp(-2.0 * kappa * time);
  CMatrix m = rho.matrix;
  damp_mode(m, rho.space.dim_a(), rho.space.dim_b(), true, eta);
  if (rho.space.cutoff_b >= 1) damp_mode(m, rho.space.dim_a(), rho.space.dim_b(), false, eta);
  return {rho.space, std::move(m)};
}

}  // namespace catbeam
