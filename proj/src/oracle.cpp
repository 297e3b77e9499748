#include "catbeam/oracle.hpp"

#include "catbeam/fock.hpp"

#include <cmath>

namespace catbeam {

using detail::require;

Generator ideal_generator(double alpha, double gamma1, double gamma2, double kappa,
                          const HilbertSpec& field) {
  auto [c1, c2] = jump_operators(alpha, field);
  std::vector<DissipationChannel> channels;
  channels.push_back({gamma1, std::move(c1)});
  channels.push_back({gamma2, std::move(c2)});
  return Generator(std::nullopt, std::move(channels), kappa, field);
}

TrajectoryRecord ideal_evolution(double alpha, double gamma1, double gamma2, double kappa,
                                 const DensityMatrix& rho0, double duration,
                                 double sample_interval, double dt, const RunHooks* hooks) {
  require(duration >= 0.0 && sample_interval > 0.0, "ideal_evolution: bad time arguments");
  const HilbertSpec& field = rho0.space;
  Generator gen = ideal_generator(alpha, gamma1, gamma2, kappa, field);
  if (dt <= 0.0) dt = std::min(suggested_rk4_dt(gen), sample_interval);

  const StateVector target = cat_state(alpha, field);
  const Operator parity = parity_plus(field);

  TrajectoryRecord rec;
  DensityMatrix rho = rho0;
  const long n_samples = long(std::floor(duration / sample_interval + 1e-9));
  for (long k = 0; k <= n_samples; ++k) {
    if (k > 0) rho = rk4_evolve(gen, rho, sample_interval, dt);
    ObservableSample s;
    s.time = double(k) * sample_interval;
    s.event_index = 0;
    s.fidelity = fidelity(rho, target);
    s.purity = purity(rho);
    auto [na, nb] = mean_photons(rho);
    s.n_a = na;
    s.n_b = nb;
    s.parity = parity_expectation(rho, parity);
    s.trace_error = rho.trace_error();
    rec.samples.push_back(s);
    if (hooks && hooks->on_sample) hooks->on_sample(s, rho);
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Perturbative transit-map checks

namespace {

// Exact traced map for one transit of the Lambda scheme at the given
// coupling products.
DensityMatrix exact_l1_map(const SchemeL1Params& p, const DensityMatrix& rho) {
  HilbertSpec comp =
      HilbertSpec::with_atom(rho.space.cutoff_a, rho.space.cutoff_b, l1_atom_levels());
  Propagator u = transit_propagator(build_hamiltonian_L1(p, comp), 1.0);
  return atom_event(rho, {comp, initial_atom_state_l1(p)}, u);
}

double l1_map_difference(const SchemeL1Params& p, const DensityMatrix& rho,
                         const Operator& c_minus) {
  DensityMatrix exact = exact_l1_map(p, rho);
  const double g2 = p.g_a_tau1 * p.g_a_tau1 + p.g_b_tau1 * p.g_b_tau1;
  const double weight =
      g2 > 0.0 ? (p.g_a_tau1 * p.g_a_tau1 * p.g_b_tau1 * p.g_b_tau1) / g2 : 0.0;
  CMatrix predicted = rho.matrix + weight * dissipator(c_minus, rho);
  return (exact.matrix - predicted).cwiseAbs().maxCoeff();
}

}  // namespace

PerturbativeL1Report perturbative_step_check_L1(const SchemeL1Params& params,
                                                const std::vector<StateVector>& test_states) {
  require(!test_states.empty(), "perturbative_step_check_L1: no test states");
  PerturbativeL1Report rep;
  SchemeL1Params half = params;
  half.g_a_tau1 *= 0.5;
  half.g_b_tau1 *= 0.5;

  const HilbertSpec& field = test_states.front().space;
  auto [c_minus, c_plus] = collective_modes(field);

  double max_full = 0.0, max_half = 0.0;
  for (const auto& psi : test_states) {
    require(psi.space == field, "perturbative_step_check_L1: mixed state spaces");
    DensityMatrix rho = DensityMatrix::pure(psi);
    PerturbativeL1Report::Entry e;
    e.state = "state " + std::to_string(rep.states.size());
    e.diff_full = l1_map_difference(params, rho, c_minus);
    e.diff_half = l1_map_difference(half, rho, c_minus);
    max_full = std::max(max_full, e.diff_full);
    max_half = std::max(max_half, e.diff_half);
    rep.states.push_back(std::move(e));
  }
  rep.max_difference = max_full;
  // two-point scaling fit; dark states sit at the numerical floor and carry
  // no exponent information
  rep.scaling_exponent =
      (max_full > 1e-13 && max_half > 1e-13) ? std::log2(max_full / max_half) : 0.0;
  return rep;
}

std::vector<StateVector> default_probe_states(double alpha, const HilbertSpec& field) {
  std::vector<StateVector> states;
  states.push_back(vacuum_state(field));
  states.push_back(basis_state(field, 1, 0));
  states.push_back(basis_state(field, 0, 1));
  states.push_back(basis_state(field, 1, 1));
  states.push_back(basis_state(field, 2, 1));
  states.push_back(product_coherent(0.8, 0.5, field));
  {
    // (|0>+|1>)/sqrt2 on each mode: exposes single-photon coherences
    CVector v = CVector::Zero(field.dim());
    v(field.index(0, 0)) = 0.5;
    v(field.index(1, 0)) = 0.5;
    v(field.index(0, 1)) = 0.5;
    v(field.index(1, 1)) = 0.5;
    states.emplace_back(field, std::move(v));
  }
  if (alpha > 0.0) states.push_back(cat_state(alpha, field));
  return states;
}

PerturbativeL2Report perturbative_step_check_L2(const SchemeL2Params& params,
                                                const std::vector<StateVector>& test_states) {
  require(!test_states.empty(), "perturbative_step_check_L2: no test states");
  const HilbertSpec& field = test_states.front().space;
  const Complex alpha = alpha_from_drive(params);
  auto [c1, c2] = jump_operators(alpha, field);
  Operator a = embed(annihilation_op(field.cutoff_a), Slot::ModeA, field);
  CMatrix n_a = a.matrix.adjoint() * a.matrix;
  CMatrix c2d = c2.matrix.adjoint() * c2.matrix;

  HilbertSpec comp =
      HilbertSpec::with_atom(field.cutoff_a, field.cutoff_b, l2_atom_levels(params.variant));
  Propagator u = transit_propagator(build_hamiltonian_L2(params, comp), 1.0);
  TransitScheme scheme{comp, initial_atom_state_l2(params)};

  auto structure = [&](int which, const CMatrix& r) -> CMatrix {
    switch (which) {
      case 0: return 2.0 * (c2.matrix * r * c2.matrix.adjoint()) - c2d * r - r * c2d;
      case 1: return kI * (n_a * r - r * n_a);
      case 2: return 2.0 * (a.matrix * r * a.matrix.adjoint()) - n_a * r - r * n_a;
      default: {
        CMatrix comm = n_a * r - r * n_a;
        return n_a * comm - comm * n_a;
      }
    }
  };

  Eigen::Matrix4d gram = Eigen::Matrix4d::Zero();
  Eigen::Vector4d rhs = Eigen::Vector4d::Zero();
  double data_norm2 = 0.0;
  std::vector<CMatrix> s(4);
  std::vector<CMatrix> increments;
  increments.reserve(test_states.size());
  for (const auto& psi : test_states) {
    require(psi.space == field, "perturbative_step_check_L2: mixed state spaces");
    DensityMatrix rho = DensityMatrix::pure(psi);
    CMatrix y = atom_event(rho, scheme, u).matrix - rho.matrix;
    increments.push_back(y);
    data_norm2 += y.squaredNorm();
    for (int i = 0; i < 4; ++i) s[i] = structure(i, rho.matrix);
    for (int i = 0; i < 4; ++i) {
      for (int j = i; j < 4; ++j) {
        double g = std::real((s[i].conjugate().cwiseProduct(s[j])).sum());
        gram(i, j) += g;
        gram(j, i) = gram(i, j);
      }
      rhs(i) += std::real((s[i].conjugate().cwiseProduct(y)).sum());
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> ges(gram);
  if (ges.eigenvalues().minCoeff() <= 1e-12 * ges.eigenvalues().maxCoeff())
    throw NumericError("perturbative_step_check_L2: fit is degenerate; probe states do not "
                       "separate the four structures");
  Eigen::Vector4d x = gram.ldlt().solve(rhs);

  double res2 = 0.0;
  for (std::size_t k = 0; k < test_states.size(); ++k) {
    CMatrix r = (test_states[k].amplitudes * test_states[k].amplitudes.adjoint()).eval();
    CMatrix y = increments[k];
    for (int i = 0; i < 4; ++i) y -= x(i) * structure(i, r);
    res2 += y.squaredNorm();
  }

  PerturbativeL2Report rep;
  rep.c2_line = x(0);
  rep.stark_line = x(1);
  rep.loss_line = x(2);
  rep.dephasing_line = x(3);
  const double dt2 = params.delta_tau2();
  const double g_over_d = params.ga_tau2() / dt2;
  rep.c2_predicted = std::pow(params.ga_tau2() * params.gb_tau2 / dt2, 2) / 8.0;
  rep.stark_predicted = g_over_d * g_over_d * (dt2 - std::sin(dt2));
  rep.loss_predicted = 2.0 * g_over_d * g_over_d * std::pow(std::sin(0.5 * dt2), 2);
  rep.dephasing_predicted = -0.5 * std::pow(params.ga_tau2() * g_over_d, 2);
  rep.relative_residual = data_norm2 > 0.0 ? std::sqrt(res2 / data_norm2) : 0.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Dark subspace

DarkSubspaceReport dark_subspace_check(double alpha, const HilbertSpec& field) {
  auto [c1, c2] = jump_operators(alpha, field);
  Operator parity = parity_plus(field);
  DarkSubspaceReport rep;

  auto add = [&](const std::string& name, const StateVector& psi) {
    DarkSubspaceReport::Entry e;
    e.state = name;
    e.c1_residual = (c1.matrix * psi.amplitudes).norm();
    e.c2_residual = (c2.matrix * psi.amplitudes).norm();
    rep.max_residual = std::max({rep.max_residual, e.c1_residual, e.c2_residual});
    rep.entries.push_back(std::move(e));
  };

  add("branch(+alpha,+alpha)", product_coherent(alpha, alpha, field));
  add("branch(-alpha,-alpha)", product_coherent(-alpha, -alpha, field));
  StateVector even = cat_state(alpha, field);
  add("even_cat", even);
  rep.even_parity = parity_expectation(DensityMatrix::pure(even), parity);
  if (alpha == 0.0) {
    rep.odd_degenerate = true;
    rep.odd_parity = 0.0;
  } else {
    StateVector odd = odd_cat_state(alpha, field);
    add("odd_cat", odd);
    rep.odd_parity = parity_expectation(DensityMatrix::pure(odd), parity);
  }
  return rep;
}

}  // namespace catbeam
