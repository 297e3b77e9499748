#include "doctest.h"

#include "catbeam/fock.hpp"

#include <cmath>
#include <random>

using namespace catbeam;

namespace {

// independent Poisson tail sum_{n > cutoff} e^{-|a|^2} |a|^{2n} / n!
double poisson_tail(double mean, int cutoff) {
  double term = std::exp(-mean);
  double cdf = 0.0;
  for (int n = 0; n <= cutoff; ++n) {
    cdf += term;
    term *= mean / double(n + 1);
  }
  return 1.0 - cdf;
}

}  // namespace

TEST_CASE("annihilation operator entries") {
  Operator a1 = annihilation_op(1);
  CHECK(a1.matrix(0, 1).real() == doctest::Approx(1.0));
  Operator a4 = annihilation_op(4);
  CHECK(a4.matrix(3, 4).real() == doctest::Approx(2.0));
  // lowering the vacuum
  CVector vac = CVector::Zero(5);
  vac(0) = 1.0;
  CHECK((a4.matrix * vac).norm() == doctest::Approx(0.0));
  CHECK_THROWS_AS(annihilation_op(0), std::invalid_argument);
}

TEST_CASE("commutator [a, a%] is the identity away from the truncation corner") {
  Operator a = annihilation_op(8);
  CMatrix comm = a.matrix * a.matrix.adjoint() - a.matrix.adjoint() * a.matrix;
  for (int n = 0; n <= 8; ++n) {
    double expected = n < 8 ? 1.0 : -8.0;  // corner picks up -cutoff
    CHECK(std::abs(comm(n, n) - expected) < 1e-14);
  }
  for (int i = 0; i <= 8; ++i)
    for (int j = 0; j <= 8; ++j)
      if (i != j) CHECK(std::abs(comm(i, j)) < 1e-14);
}

TEST_CASE("embed basics") {
  HilbertSpec spec = HilbertSpec::with_atom(2, 2, {"x", "y", "z"});
  Operator id_a = identity_op(HilbertSpec::single_mode(2));
  Operator embedded = embed(id_a, Slot::ModeA, spec);
  CHECK((embedded.matrix - CMatrix::Identity(spec.dim(), spec.dim())).norm() ==
        doctest::Approx(0.0));

  Operator a = embed(annihilation_op(2), Slot::ModeA, spec);
  Operator b = embed(annihilation_op(2), Slot::ModeB, spec);
  CHECK((a.matrix * b.matrix - b.matrix * a.matrix).norm() == doctest::Approx(0.0));

  Operator na = embed(number_op(2), Slot::ModeA, spec);
  CHECK(std::real(na.matrix.trace()) == doctest::Approx(27.0));

  CHECK_THROWS_AS(embed(annihilation_op(3), Slot::ModeA, spec), std::invalid_argument);
}

TEST_CASE("collective modes") {
  HilbertSpec spec = HilbertSpec::field(4, 4);
  auto [cm, cp] = collective_modes(spec);

  // symmetric single photon is a pure c+ excitation
  CVector sym = CVector::Zero(spec.dim());
  sym(spec.index(1, 0)) = 1.0 / std::sqrt(2.0);
  sym(spec.index(0, 1)) = 1.0 / std::sqrt(2.0);
  CHECK((cm.matrix * sym).norm() < 1e-14);

  CVector vac = vacuum_state(spec).amplitudes;
  CVector up = cp.matrix.adjoint() * vac;
  CHECK((up - sym).norm() < 1e-14);

  CHECK(std::abs(vac.dot(cm.matrix * (cm.matrix.adjoint() * vac)) - Complex(1.0)) < 1e-14);

  // [c-, c+^dag] = 0 on the truncation interior
  CMatrix comm = cm.matrix * cp.matrix.adjoint() - cp.matrix.adjoint() * cm.matrix;
  for (int na = 0; na <= 2; ++na)
    for (int nb = 0; nb <= 2; ++nb) {
      CVector e = basis_state(spec, na, nb).amplitudes;
      CHECK((comm * e).norm() < 1e-13);
    }
}

TEST_CASE("coherent state") {
  StateVector zero = coherent_state(0.0, 8);
  CHECK(std::abs(zero.amplitudes(0) - Complex(1.0)) < 1e-15);
  CHECK(zero.amplitudes.tail(8).norm() < 1e-15);

  double tail = -1.0;
  StateVector one = coherent_state(1.0, 16, kCoherentTailAuto, &tail);
  CHECK(tail == doctest::Approx(poisson_tail(1.0, 16)).epsilon(1e-6));
  CHECK(tail < 1e-10);

  double n_mean = 0.0;
  for (int n = 0; n <= 16; ++n) n_mean += n * std::norm(one.amplitudes(n));
  CHECK(std::abs(n_mean - 1.0) < 1e-9);

  CHECK_THROWS_AS(coherent_state(3.0, 4), TruncationError);
}

TEST_CASE("cat state") {
  HilbertSpec spec = HilbertSpec::field(16, 16);

  SUBCASE("alpha = 0 collapses to the vacuum") {
    StateVector cat = cat_state(0.0, spec);
    CHECK(std::abs(cat.amplitudes(spec.index(0, 0)) - Complex(1.0)) < 1e-14);
  }

  SUBCASE("alpha = 1 is annihilated by both jump operators") {
    StateVector cat = cat_state(1.0, spec);
    cat.require_normalized();
    auto [c1, c2] = jump_operators(1.0, spec);
    CHECK((c1.matrix * cat.amplitudes).norm() < 1e-6);
    CHECK((c2.matrix * cat.amplitudes).norm() < 1e-6);
    Operator pi = parity_plus(spec);
    CHECK(std::abs(std::real(cat.amplitudes.dot(pi.matrix * cat.amplitudes)) - 1.0) < 1e-6);
  }

  SUBCASE("residuals shrink monotonically with the cutoff") {
    double prev_c1 = 1e9, prev_c2 = 1e9;
    for (int cutoff : {8, 10, 12, 14, 16}) {
      HilbertSpec s = HilbertSpec::field(cutoff, cutoff);
      StateVector cat = cat_state(1.0, s);
      auto [c1, c2] = jump_operators(1.0, s);
      double r1 = (c1.matrix * cat.amplitudes).norm();
      double r2 = (c2.matrix * cat.amplitudes).norm();
      CHECK(r1 < prev_c1);
      CHECK(r2 < prev_c2);
      prev_c1 = r1;
      prev_c2 = r2;
    }
  }
}

TEST_CASE("dark subspace spans the branch products and their superpositions") {
  HilbertSpec spec = HilbertSpec::field(16, 16);
  auto [c1, c2] = jump_operators(1.0, spec);
  StateVector plus = product_coherent(1.0, 1.0, spec);
  StateVector minus = product_coherent(-1.0, -1.0, spec);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> angle(0.0, 6.28);
  for (int k = 0; k < 4; ++k) {
    double theta = angle(rng), phase = angle(rng);
    CVector v = std::cos(theta) * plus.amplitudes +
                std::sin(theta) * std::exp(Complex(0, phase)) * minus.amplitudes;
    v /= v.norm();
    CHECK((c1.matrix * v).norm() < 1e-6);
    CHECK((c2.matrix * v).norm() < 1e-6);
  }
}

TEST_CASE("jump operators") {
  HilbertSpec spec = HilbertSpec::field(6, 6);
  auto [c1, c2] = jump_operators(1.0, spec);

  CVector vac = vacuum_state(spec).amplitudes;
  CVector c2vac = c2.matrix * vac;
  CHECK((c2vac + 2.0 * vac).norm() < 1e-14);  // C2|0,0> = -2 alpha^2 |0,0>

  auto [cm, cp] = collective_modes(spec);
  CHECK((c1.matrix - cm.matrix).norm() == doctest::Approx(0.0));

  // C2 = c+^2 - c-^2 - 2 alpha^2 on the truncation interior
  CMatrix decomposed = cp.matrix * cp.matrix - cm.matrix * cm.matrix;
  decomposed.diagonal().array() -= 2.0;
  CMatrix diff = c2.matrix - decomposed;
  for (int na = 0; na <= 4; ++na)
    for (int nb = 0; nb <= 4; ++nb) {
      CVector e = basis_state(spec, na, nb).amplitudes;
      CHECK((diff * e).norm() < 1e-12);
    }
}

TEST_CASE("parity operator") {
  HilbertSpec spec = HilbertSpec::field(6, 6);
  Operator pi = parity_plus(spec);

  CVector vac = vacuum_state(spec).amplitudes;
  CHECK((pi.matrix * vac - vac).norm() < 1e-10);

  auto [cm, cp] = collective_modes(spec);
  CVector one_plus = cp.matrix.adjoint() * vac;
  CHECK((pi.matrix * one_plus + one_plus).norm() < 1e-10);

  CMatrix sq = pi.matrix * pi.matrix;
  CHECK((sq - CMatrix::Identity(spec.dim(), spec.dim())).cwiseAbs().maxCoeff() < 1e-8);

  // commutes with the jump operators on low-photon states
  auto [c1, c2] = jump_operators(1.0, spec);
  CMatrix k1 = pi.matrix * c1.matrix - c1.matrix * pi.matrix;
  CMatrix k2 = pi.matrix * c2.matrix - c2.matrix * pi.matrix;
  for (int na = 0; na <= 6; ++na)
    for (int nb = 0; nb <= 6; ++nb) {
      if (na + nb > 4) continue;  // total photons <= cutoff - 2
      CVector e = basis_state(spec, na, nb).amplitudes;
      CHECK((k1 * e).norm() < 1e-8);
      CHECK((k2 * e).norm() < 1e-8);
    }
}

TEST_CASE("hermiticity bookkeeping") {
  CMatrix m = CMatrix::Random(4, 4);
  CHECK_THROWS_AS(Operator(HilbertSpec::single_mode(3), m, true), std::invalid_argument);
  CHECK_NOTHROW(Operator(HilbertSpec::single_mode(3), (m + m.adjoint()).eval(), true));
}
