#include "catbeam/fock.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <iostream>

namespace catbeam {

namespace detail {
void require(bool cond, const char* what) {
  if (!cond) throw std::invalid_argument(what);
}
}  // namespace detail

using detail::require;

// ---------------------------------------------------------------------------
// HilbertSpec

HilbertSpec HilbertSpec::field(int cutoff_a, int cutoff_b) {
  require(cutoff_a >= 1 && cutoff_b >= 1, "HilbertSpec::field: cutoffs must be >= 1");
  return {cutoff_a, cutoff_b, {}};
}

HilbertSpec HilbertSpec::single_mode(int cutoff) {
  require(cutoff >= 1, "HilbertSpec::single_mode: cutoff must be >= 1");
  return {cutoff, 0, {}};
}

HilbertSpec HilbertSpec::with_atom(int cutoff_a, int cutoff_b, std::vector<std::string> levels) {
  require(cutoff_a >= 1 && cutoff_b >= 1, "HilbertSpec::with_atom: cutoffs must be >= 1");
  require(!levels.empty(), "HilbertSpec::with_atom: empty level list");
  return {cutoff_a, cutoff_b, std::move(levels)};
}

int HilbertSpec::slot_dim(Slot s) const {
  switch (s) {
    case Slot::ModeA: return dim_a();
    case Slot::ModeB: return dim_b();
    case Slot::Atom: return dim_atom();
  }
  return 0;
}

int HilbertSpec::level_index(std::string_view label) const {
  for (std::size_t i = 0; i < atom_levels.size(); ++i)
    if (atom_levels[i] == label) return static_cast<int>(i);
  throw std::invalid_argument("HilbertSpec: unknown atom level '" + std::string(label) + "'");
}

int HilbertSpec::index(int n_a, int n_b, int level) const {
  require(n_a >= 0 && n_a <= cutoff_a && n_b >= 0 && n_b <= cutoff_b &&
              level >= 0 && level < dim_atom(),
          "HilbertSpec::index: out of range");
  return (n_a * dim_b() + n_b) * dim_atom() + level;
}

// ---------------------------------------------------------------------------
// Tagged value types

Operator::Operator(HilbertSpec s, CMatrix m, bool expect_hermitian)
    : space(std::move(s)), matrix(std::move(m)) {
  require(matrix.rows() == matrix.cols(), "Operator: matrix must be square");
  require(matrix.rows() == space.dim(), "Operator: matrix dimension does not match space");
  if (expect_hermitian) {
    double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
    double dev = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
    if (dev > 1e-12 * scale)
      throw std::invalid_argument("Operator: expected Hermitian matrix, deviation " +
                                  std::to_string(dev));
  }
}

StateVector::StateVector(HilbertSpec s, CVector v) : space(std::move(s)), amplitudes(std::move(v)) {
  require(amplitudes.size() == space.dim(), "StateVector: dimension does not match space");
}

void StateVector::require_normalized() const {
  if (std::abs(norm() - 1.0) > 1e-10)
    throw NumericError("StateVector: norm deviates from 1 by " + std::to_string(norm() - 1.0));
}

DensityMatrix::DensityMatrix(HilbertSpec s, CMatrix m) : space(std::move(s)), matrix(std::move(m)) {
  require(matrix.rows() == matrix.cols() && matrix.rows() == space.dim(),
          "DensityMatrix: matrix dimension does not match space");
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
  return {psi.space, psi.amplitudes * psi.amplitudes.adjoint()};
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (matrix + matrix.adjoint()),
                                            Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void DensityMatrix::validate() const {
  if (hermiticity_error() > 1e-10) throw NumericError("DensityMatrix: not Hermitian");
  if (trace_error() > 1e-8) throw NumericError("DensityMatrix: trace deviates from 1");
  if (min_eigenvalue() < -1e-8) throw NumericError("DensityMatrix: negative eigenvalue");
}

// ---------------------------------------------------------------------------
// Mode operators and embeddings

Operator annihilation_op(int cutoff) {
  require(cutoff >= 1, "annihilation_op: cutoff must be >= 1");
  CMatrix a = CMatrix::Zero(cutoff + 1, cutoff + 1);
  for (int n = 1; n <= cutoff; ++n) a(n - 1, n) = std::sqrt(double(n));
  return {HilbertSpec::single_mode(cutoff), std::move(a)};
}

Operator number_op(int cutoff) {
  require(cutoff >= 1, "number_op: cutoff must be >= 1");
  CMatrix n = CMatrix::Zero(cutoff + 1, cutoff + 1);
  for (int k = 0; k <= cutoff; ++k) n(k, k) = double(k);
  return {HilbertSpec::single_mode(cutoff), std::move(n), true};
}

Operator embed(const Operator& op, Slot target_slot, const HilbertSpec& spec) {
  require(op.dim() == spec.slot_dim(target_slot),
          "embed: operator dimension does not match target slot");
  const CMatrix ia = CMatrix::Identity(spec.dim_a(), spec.dim_a());
  const CMatrix ib = CMatrix::Identity(spec.dim_b(), spec.dim_b());
  const CMatrix it = CMatrix::Identity(spec.dim_atom(), spec.dim_atom());
  CMatrix out;
  switch (target_slot) {
    case Slot::ModeA:
      out = Eigen::kroneckerProduct(op.matrix, Eigen::kroneckerProduct(ib, it).eval()).eval();
      break;
    case Slot::ModeB:
      out = Eigen::kroneckerProduct(ia, Eigen::kroneckerProduct(op.matrix, it).eval()).eval();
      break;
    case Slot::Atom:
      out = Eigen::kroneckerProduct(Eigen::kroneckerProduct(ia, ib).eval(), op.matrix).eval();
      break;
  }
  return {spec, std::move(out)};
}

std::pair<Operator, Operator> collective_modes(const HilbertSpec& spec) {
  require(spec.has_both_modes(), "collective_modes: spec must have both field modes");
  Operator a = embed(annihilation_op(spec.cutoff_a), Slot::ModeA, spec);
  Operator b = embed(annihilation_op(spec.cutoff_b), Slot::ModeB, spec);
  const double s = 1.0 / std::sqrt(2.0);
  Operator c_minus{spec, s * (a.matrix - b.matrix)};
  Operator c_plus{spec, s * (a.matrix + b.matrix)};
  return {std::move(c_minus), std::move(c_plus)};
}

// ---------------------------------------------------------------------------
// States

namespace {

// Raw coherent amplitudes e^{-|a|^2/2} a^n / sqrt(n!) up to the cutoff;
// returns the truncated tail weight.
double coherent_amplitudes(Complex alpha, int cutoff, CVector& out) {
  out.resize(cutoff + 1);
  Complex c = std::exp(-0.5 * std::norm(alpha));
  double weight = 0.0;
  for (int n = 0; n <= cutoff; ++n) {
    out(n) = c;
    weight += std::norm(c);
    c *= alpha / std::sqrt(double(n + 1));
  }
  return std::max(0.0, 1.0 - weight);
}

void check_tail(Complex alpha, int cutoff, double tail, double tol, const char* what) {
  if (tol < 0.0) {
    // default rule of thumb: |alpha|^2 <= cutoff/4
    if (std::norm(alpha) <= 0.25 * cutoff) return;
    throw TruncationError(std::string(what) + ": |alpha|^2 = " + std::to_string(std::norm(alpha)) +
                          " exceeds cutoff/4 = " + std::to_string(0.25 * cutoff) +
                          " (tail weight " + std::to_string(tail) + ")");
  }
  if (tail > tol)
    throw TruncationError(std::string(what) + ": truncated tail weight " + std::to_string(tail) +
                          " exceeds tolerance " + std::to_string(tol));
}

}  // namespace

StateVector coherent_state(Complex alpha, int cutoff, double tail_tol, double* raw_tail) {
  require(cutoff >= 1, "coherent_state: cutoff must be >= 1");
  CVector v;
  double tail = coherent_amplitudes(alpha, cutoff, v);
  if (raw_tail) *raw_tail = tail;
  check_tail(alpha, cutoff, tail, tail_tol, "coherent_state");
  v /= v.norm();
  return {HilbertSpec::single_mode(cutoff), std::move(v)};
}

StateVector product_coherent(Complex alpha_a, Complex alpha_b, const HilbertSpec& spec,
                             double tail_tol) {
  require(spec.has_both_modes() && !spec.has_atom(),
          "product_coherent: expected a field-only spec");
  CVector va, vb;
  check_tail(alpha_a, spec.cutoff_a, coherent_amplitudes(alpha_a, spec.cutoff_a, va), tail_tol,
             "product_coherent(A)");
  check_tail(alpha_b, spec.cutoff_b, coherent_amplitudes(alpha_b, spec.cutoff_b, vb), tail_tol,
             "product_coherent(B)");
  CVector v(spec.dim());
  for (int i = 0; i < spec.dim_a(); ++i)
    for (int j = 0; j < spec.dim_b(); ++j) v(i * spec.dim_b() + j) = va(i) * vb(j);
  v /= v.norm();
  return {spec, std::move(v)};
}

namespace {

StateVector cat_combination(Complex alpha, const HilbertSpec& spec, double tail_tol, double sign,
                            const char* what) {
  require(spec.has_both_modes() && !spec.has_atom(), "cat_state: expected a field-only spec");
  CVector pa, pb, ma, mb;
  check_tail(alpha, spec.cutoff_a, coherent_amplitudes(alpha, spec.cutoff_a, pa), tail_tol, what);
  check_tail(alpha, spec.cutoff_b, coherent_amplitudes(alpha, spec.cutoff_b, pb), tail_tol, what);
  check_tail(-alpha, spec.cutoff_a, coherent_amplitudes(-alpha, spec.cutoff_a, ma), tail_tol, what);
  check_tail(-alpha, spec.cutoff_b, coherent_amplitudes(-alpha, spec.cutoff_b, mb), tail_tol, what);
  CVector v(spec.dim());
  for (int i = 0; i < spec.dim_a(); ++i)
    for (int j = 0; j < spec.dim_b(); ++j)
      v(i * spec.dim_b() + j) = pa(i) * pb(j) + sign * ma(i) * mb(j);
  double n = v.norm();
  if (n < 1e-12)
    throw NumericError(std::string(what) + ": combination is degenerate (norm ~ 0)");
  v /= n;
  return {spec, std::move(v)};
}

}  // namespace

StateVector cat_state(Complex alpha, const HilbertSpec& spec, double tail_tol) {
  return cat_combination(alpha, spec, tail_tol, +1.0, "cat_state");
}

StateVector odd_cat_state(Complex alpha, const HilbertSpec& spec, double tail_tol) {
  return cat_combination(alpha, spec, tail_tol, -1.0, "odd_cat_state");
}

// ---------------------------------------------------------------------------
// Jump operators and parity

std::pair<Operator, Operator> jump_operators(Complex alpha, const HilbertSpec& spec) {
  require(spec.has_both_modes(), "jump_operators: spec must have both field modes");
  auto [c_minus, c_plus] = collective_modes(spec);
  Operator a = embed(annihilation_op(spec.cutoff_a), Slot::ModeA, spec);
  Operator b = embed(annihilation_op(spec.cutoff_b), Slot::ModeB, spec);
  CMatrix c2 = 2.0 * (a.matrix * b.matrix);
  c2.diagonal().array() -= 2.0 * alpha * alpha;
  return {std::move(c_minus), Operator{spec, std::move(c2)}};
}

Operator parity_plus(const HilbertSpec& spec, double* max_integer_deviation) {
  require(spec.has_both_modes(), "parity_plus: spec must have both field modes");
  auto [c_minus, c_plus] = collective_modes(spec);
  CMatrix n_plus = c_plus.matrix.adjoint() * c_plus.matrix;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(n_plus);
  if (es.info() != Eigen::Success) throw NumericError("parity_plus: eigendecomposition failed");
  const int d = spec.dim();
  RVector phases(d);
  double max_dev = 0.0;
  for (int i = 0; i < d; ++i) {
    double lam = es.eigenvalues()(i);
    long rounded = std::lround(lam);
    max_dev = std::max(max_dev, std::abs(lam - double(rounded)));
    phases(i) = (rounded % 2 == 0) ? 1.0 : -1.0;
  }
  if (max_integer_deviation) *max_integer_deviation = max_dev;
  if (max_dev > 1e-6)
    std::cerr << "parity_plus: N+ eigenvalue deviates from integer by " << max_dev
              << " (truncation edge artifact)\n";
  CMatrix pi = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  pi = 0.5 * (pi + pi.adjoint()).eval();
  return {spec, std::move(pi), true};
}

// ---------------------------------------------------------------------------
// Convenience

StateVector vacuum_state(const HilbertSpec& spec) { return basis_state(spec, 0, 0, 0); }

StateVector basis_state(const HilbertSpec& spec, int n_a, int n_b, int level) {
  CVector v = CVector::Zero(spec.dim());
  v(spec.index(n_a, n_b, level)) = 1.0;
  return {spec, std::move(v)};
}

Operator identity_op(const HilbertSpec& spec) {
  return {spec, CMatrix::Identity(spec.dim(), spec.dim()), true};
}

}  // namespace catbeam
