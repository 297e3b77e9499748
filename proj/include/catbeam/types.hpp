#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace catbeam {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

// A Lindblad increment: same shape as a density matrix but traceless in
// general, so it gets its own alias rather than the DensityMatrix type.
using DensityIncrement = CMatrix;

struct TruncationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Slot { ModeA, ModeB, Atom };

// Truncated tensor-product space of two cavity modes and an optional atom.
//
// Basis ordering is fixed: mode A is the slowest index, then mode B, then the
// atom, i.e. composite index = (n_a * dim_b + n_b) * dim_atom + level.
// A cutoff of 0 freezes that mode to a one-dimensional (vacuum) slot; it is
// used internally for single-mode operators and states.
struct HilbertSpec {
  int cutoff_a = 16;
  int cutoff_b = 16;
  std::vector<std::string> atom_levels;  // empty for field-only spaces

  static HilbertSpec field(int cutoff_a, int cutoff_b);
  static HilbertSpec single_mode(int cutoff);
  static HilbertSpec with_atom(int cutoff_a, int cutoff_b, std::vector<std::string> levels);

  int dim_a() const { return cutoff_a + 1; }
  int dim_b() const { return cutoff_b + 1; }
  int dim_atom() const { return atom_levels.empty() ? 1 : static_cast<int>(atom_levels.size()); }
  int dim() const { return dim_a() * dim_b() * dim_atom(); }
  bool has_atom() const { return !atom_levels.empty(); }
  bool has_both_modes() const { return cutoff_a >= 1 && cutoff_b >= 1; }

  int slot_dim(Slot s) const;
  int level_index(std::string_view label) const;  // throws if unknown
  // composite basis index for photon numbers (n_a, n_b) and atom level
  int index(int n_a, int n_b, int level = 0) const;

  friend bool operator==(const HilbertSpec&, const HilbertSpec&) = default;
};

// Dense operator tagged with the space it acts on.
struct Operator {
  HilbertSpec space;
  CMatrix matrix;

  Operator() = default;
  // expect_hermitian asserts max|M - M^dag| <= 1e-12 * max(1, max|M|).
  Operator(HilbertSpec s, CMatrix m, bool expect_hermitian = false);

  int dim() const { return static_cast<int>(matrix.rows()); }
  Operator adjoint() const { return {space, matrix.adjoint()}; }
};

struct StateVector {
  HilbertSpec space;
  CVector amplitudes;

  StateVector() = default;
  StateVector(HilbertSpec s, CVector v);

  double norm() const { return amplitudes.norm(); }
  // asserts |norm - 1| <= 1e-10 for states declared normalized
  void require_normalized() const;
};

struct DensityMatrix {
  HilbertSpec space;
  CMatrix matrix;

  DensityMatrix() = default;
  DensityMatrix(HilbertSpec s, CMatrix m);

  static DensityMatrix pure(const StateVector& psi);

  double trace_error() const { return std::abs(matrix.trace() - Complex(1.0)); }
  double hermiticity_error() const { return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff(); }
  double min_eigenvalue() const;  // on demand; Hermitian part
  // Hermitian within 1e-10, trace within 1e-8 of 1, min eigenvalue >= -1e-8.
  void validate() const;
};

namespace detail {
void require(bool cond, const char* what);
}

}  // namespace catbeam
