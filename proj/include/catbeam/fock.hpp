#pragma once

// Truncated Fock-space algebra: mode operators, embeddings, coherent and
// two-mode cat states, the engineered jump operators C1 = (a-b)/sqrt(2),
// C2 = 2(ab - alpha^2), and the collective-mode parity (-1)^(c+^dag c+).

#include "catbeam/types.hpp"

#include <utility>

namespace catbeam {

// Default truncation gate for coherent states: accept |alpha|^2 <= cutoff/4.
// Passing an explicit tolerance instead compares the truncated Poisson tail
// weight against it.
inline constexpr double kCoherentTailAuto = -1.0;

// Bosonic lowering operator on a single truncated mode, <n-1|a|n> = sqrt(n).
Operator annihilation_op(int cutoff);

// Photon number operator on a single truncated mode.
Operator number_op(int cutoff);

// op (x) identity on all other slots, honoring the fixed A (x) B (x) atom
// ordering. Only the operator's dimension is checked against the slot.
Operator embed(const Operator& op, Slot target_slot, const HilbertSpec& spec);

// c_minus = (a-b)/sqrt(2), c_plus = (a+b)/sqrt(2) embedded on spec.
std::pair<Operator, Operator> collective_modes(const HilbertSpec& spec);

// Truncated coherent state, renormalized; *raw_tail receives the truncated
// Poisson tail weight. Throws TruncationError above tail_tol.
StateVector coherent_state(Complex alpha, int cutoff,
                           double tail_tol = kCoherentTailAuto,
                           double* raw_tail = nullptr);

// Two-mode product coherent state |alpha_a, alpha_b> on a field spec.
StateVector product_coherent(Complex alpha_a, Complex alpha_b, const HilbertSpec& spec,
                             double tail_tol = kCoherentTailAuto);

// Even two-mode cat (|alpha,alpha> + |-alpha,-alpha>)/N, normalized on the
// truncated space.
StateVector cat_state(Complex alpha, const HilbertSpec& spec,
                      double tail_tol = kCoherentTailAuto);

// Odd combination (|alpha,alpha> - |-alpha,-alpha>)/N'. Degenerate at alpha=0.
StateVector odd_cat_state(Complex alpha, const HilbertSpec& spec,
                          double tail_tol = kCoherentTailAuto);

// Jump operators whose joint kernel is spanned by the +-alpha branch states:
// C1 = (a-b)/sqrt(2), C2 = 2(ab - alpha^2).
std::pair<Operator, Operator> jump_operators(Complex alpha, const HilbertSpec& spec);

// Parity of the symmetric collective mode, (-1)^(c+^dag c+), built by
// diagonalizing N+ = c+^dag c+ and rounding its eigenvalues to integers.
// Near the truncation edge N+ has non-integer eigenvalues; the largest
// deviation is reported through *max_integer_deviation and a one-line warning
// is emitted on stderr when it exceeds 1e-6 (expected for realistic cutoffs).
// The result is exactly Hermitian and unitary by construction.
Operator parity_plus(const HilbertSpec& spec, double* max_integer_deviation = nullptr);

// Convenience states.
StateVector vacuum_state(const HilbertSpec& spec);
StateVector basis_state(const HilbertSpec& spec, int n_a, int n_b, int level = 0);

Operator identity_op(const HilbertSpec& spec);

}  // namespace catbeam
