// Dense complex linear algebra over multi-qubit spaces: tensor products,
// partial traces, Hermitian matrix exponentials, Haar sampling, operator
// embedding and Pauli bases. Everything here is a pure function of its
// arguments; RNG state is passed explicitly.
//
// Basis-index convention, fixed once and used everywhere:
//   * a layout lists qubits left to right; the leftmost qubit occupies the
//     most significant bit of the basis index,
//   * tensor(a, b) places a's qubits to the left of b's,
//   * layer spaces order previous-layer qubits first, current-layer second.

#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace qfed {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Rng = std::mt19937_64;

// Operators above kMaxQubits qubits are rejected up front, so a
// misconfigured architecture fails fast instead of exhausting memory.
inline constexpr int kMaxQubits = 10;
inline constexpr Eigen::Index kMaxDim = Eigen::Index{1} << kMaxQubits;

// Pauli strings grow as 4^q; anything past this guard is a configuration bug.
inline constexpr int kMaxPauliQubits = 5;

/// Number of qubits n with dim == 2^n; throws std::invalid_argument otherwise.
int qubit_count_for_dim(Eigen::Index dim);

/// Ordered list of qubit identifiers naming which tensor factor each index
/// position occupies. Position 0 is the leftmost (most significant) factor.
class QubitLayout {
 public:
  explicit QubitLayout(std::vector<int> ids);

  /// Layout with identifiers 0..count-1 in order.
  static QubitLayout range(int count);

  int num_qubits() const { return static_cast<int>(ids_.size()); }
  Eigen::Index dim() const { return Eigen::Index{1} << ids_.size(); }
  const std::vector<int>& ids() const { return ids_; }

  bool contains(int id) const;
  int position_of(int id) const;  // throws std::invalid_argument on unknown id

  /// Layout with the given identifiers removed, original order preserved.
  QubitLayout without(const std::vector<int>& removed) const;

 private:
  std::vector<int> ids_;
};

namespace detail {
void check_operator_dims(Eigen::Index rows, Eigen::Index cols);
}

/// Kronecker product: tensor(a, b)(i*rb + k, j*cb + l) = a(i, j) * b(k, l).
/// Throws std::length_error when the result exceeds the 2^10 guard.
template <typename DerivedA, typename DerivedB>
Matrix tensor(const Eigen::MatrixBase<DerivedA>& a,
              const Eigen::MatrixBase<DerivedB>& b) {
  detail::check_operator_dims(a.rows() * b.rows(), a.cols() * b.cols());
  return Eigen::kroneckerProduct(a, b);
}

/// Sums out the `traced` qubits of an operator on `layout`. The result acts on
/// the remaining qubits in layout order and has the same trace as the input.
Matrix partial_trace(const Eigen::Ref<const Matrix>& m,
                     const QubitLayout& layout,
                     const std::vector<int>& traced);

/// exp(i * scale * h) for Hermitian h, via eigendecomposition of the
/// symmetrized input (h + h†)/2. The result is unitary to 1e-10; inputs more
/// than 1e-8 from Hermitian are rejected.
Matrix matexp_hermitian(const Eigen::Ref<const Matrix>& h, double scale);

/// Haar-distributed unitary on num_qubits qubits: QR of a complex Ginibre
/// matrix with the R-diagonal phases folded back into Q. Deterministic for a
/// given generator state.
Matrix haar_unitary(int num_qubits, Rng& rng);

/// ab - ba. Dimensions must agree.
Matrix commutator(const Eigen::Ref<const Matrix>& a,
                  const Eigen::Ref<const Matrix>& b);

/// All 4^q Pauli strings on q qubits, identity included, ordered by base-4
/// digits {I, X, Y, Z} with the first qubit as the most significant digit.
/// tr(P_a P_b) = 2^q δ_ab.
std::vector<Matrix> pauli_basis(int num_qubits);

/// Lifts `op` (on 2^|targets| dims) into the full layout space, acting as op
/// on the target qubits in the given order and as identity elsewhere. Index
/// bits are routed directly; no permutation matrices are formed.
Matrix embed_on_qubits(const Eigen::Ref<const Matrix>& op,
                       const std::vector<int>& targets,
                       const QubitLayout& layout);

/// Unit-norm state of num_qubits qubits.
struct PureState {
  int num_qubits = 0;
  Vector amplitudes;

  void validate() const;  // size 2^n, squared norm within 1e-10 of 1
};

/// Uniformly random pure state (normalized complex Gaussian vector).
PureState haar_state(int num_qubits, Rng& rng);

/// Hermitian, PSD, trace-1 operator on num_qubits qubits.
struct DensityMatrix {
  int num_qubits = 0;
  Matrix matrix;

  static DensityMatrix from_pure(const PureState& psi);

  /// Hermitian within 1e-10 (Frobenius), trace within 1e-10 of 1,
  /// eigenvalues >= -1e-9. Throws std::runtime_error on violation.
  void validate() const;
};

}  // namespace qfed
