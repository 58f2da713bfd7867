#include "qfed/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace qfed {

int qubit_count_for_dim(Eigen::Index dim) {
  if (dim < 1 || (dim & (dim - 1)) != 0) {
    throw std::invalid_argument("dimension " + std::to_string(dim) +
                                " is not a power of two");
  }
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  return n;
}

QubitLayout::QubitLayout(std::vector<int> ids) : ids_(std::move(ids)) {
  if (ids_.size() > static_cast<std::size_t>(kMaxQubits)) {
    throw std::length_error("layout exceeds " + std::to_string(kMaxQubits) +
                            " qubits");
  }
  std::vector<int> sorted = ids_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("layout identifiers must be unique");
  }
}

QubitLayout QubitLayout::range(int count) {
  std::vector<int> ids(static_cast<std::size_t>(count));
  std::iota(ids.begin(), ids.end(), 0);
  return QubitLayout(std::move(ids));
}

bool QubitLayout::contains(int id) const {
  return std::find(ids_.begin(), ids_.end(), id) != ids_.end();
}

int QubitLayout::position_of(int id) const {
  auto it = std::find(ids_.begin(), ids_.end(), id);
  if (it == ids_.end()) {
    throw std::invalid_argument("unknown qubit id " + std::to_string(id));
  }
  return static_cast<int>(it - ids_.begin());
}

QubitLayout QubitLayout::without(const std::vector<int>& removed) const {
  std::vector<int> kept;
  kept.reserve(ids_.size());
  for (int id : ids_) {
    if (std::find(removed.begin(), removed.end(), id) == removed.end()) {
      kept.push_back(id);
    }
  }
  return QubitLayout(std::move(kept));
}

namespace detail {

void check_operator_dims(Eigen::Index rows, Eigen::Index cols) {
  if (rows > kMaxDim || cols > kMaxDim) {
    throw std::length_error("operator dimension " +
                            std::to_string(std::max(rows, cols)) +
                            " exceeds the 2^" + std::to_string(kMaxQubits) +
                            " guard");
  }
}

// Spreads the bits of `packed` (MSB-first over `positions`) onto the matching
// bit positions of a full index over n qubits.
Eigen::Index scatter_bits(Eigen::Index packed, const std::vector<int>& positions,
                          int total_qubits) {
  Eigen::Index full = 0;
  const int count = static_cast<int>(positions.size());
  for (int i = 0; i < count; ++i) {
    if ((packed >> (count - 1 - i)) & 1) {
      full |= Eigen::Index{1} << (total_qubits - 1 - positions[i]);
    }
  }
  return full;
}

}  // namespace detail

Matrix partial_trace(const Eigen::Ref<const Matrix>& m,
                     const QubitLayout& layout,
                     const std::vector<int>& traced) {
  const int n = layout.num_qubits();
  if (m.rows() != m.cols() || m.rows() != layout.dim()) {
    throw std::invalid_argument("operator does not match layout dimension");
  }
  std::vector<int> traced_pos;
  traced_pos.reserve(traced.size());
  for (int id : traced) traced_pos.push_back(layout.position_of(id));
  std::sort(traced_pos.begin(), traced_pos.end());
  if (std::adjacent_find(traced_pos.begin(), traced_pos.end()) !=
      traced_pos.end()) {
    throw std::invalid_argument("traced qubit ids must be unique");
  }

  std::vector<int> kept_pos;
  for (int p = 0; p < n; ++p) {
    if (!std::binary_search(traced_pos.begin(), traced_pos.end(), p)) {
      kept_pos.push_back(p);
    }
  }
  const int nk = static_cast<int>(kept_pos.size());
  const int nt = static_cast<int>(traced_pos.size());
  const Eigen::Index dim_keep = Eigen::Index{1} << nk;
  const Eigen::Index dim_trace = Eigen::Index{1} << nt;

  std::vector<Eigen::Index> keep_idx(dim_keep), trace_idx(dim_trace);
  for (Eigen::Index x = 0; x < dim_keep; ++x) {
    keep_idx[x] = detail::scatter_bits(x, kept_pos, n);
  }
  for (Eigen::Index s = 0; s < dim_trace; ++s) {
    trace_idx[s] = detail::scatter_bits(s, traced_pos, n);
  }

  Matrix out = Matrix::Zero(dim_keep, dim_keep);
  for (Eigen::Index r = 0; r < dim_keep; ++r) {
    for (Eigen::Index c = 0; c < dim_keep; ++c) {
      Complex sum = 0.0;
      for (Eigen::Index s = 0; s < dim_trace; ++s) {
        sum += m(keep_idx[r] | trace_idx[s], keep_idx[c] | trace_idx[s]);
      }
      out(r, c) = sum;
    }
  }
  return out;
}

Matrix matexp_hermitian(const Eigen::Ref<const Matrix>& h, double scale) {
  if (h.rows() != h.cols()) {
    throw std::invalid_argument("matexp_hermitian requires a square matrix");
  }
  const double asym = (h - h.adjoint()).norm();
  if (asym > 1e-8) {
    throw std::runtime_error("matexp_hermitian: input deviates from Hermitian by " +
                             std::to_string(asym));
  }
  const Matrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("matexp_hermitian: eigendecomposition failed");
  }
  Vector phases(sym.rows());
  for (Eigen::Index k = 0; k < sym.rows(); ++k) {
    phases[k] = std::polar(1.0, scale * solver.eigenvalues()[k]);
  }
  Matrix result = solver.eigenvectors() * phases.asDiagonal() *
                  solver.eigenvectors().adjoint();
  const double defect =
      (result.adjoint() * result - Matrix::Identity(sym.rows(), sym.cols()))
          .norm();
  if (defect > 1e-10) {
    throw std::runtime_error("matexp_hermitian: result unitarity defect " +
                             std::to_string(defect));
  }
  return result;
}

Matrix haar_unitary(int num_qubits, Rng& rng) {
  if (num_qubits < 1 || num_qubits > kMaxQubits) {
    throw std::invalid_argument("haar_unitary: qubit count out of range");
  }
  const Eigen::Index dim = Eigen::Index{1} << num_qubits;
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix ginibre(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      ginibre(r, c) = Complex(re, im) * M_SQRT1_2;
    }
  }
  Eigen::HouseholderQR<Matrix> qr(ginibre);
  Matrix q = qr.householderQ();
  const Vector r_diag = qr.matrixQR().diagonal();
  for (Eigen::Index k = 0; k < dim; ++k) {
    const double mag = std::abs(r_diag[k]);
    if (mag > 0.0) q.col(k) *= r_diag[k] / mag;
  }
  return q;
}

Matrix commutator(const Eigen::Ref<const Matrix>& a,
                  const Eigen::Ref<const Matrix>& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    throw std::invalid_argument("commutator requires equal square dimensions");
  }
  return a * b - b * a;
}

std::vector<Matrix> pauli_basis(int num_qubits) {
  if (num_qubits < 1 || num_qubits > kMaxPauliQubits) {
    throw std::length_error("pauli_basis: qubit count out of range");
  }
  const Complex i(0.0, 1.0);
  std::vector<Matrix> single(4, Matrix(2, 2));
  single[0] << 1, 0, 0, 1;
  single[1] << 0, 1, 1, 0;
  single[2] << 0, -i, i, 0;
  single[3] << 1, 0, 0, -1;

  std::vector<Matrix> basis;
  basis.reserve(std::size_t{1} << (2 * num_qubits));
  const Eigen::Index count = Eigen::Index{1} << (2 * num_qubits);
  for (Eigen::Index p = 0; p < count; ++p) {
    Matrix m = Matrix::Ones(1, 1);
    for (int q = 0; q < num_qubits; ++q) {
      const int digit = static_cast<int>((p >> (2 * (num_qubits - 1 - q))) & 3);
      m = tensor(m, single[digit]);
    }
    basis.push_back(std::move(m));
  }
  return basis;
}

Matrix embed_on_qubits(const Eigen::Ref<const Matrix>& op,
                       const std::vector<int>& targets,
                       const QubitLayout& layout) {
  const int n = layout.num_qubits();
  const int t = static_cast<int>(targets.size());
  if (op.rows() != op.cols() || op.rows() != (Eigen::Index{1} << t)) {
    throw std::invalid_argument(
        "embed_on_qubits: operator dimension does not match target count");
  }
  std::vector<int> target_pos;
  target_pos.reserve(targets.size());
  for (int id : targets) target_pos.push_back(layout.position_of(id));
  std::vector<int> sorted = target_pos;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("embed_on_qubits: duplicate target qubit");
  }
  std::vector<int> rest_pos;
  for (int p = 0; p < n; ++p) {
    if (!std::binary_search(sorted.begin(), sorted.end(), p)) {
      rest_pos.push_back(p);
    }
  }

  const Eigen::Index dim_op = Eigen::Index{1} << t;
  const Eigen::Index dim_rest = Eigen::Index{1} << (n - t);
  std::vector<Eigen::Index> op_idx(dim_op), rest_idx(dim_rest);
  for (Eigen::Index a = 0; a < dim_op; ++a) {
    op_idx[a] = detail::scatter_bits(a, target_pos, n);
  }
  for (Eigen::Index r = 0; r < dim_rest; ++r) {
    rest_idx[r] = detail::scatter_bits(r, rest_pos, n);
  }

  Matrix full = Matrix::Zero(layout.dim(), layout.dim());
  for (Eigen::Index a = 0; a < dim_op; ++a) {
    for (Eigen::Index b = 0; b < dim_op; ++b) {
      const Complex v = op(a, b);
      if (v == Complex(0.0, 0.0)) continue;
      for (Eigen::Index r = 0; r < dim_rest; ++r) {
        full(op_idx[a] | rest_idx[r], op_idx[b] | rest_idx[r]) = v;
      }
    }
  }
  return full;
}

void PureState::validate() const {
  if (num_qubits < 1 || num_qubits > kMaxQubits) {
    throw std::runtime_error("pure state qubit count out of range");
  }
  if (amplitudes.size() != (Eigen::Index{1} << num_qubits)) {
    throw std::runtime_error("pure state amplitude count mismatch");
  }
  const double sq = amplitudes.squaredNorm();
  if (std::abs(sq - 1.0) > 1e-10) {
    throw std::runtime_error("pure state norm deviates from 1 by " +
                             std::to_string(std::abs(sq - 1.0)));
  }
}

PureState haar_state(int num_qubits, Rng& rng) {
  if (num_qubits < 1 || num_qubits > kMaxQubits) {
    throw std::invalid_argument("haar_state: qubit count out of range");
  }
  const Eigen::Index dim = Eigen::Index{1} << num_qubits;
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector amps(dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    amps[k] = Complex(re, im);
  }
  amps /= amps.norm();
  return PureState{num_qubits, std::move(amps)};
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
  return DensityMatrix{psi.num_qubits,
                       psi.amplitudes * psi.amplitudes.adjoint()};
}

void DensityMatrix::validate() const {
  if (matrix.rows() != matrix.cols() ||
      matrix.rows() != (Eigen::Index{1} << num_qubits)) {
    throw std::runtime_error("density matrix dimension mismatch");
  }
  const double herm = (matrix - matrix.adjoint()).norm();
  if (herm > 1e-10) {
    throw std::runtime_error("density matrix Hermiticity defect " +
                             std::to_string(herm));
  }
  const double tr_err = std::abs(matrix.trace() - Complex(1.0, 0.0));
  if (tr_err > 1e-10) {
    throw std::runtime_error("density matrix trace deviates from 1 by " +
                             std::to_string(tr_err));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (matrix + matrix.adjoint()),
                                               Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -1e-9) {
    throw std::runtime_error("density matrix has eigenvalue " +
                             std::to_string(solver.eigenvalues().minCoeff()));
  }
}

}  // namespace qfed
