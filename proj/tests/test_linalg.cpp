#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qfed/linalg.hpp"

using namespace qfed;

namespace {

Matrix random_matrix(Eigen::Index dim, Rng& rng) {
  std::normal_distribution<double> gauss;
  Matrix m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) m(r, c) = Complex(gauss(rng), gauss(rng));
  }
  return m;
}

Matrix random_hermitian(Eigen::Index dim, Rng& rng) {
  const Matrix m = random_matrix(dim, rng);
  return 0.5 * (m + m.adjoint());
}

Matrix random_density(Eigen::Index dim, Rng& rng) {
  const Matrix g = random_matrix(dim, rng);
  const Matrix psd = g * g.adjoint();
  return psd / psd.trace();
}

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

}  // namespace

TEST_CASE("tensor: identity case and hand-expanded Kronecker product") {
  const Matrix i2 = Matrix::Identity(2, 2);
  CHECK((tensor(i2, i2) - Matrix::Identity(4, 4)).norm() == doctest::Approx(0.0));

  Matrix ket0(2, 2);
  ket0 << 1, 0, 0, 0;
  const Matrix out = tensor(pauli_z(), ket0);
  // sigma_z (x) |0><0| = diag(1, 0, -1, 0), expanded by hand
  Matrix expected = Matrix::Zero(4, 4);
  expected(0, 0) = 1.0;
  expected(2, 2) = -1.0;
  CHECK((out - expected).norm() < 1e-15);
}

TEST_CASE("tensor: trace is multiplicative") {
  Rng rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix a = random_matrix(2, rng);
    const Matrix b = random_matrix(2, rng);
    CHECK(std::abs(tensor(a, b).trace() - a.trace() * b.trace()) < 1e-12);
  }
}

TEST_CASE("tensor: rejects results beyond the dimension guard") {
  const Matrix big = Matrix::Identity(64, 64);
  CHECK_THROWS_AS(tensor(big, big), std::length_error);
}

TEST_CASE("partial_trace: product states factorize") {
  Rng rng(11);
  for (int qubits_a = 1; qubits_a <= 2; ++qubits_a) {
    for (int qubits_b = 1; qubits_b <= 2; ++qubits_b) {
      const Matrix rho = random_density(Eigen::Index{1} << qubits_a, rng);
      const Matrix sigma = random_density(Eigen::Index{1} << qubits_b, rng);
      const QubitLayout layout = QubitLayout::range(qubits_a + qubits_b);
      std::vector<int> traced;
      for (int q = qubits_a; q < qubits_a + qubits_b; ++q) traced.push_back(q);
      const Matrix reduced = partial_trace(tensor(rho, sigma), layout, traced);
      CHECK((reduced - rho).norm() < 1e-12);
    }
  }
}

TEST_CASE("partial_trace: scaling by tr(sigma) for non-normalized factors") {
  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix rho = random_matrix(4, rng);
    const Matrix sigma = random_matrix(4, rng);
    const QubitLayout layout = QubitLayout::range(4);
    const Matrix reduced = partial_trace(tensor(rho, sigma), layout, {2, 3});
    CHECK((reduced - rho * sigma.trace()).norm() < 1e-12);
  }
}

TEST_CASE("partial_trace: tracing everything yields the scalar trace") {
  Rng rng(13);
  const Matrix m = random_matrix(8, rng);
  const Matrix reduced = partial_trace(m, QubitLayout::range(3), {0, 1, 2});
  REQUIRE(reduced.rows() == 1);
  CHECK(std::abs(reduced(0, 0) - m.trace()) < 1e-12);
}

TEST_CASE("partial_trace: Bell state reduces to the maximally mixed state") {
  Vector bell(4);
  bell << M_SQRT1_2, 0, 0, M_SQRT1_2;  // (|00> + |11>) / sqrt(2)
  const Matrix rho = bell * bell.adjoint();
  const Matrix half_identity = 0.5 * Matrix::Identity(2, 2);
  for (int traced : {0, 1}) {
    const Matrix reduced = partial_trace(rho, QubitLayout::range(2), {traced});
    CHECK((reduced - half_identity).norm() < 1e-14);
  }
}

TEST_CASE("partial_trace: preserves the trace for any subset") {
  Rng rng(14);
  const Matrix m = random_matrix(16, rng);
  const QubitLayout layout = QubitLayout::range(4);
  const std::vector<std::vector<int>> subsets = {{0}, {3}, {1, 2}, {0, 3}, {0, 1, 2}};
  for (const auto& subset : subsets) {
    CHECK(std::abs(partial_trace(m, layout, subset).trace() - m.trace()) < 1e-12);
  }
}

TEST_CASE("partial_trace: unknown qubit id is rejected") {
  const Matrix m = Matrix::Identity(4, 4);
  CHECK_THROWS_AS(partial_trace(m, QubitLayout::range(2), {5}), std::invalid_argument);
}

TEST_CASE("matexp_hermitian: zero matrix maps to identity") {
  const Matrix zero = Matrix::Zero(4, 4);
  CHECK((matexp_hermitian(zero, 0.3) - Matrix::Identity(4, 4)).norm() < 1e-14);
}

TEST_CASE("matexp_hermitian: diagonal exponential of sigma_z at pi") {
  const Matrix u = matexp_hermitian(pauli_z(), M_PI);
  CHECK((u + Matrix::Identity(2, 2)).norm() < 1e-12);  // exp(i pi sigma_z) = -I
}

TEST_CASE("matexp_hermitian: outputs are unitary and invertible by sign flip") {
  Rng rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix h = random_hermitian(8, rng);
    const Matrix u = matexp_hermitian(h, 0.01);
    CHECK((u.adjoint() * u - Matrix::Identity(8, 8)).norm() < 1e-10);
    CHECK((u * matexp_hermitian(h, -0.01) - Matrix::Identity(8, 8)).norm() < 1e-10);
  }
}

TEST_CASE("matexp_hermitian: rejects clearly non-Hermitian input") {
  Matrix skew(2, 2);
  skew << 0, 1, -1, 0;
  CHECK_THROWS_AS(matexp_hermitian(skew, 1.0), std::runtime_error);
}

TEST_CASE("haar_unitary: unitarity, determinism, first-entry moment") {
  Rng rng(1234);
  for (int q = 1; q <= 3; ++q) {
    const Matrix u = haar_unitary(q, rng);
    const Eigen::Index dim = Eigen::Index{1} << q;
    CHECK((u.adjoint() * u - Matrix::Identity(dim, dim)).norm() < 1e-10);
  }

  Rng a(99), b(99);
  const Matrix ua = haar_unitary(2, a);
  const Matrix ub = haar_unitary(2, b);
  CHECK(ua == ub);  // bit-identical for identical seeds

  // Haar moment: E|U_00|^2 = 1/2 for one qubit.
  Rng moments(5);
  double mean = 0.0;
  const int samples = 10000;
  for (int s = 0; s < samples; ++s) {
    mean += std::norm(haar_unitary(1, moments)(0, 0));
  }
  mean /= samples;
  CHECK(std::abs(mean - 0.5) < 0.02);
}

TEST_CASE("haar_state: normalization, determinism, amplitude moment") {
  Rng rng(21);
  const PureState psi = haar_state(3, rng);
  CHECK(std::abs(psi.amplitudes.norm() - 1.0) < 1e-12);
  psi.validate();

  Rng a(77), b(77);
  CHECK(haar_state(2, a).amplitudes == haar_state(2, b).amplitudes);

  Rng moments(6);
  double mean = 0.0;
  const int samples = 10000;
  for (int s = 0; s < samples; ++s) {
    mean += std::norm(haar_state(1, moments).amplitudes[0]);
  }
  mean /= samples;
  CHECK(std::abs(mean - 0.5) < 0.02);
}

TEST_CASE("embed_on_qubits: identity embeds to identity") {
  const QubitLayout layout = QubitLayout::range(3);
  const Matrix embedded = embed_on_qubits(Matrix::Identity(4, 4), {0, 2}, layout);
  CHECK((embedded - Matrix::Identity(8, 8)).norm() == doctest::Approx(0.0));
}

TEST_CASE("embed_on_qubits: bit flip on the second qubit maps |00> to |01>") {
  const QubitLayout layout = QubitLayout::range(2);
  const Matrix flip = embed_on_qubits(pauli_x(), {1}, layout);
  Vector ket00 = Vector::Zero(4);
  ket00[0] = 1.0;
  Vector ket01 = Vector::Zero(4);
  ket01[1] = 1.0;
  CHECK((flip * ket00 - ket01).norm() < 1e-15);
}

TEST_CASE("embed_on_qubits: contiguous leading targets match tensor with identity") {
  Rng rng(31);
  const Matrix op = random_matrix(4, rng);
  const QubitLayout layout = QubitLayout::range(3);
  const Matrix embedded = embed_on_qubits(op, {0, 1}, layout);
  CHECK((embedded - tensor(op, Matrix::Identity(2, 2))).norm() < 1e-14);
}

TEST_CASE("embed_on_qubits: composition commutes with embedding") {
  Rng rng(32);
  const Matrix a = random_matrix(4, rng);
  const Matrix b = random_matrix(4, rng);
  const QubitLayout layout = QubitLayout::range(4);
  const std::vector<int> targets = {1, 3};
  const Matrix lhs = embed_on_qubits(a * b, targets, layout);
  const Matrix rhs = embed_on_qubits(a, targets, layout) * embed_on_qubits(b, targets, layout);
  CHECK((lhs - rhs).norm() < 1e-12);
}

TEST_CASE("embed_on_qubits: dimension mismatch is rejected") {
  const QubitLayout layout = QubitLayout::range(3);
  CHECK_THROWS_AS(embed_on_qubits(Matrix::Identity(4, 4), {0}, layout),
                  std::invalid_argument);
}

TEST_CASE("commutator: basic identities") {
  Rng rng(41);
  const Matrix a = random_matrix(4, rng);
  CHECK(commutator(a, a).norm() < 1e-12);

  const Matrix expected = 2.0 * Complex(0, 1) * pauli_z();
  CHECK((commutator(pauli_x(), pauli_y()) - expected).norm() < 1e-15);

  const Matrix h1 = random_hermitian(4, rng);
  const Matrix h2 = random_hermitian(4, rng);
  const Matrix c = commutator(h1, h2);
  CHECK((c.adjoint() + c).norm() < 1e-12);  // anti-Hermitian

  CHECK_THROWS_AS(commutator(Matrix::Identity(2, 2), Matrix::Identity(4, 4)),
                  std::invalid_argument);
}

TEST_CASE("pauli_basis: single-qubit set, orthogonality, Hermiticity") {
  const auto basis = pauli_basis(1);
  REQUIRE(basis.size() == 4);
  CHECK((basis[0] - Matrix::Identity(2, 2)).norm() < 1e-15);
  CHECK((basis[1] - pauli_x()).norm() < 1e-15);
  CHECK((basis[2] - pauli_y()).norm() < 1e-15);
  CHECK((basis[3] - pauli_z()).norm() < 1e-15);

  const auto two = pauli_basis(2);
  REQUIRE(two.size() == 16);
  for (std::size_t a = 0; a < two.size(); ++a) {
    CHECK((two[a] - two[a].adjoint()).norm() < 1e-15);
    for (std::size_t b = 0; b < two.size(); ++b) {
      const double expected = a == b ? 4.0 : 0.0;
      CHECK(std::abs((two[a] * two[b]).trace() - Complex(expected, 0)) < 1e-12);
    }
  }

  CHECK_THROWS_AS(pauli_basis(6), std::length_error);
}

TEST_CASE("pauli_basis: completeness reconstructs random Hermitian operators") {
  Rng rng(51);
  const int qubits = 2;
  const Matrix x = random_hermitian(4, rng);
  const auto basis = pauli_basis(qubits);
  Matrix rebuilt = Matrix::Zero(4, 4);
  for (const Matrix& p : basis) rebuilt += (x * p).trace() * p;
  CHECK((rebuilt / 4.0 - x).norm() < 1e-10);
}

TEST_CASE("qubit_count_for_dim: inverse of the power-of-two map") {
  CHECK(qubit_count_for_dim(2) == 1);
  CHECK(qubit_count_for_dim(1024) == 10);
  CHECK(qubit_count_for_dim(1) == 0);
  CHECK_THROWS_AS(qubit_count_for_dim(12), std::invalid_argument);
  CHECK_THROWS_AS(qubit_count_for_dim(0), std::invalid_argument);
}

TEST_CASE("QubitLayout: uniqueness, lookup, removal") {
  CHECK_THROWS_AS(QubitLayout({0, 1, 1}), std::invalid_argument);
  const QubitLayout layout({4, 2, 7});
  CHECK(layout.position_of(2) == 1);
  CHECK_THROWS_AS(layout.position_of(9), std::invalid_argument);
  CHECK(layout.without({2}).ids() == std::vector<int>{4, 7});
}

TEST_CASE("DensityMatrix: validation flags broken invariants") {
  Rng rng(61);
  const Matrix rho = random_density(4, rng);
  DensityMatrix ok{2, rho};
  ok.validate();

  DensityMatrix bad_trace{2, 2.0 * rho};
  CHECK_THROWS_AS(bad_trace.validate(), std::runtime_error);

  Matrix not_psd = Matrix::Zero(2, 2);
  not_psd(0, 0) = 1.5;
  not_psd(1, 1) = -0.5;
  DensityMatrix negative{1, not_psd};
  CHECK_THROWS_AS(negative.validate(), std::runtime_error);
}
