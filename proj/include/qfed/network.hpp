// Dissipative quantum neural network: layer transition channels, their
// adjoints, fidelity / MSE costs and the closed-form Hermitian update
// matrices, plus the derivative and Pauli-coefficient diagnostics.
//
// A network with widths [m_0, m_1, ..., m_L] has L channels. Channel l maps an
// m_{l-1}-qubit state to an m_l-qubit state: append |0..0> ancillas for layer
// l, apply the layer's perceptron unitaries, trace out layer l-1. Perceptron j
// of layer l acts on all layer-(l-1) qubits plus the j-th layer-l qubit;
// perceptron 0 is applied to the state first.

#pragma once

#include <span>
#include <vector>

#include "qfed/linalg.hpp"

namespace qfed {

/// Qubit count per layer, input through output.
struct Architecture {
  std::vector<int> widths;

  int num_channels() const { return static_cast<int>(widths.size()) - 1; }
  int input_width() const { return widths.front(); }
  int output_width() const { return widths.back(); }

  /// Widths >= 1, at least two layers, every m_{l-1}+m_l within the qubit
  /// guard. Throws std::invalid_argument.
  void validate() const;

  bool operator==(const Architecture&) const = default;
};

/// The trainable model: one unitary of dimension 2^{m_{l-1}+1} per perceptron.
/// unitaries[l-1][j] belongs to layer l, perceptron j (j 0-based).
struct NetworkParams {
  Architecture arch;
  std::vector<std::vector<Matrix>> unitaries;

  /// Shape consistency plus ||U†U - I||_F < 1e-8 for every perceptron.
  void validate() const;
};

/// Fresh model with independent Haar-random perceptron unitaries, drawn in
/// (layer, perceptron) order.
NetworkParams random_network(const Architecture& arch, Rng& rng);

struct TrainingPair {
  PureState input;
  PureState target;
};

/// States stored by a feedforward pass: layer_states[l] is the layer-l output,
/// with layer_states[0] the input projector.
struct ForwardTrace {
  std::vector<DensityMatrix> layer_states;
};

/// Hermitian update generators, indexed like NetworkParams::unitaries.
/// max_asymmetry records the largest ||K - K†||_F seen before the final
/// symmetrization (diagnostic; the stored matrices are symmetrized).
struct UpdateMatrices {
  std::vector<std::vector<Matrix>> mats;
  double max_asymmetry = 0.0;
};

/// One layer transition: rho_prev on m_{l-1} qubits -> output on m_l qubits.
/// `layer` is 1-based.
DensityMatrix layer_channel(const NetworkParams& params, int layer,
                            const DensityMatrix& rho_prev);

/// Applies every channel in order, storing each intermediate state.
ForwardTrace feedforward(const NetworkParams& params, const PureState& input);

/// Adjoint (trace-dual) of channel `layer`: the unique map F with
/// tr(E(rho) sigma) = tr(rho F(sigma)) for all rho. Input sigma lives on m_l
/// qubits, the result on m_{l-1} qubits.
Matrix adjoint_channel(const NetworkParams& params, int layer,
                       const Eigen::Ref<const Matrix>& sigma);

/// Back-propagated target projectors: result[l-1] is the layer-l sigma, with
/// result[L-1] the target projector itself.
std::vector<Matrix> backward_sigmas(const NetworkParams& params,
                                    const PureState& target);

/// Closed-form gradient-ascent generators over a batch:
///   K_j^l = eta * 2^{m_{l-1}} i / |batch| * sum_x tr_rest [A_x^{l,j}, B_x^{l,j}]
/// where A is the forward-conjugated input block, B the backward-conjugated
/// sigma block, and tr_rest keeps the input qubits plus layer-l qubit j.
UpdateMatrices update_matrices(const NetworkParams& params,
                               std::span<const TrainingPair> batch, double eta);

/// Derivative of the batch fidelity at s = 0 along U -> exp(isG)U for the
/// Hermitian direction set G (same indexing as UpdateMatrices).
double directional_derivative(const NetworkParams& params,
                              std::span<const TrainingPair> batch,
                              const UpdateMatrices& directions);

/// In-place ascent step U <- exp(i eps K) U for every perceptron.
void apply_update(NetworkParams& params, const UpdateMatrices& update,
                  double eps);

/// Mean output-vs-target fidelity, in [0, 1].
double cost_fidelity(const NetworkParams& params,
                     std::span<const TrainingPair> dataset);

/// Mean squared Frobenius distance between output state and target projector.
/// For pure outputs this equals 2 - 2 * fidelity per sample.
double cost_mse(const NetworkParams& params,
                std::span<const TrainingPair> dataset);

/// Pauli coefficients k_p = tr(K P_p) / 2^q over pauli_basis(q); real for
/// Hermitian K, and sum_p k_p P_p reconstructs K.
Eigen::VectorXd pauli_diagnostic(const Eigen::Ref<const Matrix>& k,
                                 int num_qubits);

/// Inverse of pauli_diagnostic: sum_p coeffs[p] * P_p.
Matrix pauli_reconstruct(const Eigen::Ref<const Eigen::VectorXd>& coeffs,
                         int num_qubits);

}  // namespace qfed
