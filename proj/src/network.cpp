#include "qfed/network.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace qfed {

void Architecture::validate() const {
  if (widths.size() < 2) {
    throw std::invalid_argument("architecture needs at least two layers");
  }
  for (int w : widths) {
    if (w < 1) throw std::invalid_argument("layer widths must be >= 1");
  }
  for (std::size_t l = 1; l < widths.size(); ++l) {
    const int span = widths[l - 1] + widths[l];
    if (span > kMaxQubits) {
      throw std::invalid_argument("layer transition on " + std::to_string(span) +
                                  " qubits exceeds the " +
                                  std::to_string(kMaxQubits) + "-qubit guard");
    }
  }
}

void NetworkParams::validate() const {
  arch.validate();
  if (unitaries.size() != static_cast<std::size_t>(arch.num_channels())) {
    throw std::runtime_error("network params: layer count mismatch");
  }
  for (int l = 1; l <= arch.num_channels(); ++l) {
    const auto& layer = unitaries[static_cast<std::size_t>(l) - 1];
    if (layer.size() != static_cast<std::size_t>(arch.widths[l])) {
      throw std::runtime_error("network params: perceptron count mismatch at layer " +
                               std::to_string(l));
    }
    const Eigen::Index dim = Eigen::Index{1} << (arch.widths[l - 1] + 1);
    for (std::size_t j = 0; j < layer.size(); ++j) {
      const Matrix& u = layer[j];
      if (u.rows() != dim || u.cols() != dim) {
        throw std::runtime_error("network params: unitary dimension mismatch at layer " +
                                 std::to_string(l) + ", perceptron " +
                                 std::to_string(j));
      }
      const double defect =
          (u.adjoint() * u - Matrix::Identity(dim, dim)).norm();
      if (defect > 1e-8) {
        throw std::runtime_error("perceptron unitary invariant violated at layer " +
                                 std::to_string(l) + ", perceptron " +
                                 std::to_string(j) + ": ||U†U - I||_F = " +
                                 std::to_string(defect));
      }
    }
  }
}

NetworkParams random_network(const Architecture& arch, Rng& rng) {
  arch.validate();
  NetworkParams params{arch, {}};
  params.unitaries.reserve(static_cast<std::size_t>(arch.num_channels()));
  for (int l = 1; l <= arch.num_channels(); ++l) {
    std::vector<Matrix> layer;
    layer.reserve(static_cast<std::size_t>(arch.widths[l]));
    for (int j = 0; j < arch.widths[l]; ++j) {
      layer.push_back(haar_unitary(arch.widths[l - 1] + 1, rng));
    }
    params.unitaries.push_back(std::move(layer));
  }
  return params;
}

namespace {

// Everything one layer transition needs: the combined (prev + cur)-qubit
// space, the layer ancilla projector, and the embedded perceptron unitaries.
struct LayerContext {
  int prev_width;
  int cur_width;
  QubitLayout layout;
  std::vector<int> prev_ids;
  std::vector<int> cur_ids;
  Matrix zero_block;         // |0..0><0..0| on the layer qubits
  std::vector<Matrix> u;     // perceptron unitaries lifted to the full space
  std::vector<Matrix> u_dag;
};

LayerContext make_layer_context(const NetworkParams& params, int layer) {
  const auto& widths = params.arch.widths;
  const int prev = widths[static_cast<std::size_t>(layer) - 1];
  const int cur = widths[static_cast<std::size_t>(layer)];
  LayerContext ctx{prev, cur, QubitLayout::range(prev + cur),
                   {},   {},  {},                             {}, {}};
  for (int p = 0; p < prev; ++p) ctx.prev_ids.push_back(p);
  for (int j = 0; j < cur; ++j) ctx.cur_ids.push_back(prev + j);
  const Eigen::Index dim_cur = Eigen::Index{1} << cur;
  ctx.zero_block = Matrix::Zero(dim_cur, dim_cur);
  ctx.zero_block(0, 0) = 1.0;
  ctx.u.reserve(static_cast<std::size_t>(cur));
  ctx.u_dag.reserve(static_cast<std::size_t>(cur));
  for (int j = 0; j < cur; ++j) {
    std::vector<int> targets = ctx.prev_ids;
    targets.push_back(prev + j);
    Matrix lifted = embed_on_qubits(
        params.unitaries[static_cast<std::size_t>(layer) - 1][static_cast<std::size_t>(j)],
        targets, ctx.layout);
    ctx.u_dag.push_back(lifted.adjoint());
    ctx.u.push_back(std::move(lifted));
  }
  return ctx;
}

void check_layer_index(const NetworkParams& params, int layer) {
  if (layer < 1 || layer > params.arch.num_channels()) {
    throw std::invalid_argument("layer index " + std::to_string(layer) +
                                " out of range");
  }
}

std::vector<LayerContext> make_all_contexts(const NetworkParams& params) {
  std::vector<LayerContext> ctx;
  ctx.reserve(static_cast<std::size_t>(params.arch.num_channels()));
  for (int l = 1; l <= params.arch.num_channels(); ++l) {
    ctx.push_back(make_layer_context(params, l));
  }
  return ctx;
}

void check_sample(const Architecture& arch, const TrainingPair& sample) {
  if (sample.input.num_qubits != arch.input_width() ||
      sample.target.num_qubits != arch.output_width()) {
    throw std::invalid_argument("training pair does not match architecture widths");
  }
}

// Shared walk behind update_matrices and directional_derivative. The
// ascending pass stores, per layer, the input block conjugated by perceptrons
// 0..j; the descending pass maintains the sigma block conjugated by
// perceptrons m_l-1..j+1, and hands the reduced commutator of the two to the
// sink for every (layer, perceptron). The sigma recursion reuses the same
// blocks, so forward trace, backward sigmas and commutators cost one sweep.
template <typename Sink>
void reduced_commutators(const std::vector<LayerContext>& ctx,
                         const TrainingPair& sample, Sink&& sink) {
  const int num_layers = static_cast<int>(ctx.size());
  std::vector<std::vector<Matrix>> forward(static_cast<std::size_t>(num_layers));

  Matrix rho = sample.input.amplitudes * sample.input.amplitudes.adjoint();
  for (int l = 1; l <= num_layers; ++l) {
    const auto& c = ctx[static_cast<std::size_t>(l) - 1];
    Matrix block = tensor(rho, c.zero_block);
    auto& chain = forward[static_cast<std::size_t>(l) - 1];
    chain.reserve(static_cast<std::size_t>(c.cur_width));
    for (int j = 0; j < c.cur_width; ++j) {
      block = c.u[static_cast<std::size_t>(j)] * block * c.u_dag[static_cast<std::size_t>(j)];
      chain.push_back(block);
    }
    if (l < num_layers) rho = partial_trace(block, c.layout, c.prev_ids);
  }

  Matrix sigma = sample.target.amplitudes * sample.target.amplitudes.adjoint();
  for (int l = num_layers; l >= 1; --l) {
    const auto& c = ctx[static_cast<std::size_t>(l) - 1];
    const Eigen::Index dim_prev = Eigen::Index{1} << c.prev_width;
    Matrix b = tensor(Matrix::Identity(dim_prev, dim_prev), sigma);
    for (int j = c.cur_width - 1; j >= 0; --j) {
      const Matrix m =
          commutator(forward[static_cast<std::size_t>(l) - 1][static_cast<std::size_t>(j)], b);
      std::vector<int> traced;
      traced.reserve(static_cast<std::size_t>(c.cur_width) - 1);
      for (int jj = 0; jj < c.cur_width; ++jj) {
        if (jj != j) traced.push_back(c.prev_width + jj);
      }
      sink(l, j, partial_trace(m, c.layout, traced));
      if (j > 0 || l > 1) {
        b = c.u_dag[static_cast<std::size_t>(j)] * b * c.u[static_cast<std::size_t>(j)];
      }
    }
    if (l > 1) {
      const Matrix projected =
          tensor(Matrix::Identity(dim_prev, dim_prev), c.zero_block) * b;
      sigma = partial_trace(projected, c.layout, c.cur_ids);
    }
  }
}

}  // namespace

DensityMatrix layer_channel(const NetworkParams& params, int layer,
                            const DensityMatrix& rho_prev) {
  check_layer_index(params, layer);
  const int prev = params.arch.widths[static_cast<std::size_t>(layer) - 1];
  if (rho_prev.num_qubits != prev ||
      rho_prev.matrix.rows() != (Eigen::Index{1} << prev)) {
    throw std::invalid_argument("layer_channel: input state width mismatch");
  }
  const LayerContext ctx = make_layer_context(params, layer);
  Matrix state = tensor(rho_prev.matrix, ctx.zero_block);
  for (int j = 0; j < ctx.cur_width; ++j) {
    state = ctx.u[static_cast<std::size_t>(j)] * state * ctx.u_dag[static_cast<std::size_t>(j)];
  }
  return DensityMatrix{ctx.cur_width,
                       partial_trace(state, ctx.layout, ctx.prev_ids)};
}

ForwardTrace feedforward(const NetworkParams& params, const PureState& input) {
  if (input.num_qubits != params.arch.input_width()) {
    throw std::invalid_argument("feedforward: input width mismatch");
  }
  ForwardTrace trace;
  trace.layer_states.reserve(static_cast<std::size_t>(params.arch.num_channels()) + 1);
  trace.layer_states.push_back(DensityMatrix::from_pure(input));
  for (int l = 1; l <= params.arch.num_channels(); ++l) {
    trace.layer_states.push_back(layer_channel(params, l, trace.layer_states.back()));
  }
  return trace;
}

Matrix adjoint_channel(const NetworkParams& params, int layer,
                       const Eigen::Ref<const Matrix>& sigma) {
  check_layer_index(params, layer);
  const int cur = params.arch.widths[static_cast<std::size_t>(layer)];
  if (sigma.rows() != sigma.cols() || sigma.rows() != (Eigen::Index{1} << cur)) {
    throw std::invalid_argument("adjoint_channel: sigma dimension mismatch");
  }
  if ((sigma - sigma.adjoint()).norm() > 1e-8) {
    throw std::invalid_argument("adjoint_channel: sigma must be Hermitian");
  }
  const LayerContext ctx = make_layer_context(params, layer);
  const Eigen::Index dim_prev = Eigen::Index{1} << ctx.prev_width;
  Matrix x = tensor(Matrix::Identity(dim_prev, dim_prev), sigma);
  for (int j = ctx.cur_width - 1; j >= 0; --j) {
    x = ctx.u_dag[static_cast<std::size_t>(j)] * x * ctx.u[static_cast<std::size_t>(j)];
  }
  const Matrix projected =
      tensor(Matrix::Identity(dim_prev, dim_prev), ctx.zero_block) * x;
  return partial_trace(projected, ctx.layout, ctx.cur_ids);
}

std::vector<Matrix> backward_sigmas(const NetworkParams& params,
                                    const PureState& target) {
  if (target.num_qubits != params.arch.output_width()) {
    throw std::invalid_argument("backward_sigmas: target width mismatch");
  }
  const int num_layers = params.arch.num_channels();
  std::vector<Matrix> sigmas(static_cast<std::size_t>(num_layers));
  sigmas.back() = target.amplitudes * target.amplitudes.adjoint();
  for (int l = num_layers - 1; l >= 1; --l) {
    sigmas[static_cast<std::size_t>(l) - 1] =
        adjoint_channel(params, l + 1, sigmas[static_cast<std::size_t>(l)]);
  }
  return sigmas;
}

UpdateMatrices update_matrices(const NetworkParams& params,
                               std::span<const TrainingPair> batch, double eta) {
  if (batch.empty()) {
    throw std::invalid_argument("update_matrices: empty batch");
  }
  const std::vector<LayerContext> ctx = make_all_contexts(params);

  UpdateMatrices result;
  result.mats.resize(ctx.size());
  for (std::size_t l = 0; l < ctx.size(); ++l) {
    const Eigen::Index dim = Eigen::Index{1} << (ctx[l].prev_width + 1);
    result.mats[l].assign(static_cast<std::size_t>(ctx[l].cur_width),
                          Matrix::Zero(dim, dim));
  }

  for (const TrainingPair& sample : batch) {
    check_sample(params.arch, sample);
    reduced_commutators(ctx, sample, [&](int l, int j, const Matrix& reduced) {
      result.mats[static_cast<std::size_t>(l) - 1][static_cast<std::size_t>(j)] += reduced;
    });
  }

  const Complex i_unit(0.0, 1.0);
  const double inv_count = 1.0 / static_cast<double>(batch.size());
  for (std::size_t l = 0; l < ctx.size(); ++l) {
    const double prefactor =
        eta * static_cast<double>(Eigen::Index{1} << ctx[l].prev_width) * inv_count;
    for (Matrix& k : result.mats[l]) {
      k = (prefactor * i_unit) * k;
      const double asym = (k - k.adjoint()).norm();
      result.max_asymmetry = std::max(result.max_asymmetry, asym);
      k = 0.5 * (k + k.adjoint().eval());
    }
  }
  return result;
}

double directional_derivative(const NetworkParams& params,
                              std::span<const TrainingPair> batch,
                              const UpdateMatrices& directions) {
  if (batch.empty()) {
    throw std::invalid_argument("directional_derivative: empty batch");
  }
  const std::vector<LayerContext> ctx = make_all_contexts(params);
  if (directions.mats.size() != ctx.size()) {
    throw std::invalid_argument("directional_derivative: direction shape mismatch");
  }

  Complex total = 0.0;
  for (const TrainingPair& sample : batch) {
    check_sample(params.arch, sample);
    reduced_commutators(ctx, sample, [&](int l, int j, const Matrix& reduced) {
      total += (reduced *
                directions.mats[static_cast<std::size_t>(l) - 1][static_cast<std::size_t>(j)])
                   .trace();
    });
  }
  const Complex value =
      Complex(0.0, 1.0) * total / static_cast<double>(batch.size());
  if (std::abs(value.imag()) > 1e-8) {
    throw std::runtime_error("directional derivative has imaginary residue " +
                             std::to_string(value.imag()));
  }
  return value.real();
}

void apply_update(NetworkParams& params, const UpdateMatrices& update,
                  double eps) {
  if (update.mats.size() != params.unitaries.size()) {
    throw std::invalid_argument("apply_update: shape mismatch");
  }
  for (std::size_t l = 0; l < update.mats.size(); ++l) {
    if (update.mats[l].size() != params.unitaries[l].size()) {
      throw std::invalid_argument("apply_update: shape mismatch");
    }
    for (std::size_t j = 0; j < update.mats[l].size(); ++j) {
      params.unitaries[l][j] =
          matexp_hermitian(update.mats[l][j], eps) * params.unitaries[l][j];
    }
  }
}

double cost_fidelity(const NetworkParams& params,
                     std::span<const TrainingPair> dataset) {
  if (dataset.empty()) {
    throw std::invalid_argument("cost_fidelity: empty dataset");
  }
  double total = 0.0;
  for (const TrainingPair& pair : dataset) {
    check_sample(params.arch, pair);
    const ForwardTrace trace = feedforward(params, pair.input);
    const Matrix& out = trace.layer_states.back().matrix;
    const Complex f =
        (pair.target.amplitudes.adjoint() * out * pair.target.amplitudes).value();
    if (std::abs(f.imag()) > 1e-10) {
      throw std::runtime_error("fidelity imaginary residue " +
                               std::to_string(f.imag()));
    }
    total += f.real();
  }
  return total / static_cast<double>(dataset.size());
}

double cost_mse(const NetworkParams& params,
                std::span<const TrainingPair> dataset) {
  if (dataset.empty()) {
    throw std::invalid_argument("cost_mse: empty dataset");
  }
  double total = 0.0;
  for (const TrainingPair& pair : dataset) {
    check_sample(params.arch, pair);
    const ForwardTrace trace = feedforward(params, pair.input);
    const Matrix& out = trace.layer_states.back().matrix;
    const Matrix projector = pair.target.amplitudes * pair.target.amplitudes.adjoint();
    total += (out - projector).squaredNorm();
  }
  return total / static_cast<double>(dataset.size());
}

Eigen::VectorXd pauli_diagnostic(const Eigen::Ref<const Matrix>& k,
                                 int num_qubits) {
  const Eigen::Index dim = Eigen::Index{1} << num_qubits;
  if (k.rows() != k.cols() || k.rows() != dim) {
    throw std::invalid_argument("pauli_diagnostic: dimension mismatch");
  }
  const std::vector<Matrix> basis = pauli_basis(num_qubits);
  Eigen::VectorXd coeffs(static_cast<Eigen::Index>(basis.size()));
  const double inv_dim = 1.0 / static_cast<double>(dim);
  for (std::size_t p = 0; p < basis.size(); ++p) {
    coeffs[static_cast<Eigen::Index>(p)] = ((k * basis[p]).trace() * inv_dim).real();
  }
  return coeffs;
}

Matrix pauli_reconstruct(const Eigen::Ref<const Eigen::VectorXd>& coeffs,
                         int num_qubits) {
  const std::vector<Matrix> basis = pauli_basis(num_qubits);
  if (coeffs.size() != static_cast<Eigen::Index>(basis.size())) {
    throw std::invalid_argument("pauli_reconstruct: coefficient count mismatch");
  }
  const Eigen::Index dim = Eigen::Index{1} << num_qubits;
  Matrix result = Matrix::Zero(dim, dim);
  for (std::size_t p = 0; p < basis.size(); ++p) {
    result += coeffs[static_cast<Eigen::Index>(p)] * basis[p];
  }
  return result;
}

}  // namespace qfed
