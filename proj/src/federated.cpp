#include "qfed/federated.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <numeric>
#include <string>
#include <tuple>

namespace qfed {

void FedConfig::validate() const {
  if (total_nodes < 1) throw std::invalid_argument("total_nodes must be >= 1");
  if (participants < 1 || participants > total_nodes) {
    throw std::invalid_argument("participants must be in [1, total_nodes]");
  }
  if (sync_rounds < 0) throw std::invalid_argument("sync_rounds must be >= 0");
  if (interval_length < 1) throw std::invalid_argument("interval_length must be >= 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be > 0");
  if (sgd_batch_size < 1) throw std::invalid_argument("sgd_batch_size must be >= 1");
}

std::uint64_t derive_stream_seed(std::uint64_t base, std::uint64_t a,
                                 std::uint64_t b) {
  auto mix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  return mix(mix(mix(base) + a) + b);
}

namespace {

// Uniform sample of `count` indices from [0, n) without replacement
// (partial Fisher-Yates), in draw order.
std::vector<int> sample_indices(int n, int count, Rng& rng) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  idx.resize(static_cast<std::size_t>(count));
  return idx;
}

}  // namespace

std::vector<UpdateRecord> quanfed_node(const NodeState& node,
                                       const NetworkParams& global_params,
                                       const FedConfig& cfg, int total_data,
                                       Rng& rng) {
  if (node.local_data.empty()) {
    throw std::invalid_argument("quanfed_node: node holds no data");
  }
  const int local_count = static_cast<int>(node.local_data.size());
  if (total_data < local_count) {
    throw std::invalid_argument("quanfed_node: total data below local shard size");
  }
  const double weight = static_cast<double>(local_count) / static_cast<double>(total_data);

  NetworkParams working = global_params;  // global copy stays untouched
  std::vector<UpdateRecord> records;
  const int per_step = std::accumulate(working.arch.widths.begin() + 1,
                                       working.arch.widths.end(), 0);
  records.reserve(static_cast<std::size_t>(cfg.interval_length * per_step));

  std::vector<TrainingPair> batch_storage;
  for (int k = 1; k <= cfg.interval_length; ++k) {
    std::span<const TrainingPair> batch(node.local_data);
    if (cfg.mode == OptMode::kStochastic) {
      int batch_size = cfg.sgd_batch_size;
      if (batch_size > local_count) {
        std::fprintf(stderr,
                     "warning: node %d sgd batch %d exceeds local data %d; "
                     "using the full shard\n",
                     node.node_id, batch_size, local_count);
        batch_size = local_count;
      }
      batch_storage.clear();
      for (int idx : sample_indices(local_count, batch_size, rng)) {
        batch_storage.push_back(node.local_data[static_cast<std::size_t>(idx)]);
      }
      batch = batch_storage;
    }

    const UpdateMatrices update = update_matrices(working, batch, cfg.eta);
    for (int l = 1; l <= working.arch.num_channels(); ++l) {
      for (int j = 0; j < working.arch.widths[static_cast<std::size_t>(l)]; ++j) {
        const Matrix& k_mat =
            update.mats[static_cast<std::size_t>(l) - 1][static_cast<std::size_t>(j)];
        records.push_back(UpdateRecord{node.node_id, k, l, j,
                                       matexp_hermitian(k_mat, cfg.epsilon * weight)});
        working.unitaries[static_cast<std::size_t>(l) - 1][static_cast<std::size_t>(j)] =
            matexp_hermitian(k_mat, cfg.epsilon) *
            working.unitaries[static_cast<std::size_t>(l) - 1][static_cast<std::size_t>(j)];
      }
    }
  }
  return records;
}

std::vector<int> select_nodes(const std::vector<int>& all_ids, int count,
                              Rng& rng) {
  const int n = static_cast<int>(all_ids.size());
  if (count < 0 || count > n) {
    throw std::invalid_argument("select_nodes: cannot pick " + std::to_string(count) +
                                " of " + std::to_string(n) + " nodes");
  }
  std::vector<int> chosen;
  chosen.reserve(static_cast<std::size_t>(count));
  for (int idx : sample_indices(n, count, rng)) {
    chosen.push_back(all_ids[static_cast<std::size_t>(idx)]);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

std::vector<std::vector<Matrix>> aggregate(const std::vector<UpdateRecord>& records,
                                           const FedConfig& cfg,
                                           const Architecture& arch,
                                           const std::vector<int>& selected) {
  arch.validate();
  std::vector<int> node_order = selected;  // product iterates ascending node id
  std::sort(node_order.begin(), node_order.end());
  auto describe = [](int n, int k, int l, int j) {
    return "(node " + std::to_string(n) + ", step " + std::to_string(k) +
           ", layer " + std::to_string(l) + ", perceptron " + std::to_string(j) + ")";
  };

  std::map<std::tuple<int, int, int, int>, const UpdateRecord*> index;
  for (const UpdateRecord& rec : records) {
    if (!std::binary_search(node_order.begin(), node_order.end(), rec.node_id) ||
        rec.step_index < 1 || rec.step_index > cfg.interval_length ||
        rec.layer < 1 || rec.layer > arch.num_channels() || rec.perceptron < 0 ||
        rec.perceptron >= arch.widths[static_cast<std::size_t>(rec.layer)]) {
      throw std::runtime_error(
          "aggregate: unexpected record " +
          describe(rec.node_id, rec.step_index, rec.layer, rec.perceptron));
    }
    const Eigen::Index dim =
        Eigen::Index{1} << (arch.widths[static_cast<std::size_t>(rec.layer) - 1] + 1);
    if (rec.unitary.rows() != dim || rec.unitary.cols() != dim) {
      throw std::runtime_error(
          "aggregate: dimension mismatch for record " +
          describe(rec.node_id, rec.step_index, rec.layer, rec.perceptron));
    }
    if ((rec.unitary.adjoint() * rec.unitary - Matrix::Identity(dim, dim)).norm() > 1e-8) {
      throw std::runtime_error(
          "aggregate: non-unitary record " +
          describe(rec.node_id, rec.step_index, rec.layer, rec.perceptron));
    }
    const auto key = std::make_tuple(rec.node_id, rec.step_index, rec.layer, rec.perceptron);
    if (!index.emplace(key, &rec).second) {
      throw std::runtime_error(
          "aggregate: duplicate record " +
          describe(rec.node_id, rec.step_index, rec.layer, rec.perceptron));
    }
  }

  std::vector<std::vector<Matrix>> result(
      static_cast<std::size_t>(arch.num_channels()));
  for (int l = 1; l <= arch.num_channels(); ++l) {
    auto& layer = result[static_cast<std::size_t>(l) - 1];
    for (int j = 0; j < arch.widths[static_cast<std::size_t>(l)]; ++j) {
      Matrix product;
      bool first = true;
      for (int k = cfg.interval_length; k >= 1; --k) {
        for (int node : node_order) {
          const auto it = index.find(std::make_tuple(node, k, l, j));
          if (it == index.end()) {
            throw std::runtime_error("aggregate: missing record " +
                                     describe(node, k, l, j));
          }
          if (first) {
            product = it->second->unitary;
            first = false;
          } else {
            product = product * it->second->unitary;
          }
        }
      }
      layer.push_back(std::move(product));
    }
  }
  return result;
}

TrainingResult quanfed_ps(const FedConfig& cfg, const Architecture& arch,
                          const std::vector<NodeState>& nodes,
                          std::span<const TrainingPair> test_data,
                          const NetworkParams* initial,
                          const RoundObserver& observer) {
  cfg.validate();
  arch.validate();
  if (static_cast<int>(nodes.size()) != cfg.total_nodes) {
    throw std::invalid_argument("quanfed_ps: node count does not match config");
  }
  std::vector<int> ids;
  ids.reserve(nodes.size());
  std::vector<TrainingPair> train_union;
  for (const NodeState& node : nodes) {
    if (node.local_data.empty()) {
      throw std::invalid_argument("quanfed_ps: node " + std::to_string(node.node_id) +
                                  " holds no data");
    }
    for (const TrainingPair& pair : node.local_data) {
      if (pair.input.num_qubits != arch.input_width() ||
          pair.target.num_qubits != arch.output_width()) {
        throw std::invalid_argument("quanfed_ps: node " + std::to_string(node.node_id) +
                                    " data does not match the architecture");
      }
      train_union.push_back(pair);
    }
    ids.push_back(node.node_id);
  }
  std::vector<int> sorted_ids = ids;
  std::sort(sorted_ids.begin(), sorted_ids.end());
  if (std::adjacent_find(sorted_ids.begin(), sorted_ids.end()) != sorted_ids.end()) {
    throw std::invalid_argument("quanfed_ps: node ids must be unique");
  }

  Rng master(cfg.seed);
  NetworkParams params = initial ? *initial : random_network(arch, master);
  if (initial && !(params.arch == arch)) {
    throw std::invalid_argument("quanfed_ps: initial params architecture mismatch");
  }
  params.validate();

  TrainingResult result{std::move(params), {}};
  result.reports.reserve(static_cast<std::size_t>(cfg.sync_rounds));

  for (int t = 1; t <= cfg.sync_rounds; ++t) {
    const auto start = std::chrono::steady_clock::now();

    const std::vector<int> selected = select_nodes(ids, cfg.participants, master);
    int total_data = 0;
    for (int id : selected) {
      const auto it = std::find(ids.begin(), ids.end(), id);
      total_data += static_cast<int>(nodes[static_cast<std::size_t>(it - ids.begin())]
                                         .local_data.size());
    }

    std::vector<UpdateRecord> records;
    for (int id : selected) {
      const auto it = std::find(ids.begin(), ids.end(), id);
      const NodeState& node = nodes[static_cast<std::size_t>(it - ids.begin())];
      Rng node_rng(derive_stream_seed(cfg.seed, static_cast<std::uint64_t>(t),
                                      static_cast<std::uint64_t>(node.node_id)));
      std::vector<UpdateRecord> local =
          quanfed_node(node, result.params, cfg, total_data, node_rng);
      records.insert(records.end(), std::make_move_iterator(local.begin()),
                     std::make_move_iterator(local.end()));
    }

    const std::vector<std::vector<Matrix>> global_updates =
        aggregate(records, cfg, arch, selected);
    for (std::size_t l = 0; l < global_updates.size(); ++l) {
      for (std::size_t j = 0; j < global_updates[l].size(); ++j) {
        result.params.unitaries[l][j] = global_updates[l][j] * result.params.unitaries[l][j];
      }
    }
    result.params.validate();  // aborts the run if unitarity has drifted

    RoundReport report;
    report.round = t;
    report.selected_nodes = selected;
    report.total_selected_data = total_data;
    report.train_fidelity = cost_fidelity(result.params, train_union);
    report.train_mse = cost_mse(result.params, train_union);
    if (!test_data.empty()) {
      report.test_fidelity = cost_fidelity(result.params, test_data);
      report.test_mse = cost_mse(result.params, test_data);
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.reports.push_back(std::move(report));

    if (observer) observer(t, result.params);
  }
  return result;
}

NetworkParams centralized_reference(NetworkParams params,
                                    std::span<const TrainingPair> data,
                                    int steps, double epsilon, double eta) {
  if (steps < 0) throw std::invalid_argument("centralized_reference: negative steps");
  for (int s = 0; s < steps; ++s) {
    const UpdateMatrices update = update_matrices(params, data, eta);
    apply_update(params, update, epsilon);
  }
  return params;
}

}  // namespace qfed
