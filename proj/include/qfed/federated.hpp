// Federated training protocol: node-side local updates, server-side
// orchestration, node selection and the ordered-product aggregation of update
// unitaries. A round selects participants, has each run interval_length local
// steps against a copy of the global model, and multiplies the returned
// update unitaries onto the global perceptrons.

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qfed/network.hpp"

namespace qfed {

enum class OptMode { kGradientDescent, kStochastic };

/// Every experiment knob of the protocol itself (data knobs live elsewhere).
struct FedConfig {
  int total_nodes = 10;       // N
  int participants = 10;      // N_p, selected per round
  int sync_rounds = 50;       // N_s
  int interval_length = 1;    // I_l, local steps per round
  double epsilon = 0.1;       // update step size
  double eta = 1.0;           // learning rate (inverse of the K-norm bound)
  OptMode mode = OptMode::kGradientDescent;
  int sgd_batch_size = 5;     // used iff mode == kStochastic
  std::uint64_t seed = 0;

  void validate() const;
};

/// One node's private shard.
struct NodeState {
  int node_id = 0;
  std::vector<TrainingPair> local_data;
};

/// Wire object between node and server: the update unitary for one
/// (node, local step, layer, perceptron). step_index and layer are 1-based,
/// perceptron is 0-based, matching NetworkParams indexing.
struct UpdateRecord {
  int node_id = 0;
  int step_index = 0;
  int layer = 0;
  int perceptron = 0;
  Matrix unitary;
};

/// Per-round telemetry.
struct RoundReport {
  int round = 0;                    // t, 1-based
  std::vector<int> selected_nodes;  // S_n, ascending
  int total_selected_data = 0;      // N_t
  double train_fidelity = 0.0;
  double train_mse = 0.0;
  double test_fidelity = 0.0;
  double test_mse = 0.0;
  double wall_seconds = 0.0;
};

/// Local update pass (node side). Runs interval_length steps against a scratch
/// copy of `global_params` (which is never mutated): per step the batch is the
/// full shard (GD) or a fresh uniform sample without replacement (SGD), the
/// update matrices K are computed, exp(i eps (N_n/N_t) K) is recorded for the
/// server, and the scratch copy advances by the full-step exp(i eps K).
/// Records are emitted in (step, layer, perceptron) order.
std::vector<UpdateRecord> quanfed_node(const NodeState& node,
                                       const NetworkParams& global_params,
                                       const FedConfig& cfg, int total_data,
                                       Rng& rng);

/// Uniform sample of `count` node ids without replacement, returned ascending.
std::vector<int> select_nodes(const std::vector<int>& all_ids, int count,
                              Rng& rng);

/// Ordered product of update unitaries per (layer, perceptron): steps run from
/// interval_length down to 1, nodes ascending within a step, later-applied
/// factors on the left. Rejects record multisets that are not exactly one
/// record per (selected node, step, layer, perceptron).
std::vector<std::vector<Matrix>> aggregate(const std::vector<UpdateRecord>& records,
                                           const FedConfig& cfg,
                                           const Architecture& arch,
                                           const std::vector<int>& selected);

struct TrainingResult {
  NetworkParams params;
  std::vector<RoundReport> reports;
};

/// Called after each round's global update with the new parameters.
using RoundObserver = std::function<void(int round, const NetworkParams&)>;

/// Server loop: Haar-initializes the global model (unless `initial` is given),
/// then for each round selects participants, collects their update unitaries,
/// aggregates and applies them, and records metrics on the union of all node
/// data plus `test_data`. Aborts with a diagnostic if any perceptron drifts
/// from unitary. Deterministic for a given (cfg, nodes, test_data): node-side
/// RNG streams are derived from (seed, round, node id).
TrainingResult quanfed_ps(const FedConfig& cfg, const Architecture& arch,
                          const std::vector<NodeState>& nodes,
                          std::span<const TrainingPair> test_data,
                          const NetworkParams* initial = nullptr,
                          const RoundObserver& observer = {});

/// Plain single-machine loop used as the federated comparison oracle: per
/// step, update matrices on the full dataset, then U <- exp(i eps K) U.
NetworkParams centralized_reference(NetworkParams params,
                                    std::span<const TrainingPair> data,
                                    int steps, double epsilon, double eta);

/// Stream-derivation helper (splitmix-style); exposed so tests can reproduce
/// the per-node RNG streams used by quanfed_ps.
std::uint64_t derive_stream_seed(std::uint64_t base, std::uint64_t a,
                                 std::uint64_t b);

}  // namespace qfed
