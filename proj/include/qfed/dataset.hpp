// Synthetic quantum dataset generation: a hidden Haar-random global unitary
// labels Haar-random input states; a chosen fraction of the training pairs is
// replaced by independent random input/output noise; pairs are partitioned
// across nodes by sorting on the input amplitudes so similar states share a
// node (a deliberately non-iid split).

#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "qfed/network.hpp"

namespace qfed {

struct DatasetSpec {
  int num_train = 100;
  int num_test = 30;
  double noise_ratio = 0.0;  // training pairs only; test data stays clean
  int num_qubits = 2;        // m_in = m_out
  int num_nodes = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PartitionedDataset {
  std::vector<std::vector<TrainingPair>> node_data;
  std::vector<TrainingPair> test_data;
};

struct GeneratedDataset {
  PartitionedDataset data;
  Matrix hidden_unitary;  // kept for diagnostics only; training never reads it
};

/// Draw order is fixed: global unitary, training pairs, test pairs, noisy
/// index choice, noisy replacements. floor(noise_ratio * num_train) training
/// pairs are replaced by fully random ones.
GeneratedDataset generate(const DatasetSpec& spec, Rng& rng);

/// Sorts pairs by the flattened input amplitudes (Re a0, Im a0, Re a1, ...)
/// lexicographically, then cuts contiguous blocks per node; any remainder is
/// spread over the earliest nodes.
std::vector<std::vector<TrainingPair>> partition_heterogeneous(
    std::vector<TrainingPair> pairs, int num_nodes);

/// Fixed-field text dump (spec line per field, then per-node and test pairs
/// as (re, im) amplitude rows) for cross-implementation golden files.
void dump_dataset(std::ostream& out, const DatasetSpec& spec,
                  const PartitionedDataset& data);

/// Inverse of dump_dataset. Throws std::runtime_error on malformed input.
PartitionedDataset load_dataset(std::istream& in, DatasetSpec* spec_out = nullptr);

}  // namespace qfed
