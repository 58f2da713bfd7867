#include "qfed/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

namespace qfed {

void DatasetSpec::validate() const {
  if (num_train < 1) throw std::invalid_argument("num_train must be >= 1");
  if (num_test < 1) throw std::invalid_argument("num_test must be >= 1");
  if (noise_ratio < 0.0 || noise_ratio > 1.0) {
    throw std::invalid_argument("noise_ratio must lie in [0, 1]");
  }
  if (num_qubits < 1 || num_qubits > kMaxQubits) {
    throw std::invalid_argument("num_qubits out of range");
  }
  if (num_nodes < 1) throw std::invalid_argument("num_nodes must be >= 1");
  if (num_nodes > num_train) {
    throw std::invalid_argument("more nodes than training pairs");
  }
}

namespace {

// Lexicographic order on the flattened (re, im) input-amplitude sequence.
bool input_key_less(const TrainingPair& a, const TrainingPair& b) {
  const Vector& x = a.input.amplitudes;
  const Vector& y = b.input.amplitudes;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i].real() != y[i].real()) return x[i].real() < y[i].real();
    if (x[i].imag() != y[i].imag()) return x[i].imag() < y[i].imag();
  }
  return false;
}

TrainingPair labeled_pair(const Matrix& global_unitary, int num_qubits, Rng& rng) {
  PureState input = haar_state(num_qubits, rng);
  PureState target{num_qubits, global_unitary * input.amplitudes};
  return TrainingPair{std::move(input), std::move(target)};
}

}  // namespace

std::vector<std::vector<TrainingPair>> partition_heterogeneous(
    std::vector<TrainingPair> pairs, int num_nodes) {
  if (num_nodes < 1 || num_nodes > static_cast<int>(pairs.size())) {
    throw std::invalid_argument("partition_heterogeneous: node count out of range");
  }
  std::sort(pairs.begin(), pairs.end(), input_key_less);

  const int total = static_cast<int>(pairs.size());
  const int base = total / num_nodes;
  const int remainder = total % num_nodes;
  std::vector<std::vector<TrainingPair>> nodes(static_cast<std::size_t>(num_nodes));
  auto cursor = pairs.begin();
  for (int n = 0; n < num_nodes; ++n) {
    const int take = base + (n < remainder ? 1 : 0);
    nodes[static_cast<std::size_t>(n)].assign(std::make_move_iterator(cursor),
                                              std::make_move_iterator(cursor + take));
    cursor += take;
  }
  return nodes;
}

GeneratedDataset generate(const DatasetSpec& spec, Rng& rng) {
  spec.validate();

  const Matrix global_unitary = haar_unitary(spec.num_qubits, rng);

  std::vector<TrainingPair> train;
  train.reserve(static_cast<std::size_t>(spec.num_train));
  for (int x = 0; x < spec.num_train; ++x) {
    train.push_back(labeled_pair(global_unitary, spec.num_qubits, rng));
  }

  std::vector<TrainingPair> test;
  test.reserve(static_cast<std::size_t>(spec.num_test));
  for (int x = 0; x < spec.num_test; ++x) {
    test.push_back(labeled_pair(global_unitary, spec.num_qubits, rng));
  }

  const int noisy_count =
      static_cast<int>(std::floor(spec.noise_ratio * spec.num_train));
  if (noisy_count > 0) {
    std::vector<int> indices(static_cast<std::size_t>(spec.num_train));
    std::iota(indices.begin(), indices.end(), 0);
    for (int i = 0; i < noisy_count; ++i) {
      std::uniform_int_distribution<int> pick(i, spec.num_train - 1);
      std::swap(indices[static_cast<std::size_t>(i)],
                indices[static_cast<std::size_t>(pick(rng))]);
    }
    indices.resize(static_cast<std::size_t>(noisy_count));
    std::sort(indices.begin(), indices.end());
    for (int idx : indices) {
      train[static_cast<std::size_t>(idx)] =
          TrainingPair{haar_state(spec.num_qubits, rng), haar_state(spec.num_qubits, rng)};
    }
  }

  GeneratedDataset result;
  result.data.node_data = partition_heterogeneous(std::move(train), spec.num_nodes);
  result.data.test_data = std::move(test);
  result.hidden_unitary = global_unitary;
  return result;
}

namespace {

void write_state(std::ostream& out, const PureState& state) {
  char buf[64];
  for (Eigen::Index i = 0; i < state.amplitudes.size(); ++i) {
    std::snprintf(buf, sizeof(buf), " %.17g %.17g", state.amplitudes[i].real(),
                  state.amplitudes[i].imag());
    out << buf;
  }
  out << '\n';
}

void write_pairs(std::ostream& out, const std::vector<TrainingPair>& pairs) {
  for (const TrainingPair& pair : pairs) {
    out << "in";
    write_state(out, pair.input);
    out << "out";
    write_state(out, pair.target);
  }
}

std::string expect_token(std::istream& in, const std::string& wanted) {
  std::string token;
  if (!(in >> token) || token != wanted) {
    throw std::runtime_error("dataset parse error: expected '" + wanted + "', got '" +
                             token + "'");
  }
  return token;
}

PureState read_state(std::istream& in, int num_qubits) {
  const Eigen::Index dim = Eigen::Index{1} << num_qubits;
  Vector amps(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    double re = 0.0, im = 0.0;
    if (!(in >> re >> im)) {
      throw std::runtime_error("dataset parse error: truncated amplitude list");
    }
    amps[i] = Complex(re, im);
  }
  PureState state{num_qubits, std::move(amps)};
  state.validate();
  return state;
}

std::vector<TrainingPair> read_pairs(std::istream& in, int count, int num_qubits) {
  std::vector<TrainingPair> pairs;
  pairs.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    expect_token(in, "in");
    PureState input = read_state(in, num_qubits);
    expect_token(in, "out");
    PureState target = read_state(in, num_qubits);
    pairs.push_back(TrainingPair{std::move(input), std::move(target)});
  }
  return pairs;
}

}  // namespace

void dump_dataset(std::ostream& out, const DatasetSpec& spec,
                  const PartitionedDataset& data) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", spec.noise_ratio);
  out << "qfed-dataset 1\n";
  out << "num_qubits " << spec.num_qubits << '\n';
  out << "num_train " << spec.num_train << '\n';
  out << "num_test " << spec.num_test << '\n';
  out << "noise_ratio " << buf << '\n';
  out << "num_nodes " << spec.num_nodes << '\n';
  out << "seed " << spec.seed << '\n';
  for (std::size_t n = 0; n < data.node_data.size(); ++n) {
    out << "node " << n << ' ' << data.node_data[n].size() << '\n';
    write_pairs(out, data.node_data[n]);
  }
  out << "test " << data.test_data.size() << '\n';
  write_pairs(out, data.test_data);
}

PartitionedDataset load_dataset(std::istream& in, DatasetSpec* spec_out) {
  expect_token(in, "qfed-dataset");
  int version = 0;
  in >> version;
  if (version != 1) throw std::runtime_error("dataset parse error: unknown version");

  DatasetSpec spec;
  expect_token(in, "num_qubits");
  in >> spec.num_qubits;
  expect_token(in, "num_train");
  in >> spec.num_train;
  expect_token(in, "num_test");
  in >> spec.num_test;
  expect_token(in, "noise_ratio");
  in >> spec.noise_ratio;
  expect_token(in, "num_nodes");
  in >> spec.num_nodes;
  expect_token(in, "seed");
  in >> spec.seed;
  if (!in) throw std::runtime_error("dataset parse error: malformed header");
  spec.validate();

  PartitionedDataset data;
  data.node_data.resize(static_cast<std::size_t>(spec.num_nodes));
  int total = 0;
  for (int n = 0; n < spec.num_nodes; ++n) {
    expect_token(in, "node");
    int id = 0, count = 0;
    if (!(in >> id >> count) || id != n || count < 0) {
      throw std::runtime_error("dataset parse error: bad node header");
    }
    data.node_data[static_cast<std::size_t>(n)] = read_pairs(in, count, spec.num_qubits);
    total += count;
  }
  if (total != spec.num_train) {
    throw std::runtime_error("dataset parse error: node pair counts do not sum to num_train");
  }
  expect_token(in, "test");
  int test_count = 0;
  if (!(in >> test_count) || test_count != spec.num_test) {
    throw std::runtime_error("dataset parse error: bad test header");
  }
  data.test_data = read_pairs(in, test_count, spec.num_qubits);

  if (spec_out) *spec_out = spec;
  return data;
}

}  // namespace qfed
