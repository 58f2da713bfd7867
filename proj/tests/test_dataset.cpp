#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "qfed/dataset.hpp"

using namespace qfed;

namespace {

double labeled_overlap(const TrainingPair& pair, const Matrix& hidden) {
  const Vector mapped = hidden * pair.input.amplitudes;
  return std::norm(pair.target.amplitudes.dot(mapped));
}

std::vector<const TrainingPair*> flatten(const PartitionedDataset& data) {
  std::vector<const TrainingPair*> all;
  for (const auto& node : data.node_data) {
    for (const TrainingPair& pair : node) all.push_back(&pair);
  }
  return all;
}

bool key_less_or_equal(const TrainingPair& a, const TrainingPair& b) {
  const Vector& x = a.input.amplitudes;
  const Vector& y = b.input.amplitudes;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i].real() != y[i].real()) return x[i].real() < y[i].real();
    if (x[i].imag() != y[i].imag()) return x[i].imag() < y[i].imag();
  }
  return true;
}

bool pairs_identical(const TrainingPair& a, const TrainingPair& b) {
  return a.input.amplitudes == b.input.amplitudes &&
         a.target.amplitudes == b.target.amplitudes;
}

}  // namespace

TEST_CASE("generate: clean pairs follow the hidden unitary exactly") {
  DatasetSpec spec;
  spec.num_train = 40;
  spec.num_test = 10;
  spec.noise_ratio = 0.0;
  spec.num_qubits = 2;
  spec.num_nodes = 4;
  spec.seed = 7;
  Rng rng(spec.seed);
  const GeneratedDataset generated = generate(spec, rng);

  for (const TrainingPair* pair : flatten(generated.data)) {
    CHECK(labeled_overlap(*pair, generated.hidden_unitary) ==
          doctest::Approx(1.0).epsilon(1e-10));
  }
  for (const TrainingPair& pair : generated.data.test_data) {
    CHECK(labeled_overlap(pair, generated.hidden_unitary) ==
          doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("generate: fully noisy data has Haar-level overlap on average") {
  DatasetSpec spec;
  spec.num_train = 600;
  spec.num_test = 5;
  spec.noise_ratio = 1.0;
  spec.num_qubits = 2;
  spec.num_nodes = 3;
  spec.seed = 8;
  Rng rng(spec.seed);
  const GeneratedDataset generated = generate(spec, rng);

  double mean = 0.0;
  const auto all = flatten(generated.data);
  for (const TrainingPair* pair : all) {
    mean += labeled_overlap(*pair, generated.hidden_unitary);
  }
  mean /= static_cast<double>(all.size());
  CHECK(std::abs(mean - 0.25) < 0.03);  // E|<a|b>|^2 = 1/2^m for independent states

  // Test pairs stay clean even at full training noise.
  for (const TrainingPair& pair : generated.data.test_data) {
    CHECK(labeled_overlap(pair, generated.hidden_unitary) ==
          doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("generate: noisy subset size follows the floor rule") {
  DatasetSpec spec;
  spec.num_train = 50;
  spec.num_test = 5;
  spec.noise_ratio = 0.3;
  spec.num_qubits = 1;
  spec.num_nodes = 5;
  spec.seed = 9;
  Rng rng(spec.seed);
  const GeneratedDataset generated = generate(spec, rng);

  int noisy = 0;
  for (const TrainingPair* pair : flatten(generated.data)) {
    if (labeled_overlap(*pair, generated.hidden_unitary) < 1.0 - 1e-9) ++noisy;
  }
  CHECK(noisy == 15);  // floor(0.3 * 50); Haar pairs collide with prob 0
}

TEST_CASE("generate: 100 pairs over 10 nodes gives equal shards") {
  DatasetSpec spec;
  spec.num_train = 100;
  spec.num_test = 10;
  spec.num_qubits = 2;
  spec.num_nodes = 10;
  spec.seed = 10;
  Rng rng(spec.seed);
  const GeneratedDataset generated = generate(spec, rng);
  REQUIRE(generated.data.node_data.size() == 10);
  for (const auto& node : generated.data.node_data) CHECK(node.size() == 10);
}

TEST_CASE("generate: deterministic under the seed") {
  DatasetSpec spec;
  spec.num_train = 30;
  spec.num_test = 6;
  spec.noise_ratio = 0.4;
  spec.num_qubits = 2;
  spec.num_nodes = 3;
  spec.seed = 11;

  Rng a(spec.seed), b(spec.seed);
  const GeneratedDataset first = generate(spec, a);
  const GeneratedDataset second = generate(spec, b);
  CHECK(first.hidden_unitary == second.hidden_unitary);
  const auto lhs = flatten(first.data);
  const auto rhs = flatten(second.data);
  REQUIRE(lhs.size() == rhs.size());
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    CHECK(pairs_identical(*lhs[i], *rhs[i]));
  }
}

TEST_CASE("partition_heterogeneous: single node gets one sorted block") {
  Rng rng(12);
  std::vector<TrainingPair> pairs;
  for (int i = 0; i < 9; ++i) {
    pairs.push_back(TrainingPair{haar_state(1, rng), haar_state(1, rng)});
  }
  const auto nodes = partition_heterogeneous(pairs, 1);
  REQUIRE(nodes.size() == 1);
  REQUIRE(nodes[0].size() == 9);
  for (std::size_t i = 1; i < nodes[0].size(); ++i) {
    CHECK(key_less_or_equal(nodes[0][i - 1], nodes[0][i]));
  }
}

TEST_CASE("partition_heterogeneous: keys are non-decreasing across block boundaries") {
  Rng rng(13);
  std::vector<TrainingPair> pairs;
  for (int i = 0; i < 100; ++i) {
    pairs.push_back(TrainingPair{haar_state(2, rng), haar_state(2, rng)});
  }
  const auto nodes = partition_heterogeneous(pairs, 10);
  REQUIRE(nodes.size() == 10);

  const TrainingPair* previous = nullptr;
  int total = 0;
  for (const auto& node : nodes) {
    CHECK(node.size() == 10);
    for (const TrainingPair& pair : node) {
      if (previous) CHECK(key_less_or_equal(*previous, pair));
      previous = &pair;
      ++total;
    }
  }
  CHECK(total == 100);

  // Non-overlapping per-node key ranges: each block's last key precedes the
  // next block's first key.
  for (std::size_t n = 1; n < nodes.size(); ++n) {
    CHECK(key_less_or_equal(nodes[n - 1].back(), nodes[n].front()));
  }
}

TEST_CASE("partition_heterogeneous: remainder goes to the earliest nodes") {
  Rng rng(14);
  std::vector<TrainingPair> pairs;
  for (int i = 0; i < 7; ++i) {
    pairs.push_back(TrainingPair{haar_state(1, rng), haar_state(1, rng)});
  }
  const auto nodes = partition_heterogeneous(pairs, 3);
  REQUIRE(nodes.size() == 3);
  CHECK(nodes[0].size() == 3);
  CHECK(nodes[1].size() == 2);
  CHECK(nodes[2].size() == 2);

  CHECK_THROWS_AS(partition_heterogeneous(pairs, 8), std::invalid_argument);
}

TEST_CASE("dump/load: full round trip preserves every amplitude") {
  DatasetSpec spec;
  spec.num_train = 12;
  spec.num_test = 4;
  spec.noise_ratio = 0.25;
  spec.num_qubits = 2;
  spec.num_nodes = 3;
  spec.seed = 15;
  Rng rng(spec.seed);
  const GeneratedDataset generated = generate(spec, rng);

  std::stringstream stream;
  dump_dataset(stream, spec, generated.data);

  DatasetSpec loaded_spec;
  const PartitionedDataset loaded = load_dataset(stream, &loaded_spec);
  CHECK(loaded_spec.num_train == spec.num_train);
  CHECK(loaded_spec.num_test == spec.num_test);
  CHECK(loaded_spec.noise_ratio == spec.noise_ratio);
  CHECK(loaded_spec.seed == spec.seed);

  REQUIRE(loaded.node_data.size() == generated.data.node_data.size());
  for (std::size_t n = 0; n < loaded.node_data.size(); ++n) {
    REQUIRE(loaded.node_data[n].size() == generated.data.node_data[n].size());
    for (std::size_t i = 0; i < loaded.node_data[n].size(); ++i) {
      CHECK(pairs_identical(loaded.node_data[n][i], generated.data.node_data[n][i]));
    }
  }
  REQUIRE(loaded.test_data.size() == generated.data.test_data.size());
  for (std::size_t i = 0; i < loaded.test_data.size(); ++i) {
    CHECK(pairs_identical(loaded.test_data[i], generated.data.test_data[i]));
  }
}

TEST_CASE("load: malformed inputs are rejected") {
  std::stringstream wrong_magic("other-format 1\n");
  CHECK_THROWS_AS(load_dataset(wrong_magic), std::runtime_error);

  std::stringstream truncated("qfed-dataset 1\nnum_qubits 1\nnum_train 2\n");
  CHECK_THROWS_AS(load_dataset(truncated), std::runtime_error);
}

TEST_CASE("DatasetSpec: validation catches bad field values") {
  DatasetSpec spec;
  spec.noise_ratio = 1.5;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.noise_ratio = 0.5;
  spec.num_nodes = 200;  // more nodes than the 100 default pairs
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}
