// Experiment front end: JSON config parsing with strict schema checks, CSV
// metrics emission, the named sweep presets, and seed plumbing tying dataset
// generation to the protocol run.

#pragma once

#include <string>
#include <vector>

#include "qfed/dataset.hpp"
#include "qfed/federated.hpp"

namespace qfed {

struct ExperimentConfig {
  std::vector<int> architecture{2, 3, 2};
  FedConfig fed{};
  int num_train = 100;
  int num_test = 30;
  double noise_ratio = 0.0;
  std::string preset;            // informational, set by run_preset
  std::string output = "run.csv";

  Architecture network_arch() const { return Architecture{architecture}; }
  DatasetSpec dataset_spec() const;

  /// First and last widths must agree (the data generator maps the input
  /// space onto itself); everything else defers to the member validators.
  void validate() const;
};

/// Strict parse: unknown keys and wrong types are reported per field.
ExperimentConfig config_from_json_text(const std::string& text);

/// Resolved configuration (post-defaults), used for the config echo file.
std::string config_to_json_text(const ExperimentConfig& config);

struct MetricsRow {
  int round = 0;
  double train_fidelity = 0.0;
  double train_mse = 0.0;
  double test_fidelity = 0.0;
  double test_mse = 0.0;

  void validate() const;
};

/// Header `round,train_fidelity,train_mse,test_fidelity,test_mse`, one row
/// per round, values at 15 significant digits.
void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows);

struct RunSummary {
  std::string csv_path;
  std::string config_echo_path;
  std::vector<MetricsRow> rows;
};

/// In-memory run: generates the dataset and runs the server loop, returning
/// one metrics row per round. `observer`, when set, sees the global
/// parameters after every round.
std::vector<MetricsRow> run_metrics(const ExperimentConfig& config,
                                    const RoundObserver& observer = {});

/// Generates the dataset, runs the server loop, writes the CSV and a config
/// echo file next to it. Throws on invalid configs and on invariant aborts.
RunSummary run_experiment(const ExperimentConfig& config, const std::string& out_dir);

/// The sweep points of a named preset, in run order.
std::vector<ExperimentConfig> preset_configs(const std::string& name,
                                             std::uint64_t seed);

/// Runs every point of the preset (points may execute concurrently) and
/// returns the written CSV paths in sweep order.
std::vector<RunSummary> run_preset(const std::string& name, const std::string& out_dir,
                                   std::uint64_t seed);

}  // namespace qfed
