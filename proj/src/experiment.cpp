#include "qfed/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace qfed {

using nlohmann::json;

DatasetSpec ExperimentConfig::dataset_spec() const {
  DatasetSpec spec;
  spec.num_train = num_train;
  spec.num_test = num_test;
  spec.noise_ratio = noise_ratio;
  spec.num_qubits = architecture.empty() ? 0 : architecture.front();
  spec.num_nodes = fed.total_nodes;
  spec.seed = derive_stream_seed(fed.seed, 0xDA7Au, 0);
  return spec;
}

void ExperimentConfig::validate() const {
  if (architecture.size() < 2) {
    throw std::invalid_argument("config field 'architecture': need at least two widths");
  }
  if (architecture.front() != architecture.back()) {
    throw std::invalid_argument(
        "config field 'architecture': first and last widths must match");
  }
  network_arch().validate();
  fed.validate();
  dataset_spec().validate();
  if (output.empty()) {
    throw std::invalid_argument("config field 'output': must not be empty");
  }
}

namespace {

template <typename T>
T get_field(const json& j, const std::string& key, const T& fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument("config field '" + key + "': wrong type");
  }
}

const char* mode_name(OptMode mode) {
  return mode == OptMode::kGradientDescent ? "gd" : "sgd";
}

}  // namespace

ExperimentConfig config_from_json_text(const std::string& text) {
  json parsed;
  try {
    parsed = json::parse(text);
  } catch (const json::parse_error& err) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + err.what());
  }
  if (!parsed.is_object()) {
    throw std::invalid_argument("config must be a JSON object");
  }

  static const std::vector<std::string> known = {
      "architecture", "total_nodes", "participants", "rounds",
      "interval_length", "epsilon", "eta", "mode", "sgd_batch_size",
      "num_train", "num_test", "noise_ratio", "seed", "output"};
  for (const auto& item : parsed.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      throw std::invalid_argument("config field '" + item.key() + "': unknown key");
    }
  }

  ExperimentConfig config;
  config.architecture = get_field(parsed, "architecture", config.architecture);
  config.fed.total_nodes = get_field(parsed, "total_nodes", config.fed.total_nodes);
  config.fed.participants = get_field(parsed, "participants", config.fed.participants);
  config.fed.sync_rounds = get_field(parsed, "rounds", config.fed.sync_rounds);
  config.fed.interval_length =
      get_field(parsed, "interval_length", config.fed.interval_length);
  config.fed.epsilon = get_field(parsed, "epsilon", config.fed.epsilon);
  config.fed.eta = get_field(parsed, "eta", config.fed.eta);
  const std::string mode =
      get_field<std::string>(parsed, "mode", mode_name(config.fed.mode));
  if (mode == "gd") {
    config.fed.mode = OptMode::kGradientDescent;
  } else if (mode == "sgd") {
    config.fed.mode = OptMode::kStochastic;
  } else {
    throw std::invalid_argument("config field 'mode': expected \"gd\" or \"sgd\"");
  }
  config.fed.sgd_batch_size =
      get_field(parsed, "sgd_batch_size", config.fed.sgd_batch_size);
  config.num_train = get_field(parsed, "num_train", config.num_train);
  config.num_test = get_field(parsed, "num_test", config.num_test);
  config.noise_ratio = get_field(parsed, "noise_ratio", config.noise_ratio);
  config.fed.seed = get_field(parsed, "seed", config.fed.seed);
  config.output = get_field(parsed, "output", config.output);
  return config;
}

std::string config_to_json_text(const ExperimentConfig& config) {
  json j;
  j["architecture"] = config.architecture;
  j["total_nodes"] = config.fed.total_nodes;
  j["participants"] = config.fed.participants;
  j["rounds"] = config.fed.sync_rounds;
  j["interval_length"] = config.fed.interval_length;
  j["epsilon"] = config.fed.epsilon;
  j["eta"] = config.fed.eta;
  j["mode"] = mode_name(config.fed.mode);
  j["sgd_batch_size"] = config.fed.sgd_batch_size;
  j["num_train"] = config.num_train;
  j["num_test"] = config.num_test;
  j["noise_ratio"] = config.noise_ratio;
  j["seed"] = config.fed.seed;
  j["output"] = config.output;
  if (!config.preset.empty()) j["preset"] = config.preset;
  return j.dump(2) + "\n";
}

void MetricsRow::validate() const {
  const double slack = 1e-9;
  if (train_fidelity < -slack || train_fidelity > 1.0 + slack ||
      test_fidelity < -slack || test_fidelity > 1.0 + slack) {
    throw std::runtime_error("metrics row " + std::to_string(round) +
                             ": fidelity outside [0, 1]");
  }
  if (train_mse < -slack || test_mse < -slack) {
    throw std::runtime_error("metrics row " + std::to_string(round) +
                             ": negative mse");
  }
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "round,train_fidelity,train_mse,test_fidelity,test_mse\n";
  char buf[256];
  for (const MetricsRow& row : rows) {
    row.validate();
    std::snprintf(buf, sizeof(buf), "%d,%.15g,%.15g,%.15g,%.15g\n", row.round,
                  row.train_fidelity, row.train_mse, row.test_fidelity, row.test_mse);
    out << buf;
  }
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::vector<MetricsRow> run_metrics(const ExperimentConfig& config,
                                    const RoundObserver& observer) {
  config.validate();

  const DatasetSpec spec = config.dataset_spec();
  Rng data_rng(spec.seed);
  GeneratedDataset dataset = generate(spec, data_rng);

  std::vector<NodeState> nodes;
  nodes.reserve(dataset.data.node_data.size());
  for (std::size_t n = 0; n < dataset.data.node_data.size(); ++n) {
    nodes.push_back(NodeState{static_cast<int>(n), std::move(dataset.data.node_data[n])});
  }

  const TrainingResult result = quanfed_ps(config.fed, config.network_arch(), nodes,
                                           dataset.data.test_data, nullptr, observer);

  std::vector<MetricsRow> rows;
  rows.reserve(result.reports.size());
  for (const RoundReport& report : result.reports) {
    rows.push_back(MetricsRow{report.round, report.train_fidelity, report.train_mse,
                              report.test_fidelity, report.test_mse});
  }
  return rows;
}

RunSummary run_experiment(const ExperimentConfig& config, const std::string& out_dir) {
  RunSummary summary;
  summary.rows = run_metrics(config);

  namespace fs = std::filesystem;
  const fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
  fs::create_directories(dir);
  const fs::path csv_path = dir / config.output;
  fs::path echo_path = csv_path;
  echo_path.replace_extension(".config.json");

  write_metrics_csv(csv_path.string(), summary.rows);
  {
    std::ofstream echo(echo_path, std::ios::binary);
    if (!echo) throw std::runtime_error("cannot open '" + echo_path.string() + "'");
    echo << config_to_json_text(config);
  }

  summary.csv_path = csv_path.string();
  summary.config_echo_path = echo_path.string();
  return summary;
}

namespace {

std::string format_double_tag(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", value);
  return buf;
}

std::string arch_tag(const std::vector<int>& widths) {
  std::string tag;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (i) tag += '-';
    tag += std::to_string(widths[i]);
  }
  return tag;
}

}  // namespace

std::vector<ExperimentConfig> preset_configs(const std::string& name,
                                             std::uint64_t seed) {
  ExperimentConfig base;
  base.fed.seed = seed;
  base.preset = name;

  std::vector<ExperimentConfig> points;
  if (name == "interval") {
    for (int interval : {1, 2, 4}) {
      ExperimentConfig point = base;
      point.fed.interval_length = interval;
      point.output = "interval_il" + std::to_string(interval) + ".csv";
      points.push_back(point);
    }
    ExperimentConfig sgd = base;
    sgd.fed.interval_length = 2;
    sgd.fed.mode = OptMode::kStochastic;
    sgd.fed.sgd_batch_size = 5;
    sgd.output = "interval_il2_sgd.csv";
    points.push_back(sgd);
  } else if (name == "noise") {
    // Interval length 2 so the 50-round budget reaches convergence; the
    // robustness comparison is about converged runs, not training speed.
    for (int pct = 10; pct <= 90; pct += 10) {
      ExperimentConfig point = base;
      point.noise_ratio = pct / 100.0;
      point.fed.interval_length = 2;
      point.output = "noise_" + std::to_string(pct) + "pct.csv";
      points.push_back(point);
    }
  } else if (name == "arch") {
    for (const std::vector<int>& widths :
         {std::vector<int>{2, 2}, {2, 3, 2}, {1, 2, 1}, {2, 3, 3, 2}}) {
      ExperimentConfig point = base;
      point.architecture = widths;
      point.output = "arch_" + arch_tag(widths) + ".csv";
      points.push_back(point);
    }
  } else if (name == "epsilon") {
    for (double eps : {0.01, 0.05, 0.1, 0.2, 0.5}) {
      ExperimentConfig point = base;
      point.fed.epsilon = eps;
      point.output = "epsilon_" + format_double_tag(eps) + ".csv";
      points.push_back(point);
    }
  } else if (name == "eta") {
    for (double eta : {0.33, 0.5, 1.0, 1.25, 2.0, 5.0}) {
      ExperimentConfig point = base;
      point.fed.eta = eta;
      point.output = "eta_" + format_double_tag(eta) + ".csv";
      points.push_back(point);
    }
  } else if (name == "participants") {
    for (int np : {1, 2, 5, 10}) {
      ExperimentConfig point = base;
      point.fed.participants = np;
      point.output = "participants_np" + std::to_string(np) + ".csv";
      points.push_back(point);
    }
  } else if (name == "total-nodes") {
    for (int n : {10, 20, 50, 100}) {
      ExperimentConfig point = base;
      point.fed.total_nodes = n;
      point.fed.participants = 10;
      point.output = "total_nodes_n" + std::to_string(n) + ".csv";
      points.push_back(point);
    }
  } else {
    throw std::invalid_argument(
        "unknown preset '" + name +
        "' (expected interval, noise, arch, epsilon, eta, participants, total-nodes)");
  }
  return points;
}

std::vector<RunSummary> run_preset(const std::string& name, const std::string& out_dir,
                                   std::uint64_t seed) {
  const std::vector<ExperimentConfig> points = preset_configs(name, seed);

  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<RunSummary> summaries(points.size());
  std::vector<std::future<void>> in_flight;
  std::size_t next = 0;
  while (next < points.size() || !in_flight.empty()) {
    while (next < points.size() && in_flight.size() < workers) {
      const std::size_t slot = next++;
      in_flight.push_back(std::async(std::launch::async, [&, slot] {
        summaries[slot] = run_experiment(points[slot], out_dir);
      }));
    }
    in_flight.front().get();
    in_flight.erase(in_flight.begin());
  }
  return summaries;
}

}  // namespace qfed
