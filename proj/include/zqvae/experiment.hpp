// experiment.hpp
// Run configuration (JSON blocks data / model / objective / train / qsvc /
// report), dataset preparation, training runs on disk and report tables.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "zqvae/data.hpp"
#include "zqvae/metrics.hpp"
#include "zqvae/objective.hpp"
#include "zqvae/optim.hpp"
#include "zqvae/qsvc.hpp"

namespace zqvae {

struct DataConfig {
  std::string kind = "synthetic-quantum";  // synthetic-quantum | swiss-roll | csv | bundle
  int n = 1000;
  std::uint64_t seed = 0;
  int noise_dims = 5;
  double noise_sd = 0.2;
  std::string path;  // csv file or bundle directory
  std::optional<std::string> label_column;
  double train_ratio = 0.7;
};

struct ModelConfig {
  int n_z = 1;
  int n_aux = 0;                  // encoder ancillas
  std::optional<int> n_aux_decoder;  // default: n_aux
  int n_layers = 3;
};

struct ReportConfig {
  bool bloch_dump = true;
  bool export_kernels = false;
};

struct RunConfig {
  DataConfig data;
  ModelConfig model;
  ObjectiveSpec objective;
  TrainConfig train;
  QsvcConfig qsvc;
  ReportConfig report;
};

// Missing keys take their defaults; unknown keys are rejected. Errors name
// the offending path, e.g. "objective.beta".
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

// Every field, defaults included.
nlohmann::json to_json(const RunConfig& cfg);

// Generates or loads the dataset and ensures it has a train/test split.
Dataset prepare_dataset(const DataConfig& cfg);

ModelSpec model_spec_for(const RunConfig& cfg, int n_x);

struct RunResult {
  ModelSpec spec;
  std::vector<SeedResult> seeds;
  ReportTriple report;
};

// Trains on the train split and evaluates every seed on the test split.
RunResult run_experiment(const RunConfig& cfg, const Dataset& data);

// Writes config.resolved.json, seed_<s>/{params.json,trace.ndjson},
// metrics.json and (for one-qubit latents) bloch.csv.
void write_run(const std::filesystem::path& dir, const RunConfig& cfg, const Dataset& data, const RunResult& run);

nlohmann::json metrics_json(const RunConfig& cfg, const RunResult& run);

// "beta=0:3.5:0.5" -> {0, 0.5, ..., 3.5}. Only beta can be swept.
std::vector<double> parse_beta_sweep(const std::string& spec);

// Directory name used for one value of a sweep.
std::string sweep_dir_name(double beta);

struct ReportTables {
  nlohmann::json rows = nlohmann::json::array();
  std::string csv;
  std::string bloch_csv;
};

// Aggregates completed runs. Each path may be a run directory or a directory
// of run directories (a sweep).
ReportTables aggregate_runs(const std::vector<std::filesystem::path>& paths);

}  // namespace zqvae
