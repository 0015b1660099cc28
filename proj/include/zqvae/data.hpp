// data.hpp
// Dataset generators, CSV ingestion, train/test splitting and the on-disk
// dataset bundle.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "zqvae/qstate.hpp"
#include "zqvae/rng.hpp"

namespace zqvae {

struct Provenance {
  std::string generator;
  std::uint64_t seed = 0;  // set by whoever constructed the generator's Rng
  nlohmann::json params = nlohmann::json::object();
};

struct Split {
  std::vector<int> train;
  std::vector<int> test;
};

struct Dataset {
  std::vector<DensityMatrix> points;
  std::optional<std::vector<int>> labels;  // entries in {-1, +1}
  Split split;
  Provenance provenance;
  bool allows_mixed = false;
  // Position of each point along the generating manifold, when there is one.
  std::optional<std::vector<double>> manifold_coord;

  std::size_t size() const { return points.size(); }
  int n_qubits() const;
  bool has_split() const { return !split.train.empty() || !split.test.empty(); }

  // Purity (unless allows_mixed), equal dimensions, label values and length,
  // and split indices disjoint and in range.
  void validate() const;

  std::vector<DensityMatrix> select(const std::vector<int>& indices) const;
  std::vector<int> select_labels(const std::vector<int>& indices) const;
};

struct SyntheticOptions {
  double radius_lo = 0.6;
  double radius_hi = 0.7;
  double theta_mean = 1.5707963267948966;  // pi / 2
  double theta_sd = 0.15707963267948966;   // pi / 20
};

// Two-qubit states: qubit 0 mixed with Bloch vector r * n (r uniform in
// [radius_lo, radius_hi], n uniform on the sphere), qubit 1 in |0>, then a
// controlled-RY(theta) with qubit 0 as control and theta ~ N(mean, sd).
// The outputs are mixed, so allows_mixed is set.
Dataset gen_synthetic_quantum(int n, Rng& rng, const SyntheticOptions& opts = {});

// Swiss roll (t cos t, h, t sin t), t = 1.5 pi (1 + 2u), h ~ U[0, 21), with
// `noise_dims` Gaussian coordinates appended, L2-normalized per point and
// amplitude-embedded. Labels split t at its median.
Dataset gen_swiss_roll(int n, int noise_dims, double noise_sd, Rng& rng);

struct IngestOptions {
  std::optional<std::string> label_column;
  std::optional<int> n_qubits;  // default: smallest register that fits
  bool balance_classes = true;
  double train_ratio = 0.7;
};

// Reads a header-first CSV, maps the whole feature matrix to [0, pi] with one
// global min/max, L2-normalizes each row, amplitude-embeds, balances classes
// (when labelled) and splits.
Dataset ingest_csv(const std::filesystem::path& path, const IngestOptions& opts, Rng& rng);

// Features after the global min-max and per-row normalization steps.
std::vector<std::vector<double>> normalize_features(const std::vector<std::vector<double>>& rows);

// Random split with round(ratio * n) training points. With `stratify`, each
// class is split separately by the same ratio.
Dataset split(Dataset data, double ratio, bool stratify, Rng& rng);

// Bundle directory: meta.json, states.bin (complex64, each matrix prefixed by
// its uint32 dimension), states_f64.bin (same layout in complex128, read back
// in preference so round trips are exact) and labels.csv.
void write_bundle(const Dataset& data, const std::filesystem::path& dir);
Dataset read_bundle(const std::filesystem::path& dir);

}  // namespace zqvae
