// qsvc.hpp
// Quantum-kernel support vector classifier: fidelity kernel through an
// ansatz feature map, soft-margin dual SVM solved by SMO, accuracy and AUC.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zqvae/channel.hpp"

namespace zqvae {

enum class KernelScaling { None, TanRescale };

std::string_view to_string(KernelScaling scaling);
KernelScaling parse_kernel_scaling(std::string_view name);

// x -> tan(pi x / 2.03); finite on [0, 1].
double tan_rescale(double x);

struct KernelSpec {
  AnsatzSpec feature_map;
  KernelScaling scaling = KernelScaling::TanRescale;

  void validate() const;
};

// K[i, j] = g(F(U rho_i U^dag, U rho_j U^dag)), U the feature-map unitary.
// The diagonal is g(1).
RMatrix kernel_matrix(std::span<const DensityMatrix> states, const KernelSpec& spec, const AnsatzParams& params);

// Rows index `rows`, columns index `cols`.
RMatrix cross_kernel(std::span<const DensityMatrix> rows, std::span<const DensityMatrix> cols,
                     const KernelSpec& spec, const AnsatzParams& params);

struct SvmModel {
  RVector alpha;
  double bias = 0.0;
  std::vector<int> support;  // indices with alpha > 0
  std::vector<int> labels;   // training labels
  double c_reg = 1.0;
  double diagonal_shift = 0.0;  // added to K's diagonal when it was not PSD
  int iterations = 0;
};

// Soft-margin dual, SMO with second-order working-set selection, stopping at
// KKT violation <= tol. Labels must be -1 or +1.
SvmModel fit(const RMatrix& kernel, std::span<const int> labels, double c_reg, double tol = 1e-5);

// sum_i alpha_i y_i K[t, i] + b for every row t of `k_test_train`.
RVector decision_values(const SvmModel& model, const RMatrix& k_test_train);

struct Evaluation {
  double accuracy = 0.0;
  std::optional<double> auc;  // absent when the test set has a single class
};

// Predicts +1 where the decision value is >= 0.
Evaluation evaluate(const SvmModel& model, const RMatrix& k_test_train, std::span<const int> labels);

// Mann-Whitney estimate with tied scores given averaged ranks.
std::optional<double> auc_score(std::span<const double> scores, std::span<const int> labels);

struct QsvcConfig {
  int n_layers = 3;
  KernelScaling scaling = KernelScaling::TanRescale;
  double c_reg = 1.0;
  std::uint64_t feature_seed = 0;

  void validate() const;
};

// Feature-map parameters drawn uniformly from [-pi, pi).
AnsatzParams feature_map_params(const AnsatzSpec& spec, std::uint64_t seed);

// Builds the kernel for the given states' register, fits on the training
// side and evaluates on the test side.
Evaluation train_and_evaluate(std::span<const DensityMatrix> train, std::span<const int> train_labels,
                              std::span<const DensityMatrix> test, std::span<const int> test_labels,
                              const QsvcConfig& cfg);

void write_matrix_csv(const RMatrix& m, const std::filesystem::path& path);

}  // namespace zqvae
