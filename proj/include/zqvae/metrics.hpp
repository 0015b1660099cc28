// metrics.hpp
// Evaluation quantities: reconstruction rate, pairwise-fidelity correlation,
// latent volume and the per-seed f / l / r summary.

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "zqvae/data.hpp"
#include "zqvae/optim.hpp"
#include "zqvae/qsvc.hpp"

namespace zqvae {

// Mean of F(rho_i, D(E(rho_i))).
double reconstruction_rate(const CompiledModel& model, std::span<const DensityMatrix> points);

RMatrix pairwise_fidelity(std::span<const DensityMatrix> states);

// Pearson correlation of the strictly upper triangles of the two pairwise
// fidelity matrices.
double pairwise_fidelity_pcc(std::span<const DensityMatrix> a, std::span<const DensityMatrix> b);

double pearson(std::span<const double> x, std::span<const double> y);

// Quadrature sum of the population standard deviations of the Bloch
// coordinates. Absent for latents wider than one qubit.
std::optional<double> latent_volume(std::span<const DensityMatrix> latents);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};

MeanStd mean_std(std::span<const double> values);

struct SeedMetrics {
  std::uint64_t seed = 0;
  double f = 0.0;
  std::optional<double> l;
  std::optional<double> r;
  std::optional<double> l_auc;
  std::optional<double> r_auc;
  std::optional<double> latent_volume;
  double input_latent_pcc = 0.0;
};

struct ReportTriple {
  MeanStd f;
  std::optional<MeanStd> l;
  std::optional<MeanStd> r;
  std::vector<SeedMetrics> per_seed;
};

// Metrics for one trained seed: f on the test split, l / r from a QSVC
// trained on the train-side latent / reconstructed states (labels needed),
// volume and input-latent PCC over the test split.
SeedMetrics seed_metrics(const ModelSpec& spec, const SeedResult& result, const Dataset& data,
                         const QsvcConfig& qsvc);

ReportTriple report_triple(const ModelSpec& spec, std::span<const SeedResult> results, const Dataset& data,
                           const QsvcConfig& qsvc);

ReportTriple summarize(std::vector<SeedMetrics> per_seed);

}  // namespace zqvae
