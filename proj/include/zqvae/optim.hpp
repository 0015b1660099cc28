// optim.hpp
// Derivative-free training: a COBYLA-style linear-model trust-region
// minimizer with epoch restarts and patience, plus multi-seed training.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zqvae/objective.hpp"

namespace zqvae {

using ObjectiveFn = std::function<double(const RVector&)>;

struct TrainConfig {
  int epochs = 60;
  int patience = 20;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  double rho_begin = 0.5;
  double rho_end = 1e-4;
  int max_fun_per_epoch = 250;
  // Points per epoch; nullopt means the full training set. Each epoch sees a
  // fixed window of the data so the objective stays deterministic inside it.
  std::optional<int> batch_size;

  void validate() const;
};

enum class StopReason { EpochsExhausted, Patience, NoParameters };
std::string_view to_string(StopReason reason);

struct TrainTrace {
  std::vector<double> evaluations;   // every objective value, in call order
  std::vector<int> evaluation_epoch; // epoch of each evaluation (-1 for x0)
  std::vector<double> epoch_best;    // best value found inside each epoch
  RVector best_params;
  double best_value = 0.0;
  double initial_value = 0.0;
  StopReason stop = StopReason::EpochsExhausted;

  // Line-delimited JSON records; byte-identical for identical runs.
  std::string to_ndjson() const;
};

// Thrown when the objective returns NaN or infinity. Carries the trace so far.
class NonFiniteObjective : public RuntimeFailure {
 public:
  NonFiniteObjective(const std::string& what, TrainTrace trace)
      : RuntimeFailure(what), trace_(std::move(trace)) {}
  const TrainTrace& trace() const { return trace_; }

 private:
  TrainTrace trace_;
};

struct CobylaResult {
  RVector x;
  double f = 0.0;
  int evaluations = 0;
  bool converged = false;  // radius reached rho_end (as opposed to budget)
};

// One trust-region run from x0 (whose value f0 is already known). Every
// evaluation is passed to `record`.
CobylaResult cobyla(const ObjectiveFn& objective, const RVector& x0, double f0, double rho_begin, double rho_end,
                    int max_fun, const std::function<void(double)>& record);

struct MinimizeResult {
  RVector x_best;
  TrainTrace trace;
};

// Epoch loop: each epoch restarts the trust region at the incumbent with
// radius rho_begin. The seeds field of cfg is not used here.
MinimizeResult minimize(const ObjectiveFn& objective, const RVector& x0, const TrainConfig& cfg);

// Same, with an objective that may change between epochs (minibatching).
MinimizeResult minimize_epochs(const std::function<ObjectiveFn(int epoch)>& objective_for_epoch,
                               const RVector& x0, const TrainConfig& cfg);

struct SeedResult {
  std::uint64_t seed = 0;
  ModelParams params;
  TrainTrace trace;
};

// Parameters uniform in [-pi, pi), encoder block first.
ModelParams initial_params(const ModelSpec& spec, std::uint64_t seed);

// One result per seed, in cfg.seeds order. Seeds run on up to
// worker_count() threads.
std::vector<SeedResult> train(const ModelSpec& model, const ObjectiveSpec& objective,
                              std::span<const DensityMatrix> training_points, const TrainConfig& cfg);

// min(hardware threads, ZQVAE_THREADS if set), at least 1.
int worker_count();

}  // namespace zqvae
