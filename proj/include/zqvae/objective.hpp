// objective.hpp
// Global and instance-level training objectives over an encoder/decoder pair,
// and the two analytic property checks that go with them.

#pragma once

#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "zqvae/channel.hpp"
#include "zqvae/losses.hpp"

namespace zqvae {

enum class ObjectiveMode { Global, Instance };

std::string_view to_string(ObjectiveMode mode);
ObjectiveMode parse_objective_mode(std::string_view name);

struct ObjectiveSpec {
  LossKind recon = LossKind::Fidelity;
  LossKind reg = LossKind::JSD;
  double beta = 0.0;  // no sign restriction
  ObjectiveMode mode = ObjectiveMode::Instance;

  void validate() const;
};

struct InstanceEval {
  double total = 0.0;
  std::vector<double> recon_terms;
  std::vector<double> reg_terms;
};

struct GlobalEval {
  double total = 0.0;
  double recon = 0.0;
  double reg = 0.0;
};

// sum_i L1(rho_i, sigma_i) + beta * sum_i L2(zeta_i, I/d), summed left to right.
InstanceEval eval_instance(const ObjectiveSpec& spec, const CompiledModel& model,
                           std::span<const DensityMatrix> points);
InstanceEval eval_instance(const ObjectiveSpec& spec, const ModelSpec& model_spec, const ModelParams& params,
                           std::span<const DensityMatrix> points);

// L1(rho_glob, sigma_glob) + beta * L2(zeta_glob, I/d). The Wasserstein
// reconstruction term couples through the dataset ensemble (see
// wasserstein_aux_ensemble).
GlobalEval eval_global(const ObjectiveSpec& spec, const CompiledModel& model, const GlobalState& global);
GlobalEval eval_global(const ObjectiveSpec& spec, const ModelSpec& model_spec, const ModelParams& params,
                       const GlobalState& global);

// Flat parameter vector [theta_e, theta_d].
RVector flatten(const ModelParams& params);
ModelParams unflatten(const ModelSpec& spec, const RVector& flat);
int total_param_count(const ModelSpec& spec);

// Objective value as a function of the flat parameter vector, in the mode
// selected by spec.mode.
std::function<double(const RVector&)> make_objective(const ObjectiveSpec& spec, const ModelSpec& model_spec,
                                                     std::span<const DensityMatrix> points);

// -S(rho_glob | sigma_gen) >= -S(rho_glob | sigma_glob) - S(zeta_glob | zeta_gen)
// with sigma_gen = D(I/d).
struct ElboReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 1e-6;

  double gap() const { return lhs - rhs; }
  bool holds() const { return lhs >= rhs - slack; }
};

ElboReport check_elbo_bound(const ModelSpec& model_spec, const ModelParams& params,
                            std::span<const DensityMatrix> points);

// |eval_global.total - eval_instance.total / N|.
struct EquivalenceReport {
  double global_total = 0.0;
  double instance_total = 0.0;
  int n_points = 0;
  double tolerance = 1e-9;

  double residual() const;
  bool holds() const { return residual() <= tolerance; }
};

EquivalenceReport check_global_instance_equiv(const ObjectiveSpec& spec, const ModelSpec& model_spec,
                                              const ModelParams& params, std::span<const DensityMatrix> points);

}  // namespace zqvae
