#include "zqvae/objective.hpp"

#include <cmath>
#include <memory>

namespace zqvae {

std::string_view to_string(ObjectiveMode mode) {
  return mode == ObjectiveMode::Global ? "global" : "instance";
}

ObjectiveMode parse_objective_mode(std::string_view name) {
  if (name == "global") return ObjectiveMode::Global;
  if (name == "instance") return ObjectiveMode::Instance;
  throw ValidationError("unknown objective mode '" + std::string(name) + "' (expected global or instance)");
}

void ObjectiveSpec::validate() const {
  check_loss_role(recon, LossRole::Reconstruction);
  check_loss_role(reg, LossRole::Regularization);
  if (!std::isfinite(beta)) throw ValidationError("beta must be finite");
}

namespace {

Channel round_trip(const CompiledModel& model) {
  return [&model](const DensityMatrix& rho) { return model.reconstruct(rho); };
}

}  // namespace

InstanceEval eval_instance(const ObjectiveSpec& spec, const CompiledModel& model,
                           std::span<const DensityMatrix> points) {
  spec.validate();
  if (points.empty()) throw ValidationError("eval_instance: empty dataset");
  InstanceEval out;
  out.recon_terms.reserve(points.size());
  out.reg_terms.reserve(points.size());
  const bool wasserstein = spec.recon == LossKind::WassersteinAux;
  const std::optional<CostObservable> cost =
      wasserstein ? std::optional<CostObservable>(default_cost(model.spec().n_x())) : std::nullopt;
  for (const auto& rho : points) {
    const DensityMatrix zeta = model.encode(rho);
    if (wasserstein) {
      const double w = 1.0;
      out.recon_terms.push_back(
          wasserstein_aux_ensemble(std::span(&w, 1), std::span(&rho, 1), round_trip(model), *cost));
    } else {
      out.recon_terms.push_back(reconstruction_divergence(rho, model.decode(zeta), spec.recon));
    }
    out.reg_terms.push_back(regularization(zeta, spec.reg));
  }
  double recon_sum = 0.0;
  double reg_sum = 0.0;
  for (double v : out.recon_terms) recon_sum += v;
  for (double v : out.reg_terms) reg_sum += v;
  out.total = recon_sum + spec.beta * reg_sum;
  return out;
}

InstanceEval eval_instance(const ObjectiveSpec& spec, const ModelSpec& model_spec, const ModelParams& params,
                           std::span<const DensityMatrix> points) {
  return eval_instance(spec, CompiledModel(model_spec, params), points);
}

GlobalEval eval_global(const ObjectiveSpec& spec, const CompiledModel& model, const GlobalState& global) {
  spec.validate();
  GlobalEval out;
  const DensityMatrix zeta = model.encode(global.rho());
  if (spec.recon == LossKind::WassersteinAux) {
    const auto& members = global.components();
    const std::vector<double> weights(members.size(), 1.0 / static_cast<double>(members.size()));
    out.recon = wasserstein_aux_ensemble(weights, members, round_trip(model), default_cost(model.spec().n_x()));
  } else {
    out.recon = reconstruction_divergence(global.rho(), model.decode(zeta), spec.recon);
  }
  out.reg = regularization(zeta, spec.reg);
  out.total = out.recon + spec.beta * out.reg;
  return out;
}

GlobalEval eval_global(const ObjectiveSpec& spec, const ModelSpec& model_spec, const ModelParams& params,
                       const GlobalState& global) {
  return eval_global(spec, CompiledModel(model_spec, params), global);
}

int total_param_count(const ModelSpec& spec) {
  return spec.encoder.ansatz().param_count() + spec.decoder.ansatz().param_count();
}

RVector flatten(const ModelParams& params) {
  RVector flat(params.theta_e.size() + params.theta_d.size());
  flat << params.theta_e, params.theta_d;
  return flat;
}

ModelParams unflatten(const ModelSpec& spec, const RVector& flat) {
  const Eigen::Index ne = spec.encoder.ansatz().param_count();
  const Eigen::Index nd = spec.decoder.ansatz().param_count();
  if (flat.size() != ne + nd) {
    throw DimensionError("model expects " + std::to_string(ne + nd) + " parameters, got " +
                         std::to_string(flat.size()));
  }
  return ModelParams{flat.head(ne), flat.tail(nd)};
}

std::function<double(const RVector&)> make_objective(const ObjectiveSpec& spec, const ModelSpec& model_spec,
                                                     std::span<const DensityMatrix> points) {
  spec.validate();
  model_spec.validate();
  if (points.empty()) throw ValidationError("objective over an empty dataset");
  if (spec.mode == ObjectiveMode::Global) {
    auto global = std::make_shared<GlobalState>(points);
    return [spec, model_spec, global](const RVector& flat) {
      return eval_global(spec, CompiledModel(model_spec, unflatten(model_spec, flat)), *global).total;
    };
  }
  return [spec, model_spec, points](const RVector& flat) {
    return eval_instance(spec, CompiledModel(model_spec, unflatten(model_spec, flat)), points).total;
  };
}

ElboReport check_elbo_bound(const ModelSpec& model_spec, const ModelParams& params,
                            std::span<const DensityMatrix> points) {
  const CompiledModel model(model_spec, params);
  const GlobalState global(points);
  const DensityMatrix zeta_gen = maximally_mixed(model_spec.n_z());
  const DensityMatrix sigma_gen = model.decode(zeta_gen);
  const DensityMatrix zeta_glob = model.encode(global.rho());
  const DensityMatrix sigma_glob = model.decode(zeta_glob);
  ElboReport report;
  report.lhs = -kld(global.rho(), sigma_gen);
  report.rhs = -kld(global.rho(), sigma_glob) - kld(zeta_glob, zeta_gen);
  return report;
}

double EquivalenceReport::residual() const {
  return std::abs(global_total - instance_total / static_cast<double>(n_points));
}

EquivalenceReport check_global_instance_equiv(const ObjectiveSpec& spec, const ModelSpec& model_spec,
                                              const ModelParams& params, std::span<const DensityMatrix> points) {
  const CompiledModel model(model_spec, params);
  EquivalenceReport report;
  report.n_points = static_cast<int>(points.size());
  report.instance_total = eval_instance(spec, model, points).total;
  report.global_total = eval_global(spec, model, GlobalState(points)).total;
  return report;
}

}  // namespace zqvae
