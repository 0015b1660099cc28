#include "zqvae/optim.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include <Eigen/LU>
#include "json.hpp"

#include "zqvae/rng.hpp"

namespace zqvae {

void TrainConfig::validate() const {
  if (epochs < 1) throw ValidationError("train.epochs must be >= 1");
  if (patience < 0 || patience > epochs) throw ValidationError("train.patience must lie in [0, epochs]");
  if (!(rho_end > 0.0) || !(rho_end <= rho_begin)) {
    throw ValidationError("train radii must satisfy 0 < rho_end <= rho_begin");
  }
  if (max_fun_per_epoch < 1) throw ValidationError("train.max_fun_per_epoch must be >= 1");
  if (seeds.empty()) throw ValidationError("train.seeds must not be empty");
  if (batch_size && *batch_size < 1) throw ValidationError("train.batch_size must be >= 1");
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::EpochsExhausted: return "epochs_exhausted";
    case StopReason::Patience: return "patience";
    case StopReason::NoParameters: return "no_parameters";
  }
  return "unknown";
}

std::string TrainTrace::to_ndjson() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < evaluations.size(); ++i) {
    out << nlohmann::json{{"type", "eval"}, {"index", i}, {"epoch", evaluation_epoch[i]}, {"value", evaluations[i]}}
               .dump()
        << '\n';
  }
  for (std::size_t e = 0; e < epoch_best.size(); ++e) {
    out << nlohmann::json{{"type", "epoch"}, {"epoch", e}, {"best", epoch_best[e]}}.dump() << '\n';
  }
  std::vector<double> params(best_params.data(), best_params.data() + best_params.size());
  out << nlohmann::json{{"type", "summary"},
                        {"initial", initial_value},
                        {"best", best_value},
                        {"stop", to_string(stop)},
                        {"params", params}}
             .dump()
      << '\n';
  return out.str();
}

namespace {

constexpr double kAlpha = 0.25;      // min vertex distance from opposite face, in units of rho
constexpr double kBeta = 2.1;        // max edge length from the best vertex, in units of rho
constexpr double kGamma = 0.5;       // geometry step length
constexpr double kPoorRatio = 0.1;

struct Simplex {
  Eigen::MatrixXd d;     // row j: x_{j+1} - x_0
  Eigen::MatrixXd dinv;
  Eigen::VectorXd grad;
  Eigen::VectorXd sigma; // distance of vertex j+1 from its opposite face
  Eigen::VectorXd eta;   // length of edge j
  bool invertible = false;
};

}  // namespace

CobylaResult cobyla(const ObjectiveFn& objective, const RVector& x0, double f0, double rho_begin, double rho_end,
                    int max_fun, const std::function<void(double)>& record) {
  const Eigen::Index n = x0.size();
  CobylaResult result{x0, f0, 0, false};
  if (n == 0) {
    result.converged = true;
    return result;
  }

  auto eval = [&](const RVector& x) {
    const double f = objective(x);
    ++result.evaluations;
    if (record) record(f);
    if (!std::isfinite(f)) throw RuntimeFailure("objective returned a non-finite value");
    if (f < result.f) {
      result.f = f;
      result.x = x;
    }
    return f;
  };

  std::vector<RVector> xs(static_cast<std::size_t>(n) + 1, x0);
  std::vector<double> fs(static_cast<std::size_t>(n) + 1, f0);
  double rho = rho_begin;

  auto build_axis_simplex = [&]() -> bool {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (result.evaluations >= max_fun) return false;
      xs[j + 1] = xs[0];
      xs[j + 1](j) += rho;
      fs[j + 1] = eval(xs[j + 1]);
    }
    return true;
  };
  if (!build_axis_simplex()) return result;

  auto analyse = [&]() {
    std::size_t best = 0;
    for (std::size_t j = 1; j < fs.size(); ++j) {
      if (fs[j] < fs[best]) best = j;
    }
    std::swap(xs[0], xs[best]);
    std::swap(fs[0], fs[best]);
    Simplex s;
    s.d.resize(n, n);
    Eigen::VectorXd df(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      s.d.row(j) = (xs[j + 1] - xs[0]).transpose();
      df(j) = fs[j + 1] - fs[0];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(s.d);
    s.invertible = lu.isInvertible();
    if (!s.invertible) return s;
    s.dinv = lu.inverse();
    s.grad = s.dinv * df;
    s.sigma.resize(n);
    s.eta.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      s.sigma(j) = 1.0 / s.dinv.col(j).norm();
      s.eta(j) = s.d.row(j).norm();
    }
    return s;
  };

  bool pending_poor = false;
  while (result.evaluations < max_fun) {
    const Simplex s = analyse();
    if (!s.invertible) {
      if (!build_axis_simplex()) break;
      continue;
    }
    const bool acceptable = s.sigma.minCoeff() >= kAlpha * rho && s.eta.maxCoeff() <= kBeta * rho;

    if (pending_poor) {
      pending_poor = false;
      if (!acceptable) {
        Eigen::Index j = 0;
        if (s.eta.maxCoeff(&j) <= kBeta * rho) s.sigma.minCoeff(&j);
        RVector step = s.dinv.col(j).normalized() * (kGamma * rho);
        if (s.grad.dot(step) > 0.0) step = -step;
        xs[j + 1] = xs[0] + step;
        fs[j + 1] = eval(xs[j + 1]);
        continue;
      }
      if (rho <= rho_end) {
        result.converged = true;
        break;
      }
      rho *= 0.5;
      if (rho <= 1.5 * rho_end) rho = rho_end;
      continue;
    }

    const double gnorm = s.grad.norm();
    if (!(gnorm > 0.0)) {
      pending_poor = true;
      continue;
    }
    const RVector step = -rho / gnorm * s.grad;
    const RVector xt = xs[0] + step;
    const double ft = eval(xt);
    const double ratio = (fs[0] - ft) / (rho * gnorm);

    // Replace the vertex whose removal keeps the simplex volume largest,
    // weighted against vertices far from the incumbent.
    const Eigen::VectorXd coeff = s.dinv.transpose() * step;
    const RVector& anchor = ft < fs[0] ? xt : xs[0];
    Eigen::Index drop = -1;
    double best_score = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double dist = (xs[j + 1] - anchor).norm() / rho;
      const double score = std::abs(coeff(j)) * std::max(1.0, dist * dist);
      if (score > best_score) {
        best_score = score;
        drop = j + 1;
      }
    }
    if (ft < fs[0] && std::abs(1.0 - coeff.sum()) > best_score) drop = 0;
    if (drop >= 0) {
      xs[drop] = xt;
      fs[drop] = ft;
    }
    if (ratio < kPoorRatio) pending_poor = true;
  }
  return result;
}

namespace {

MinimizeResult run_epochs(const std::function<ObjectiveFn(int)>& objective_for_epoch, const RVector& x0,
                          const TrainConfig& cfg, bool reevaluate) {
  MinimizeResult out;
  TrainTrace& trace = out.trace;
  int current_epoch = -1;
  auto record = [&](double f) {
    trace.evaluations.push_back(f);
    trace.evaluation_epoch.push_back(current_epoch);
    if (!std::isfinite(f)) {
      throw NonFiniteObjective("objective returned a non-finite value at evaluation " +
                                   std::to_string(trace.evaluations.size() - 1) + " (epoch " +
                                   std::to_string(current_epoch) + ")",
                               trace);
    }
  };

  ObjectiveFn objective = objective_for_epoch(0);
  const double f0 = objective(x0);
  record(f0);
  trace.initial_value = f0;
  out.x_best = x0;
  double best = f0;
  trace.best_params = x0;
  trace.best_value = f0;
  if (x0.size() == 0) {
    trace.stop = StopReason::NoParameters;
    return out;
  }

  int stall = 0;
  trace.stop = StopReason::EpochsExhausted;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    current_epoch = epoch;
    double start = best;
    if (reevaluate && epoch > 0) {
      objective = objective_for_epoch(epoch);
      start = objective(out.x_best);
      record(start);
      best = start;
    }
    const CobylaResult r = cobyla(objective, out.x_best, start, cfg.rho_begin, cfg.rho_end,
                                  cfg.max_fun_per_epoch, record);
    trace.epoch_best.push_back(r.f);
    const bool improved = r.f < best - 1e-6;
    if (r.f < best) {
      best = r.f;
      out.x_best = r.x;
    }
    stall = improved ? 0 : stall + 1;
    if (cfg.patience > 0 && stall >= cfg.patience) {
      trace.stop = StopReason::Patience;
      break;
    }
  }
  trace.best_params = out.x_best;
  trace.best_value = best;
  return out;
}

}  // namespace

MinimizeResult minimize(const ObjectiveFn& objective, const RVector& x0, const TrainConfig& cfg) {
  cfg.validate();
  return run_epochs([&](int) { return objective; }, x0, cfg, false);
}

MinimizeResult minimize_epochs(const std::function<ObjectiveFn(int)>& objective_for_epoch, const RVector& x0,
                               const TrainConfig& cfg) {
  cfg.validate();
  return run_epochs(objective_for_epoch, x0, cfg, true);
}

ModelParams initial_params(const ModelSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  RVector flat(total_param_count(spec));
  for (Eigen::Index i = 0; i < flat.size(); ++i) flat(i) = rng.uniform(-std::numbers::pi, std::numbers::pi);
  return unflatten(spec, flat);
}

int worker_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("ZQVAE_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return n;
}

std::vector<SeedResult> train(const ModelSpec& model, const ObjectiveSpec& objective,
                              std::span<const DensityMatrix> training_points, const TrainConfig& cfg) {
  cfg.validate();
  model.validate();
  objective.validate();
  if (training_points.empty()) throw ValidationError("train: empty training set");

  const auto n_points = static_cast<int>(training_points.size());
  const bool batched = cfg.batch_size && *cfg.batch_size < n_points;
  auto factory = [&](int epoch) -> ObjectiveFn {
    if (!batched) return make_objective(objective, model, training_points);
    const int b = *cfg.batch_size;
    auto window = std::make_shared<std::vector<DensityMatrix>>();
    for (int k = 0; k < b; ++k) window->push_back(training_points[(epoch * b + k) % n_points]);
    ObjectiveFn inner = make_objective(objective, model, *window);
    return [window, inner](const RVector& x) { return inner(x); };
  };

  std::vector<SeedResult> results(cfg.seeds.size());
  std::vector<std::exception_ptr> errors(cfg.seeds.size());
  auto run_one = [&](std::size_t k) {
    try {
      const std::uint64_t seed = cfg.seeds[k];
      const RVector x0 = flatten(initial_params(model, seed));
      MinimizeResult r = batched ? minimize_epochs(factory, x0, cfg) : minimize(factory(0), x0, cfg);
      results[k] = SeedResult{seed, unflatten(model, r.x_best), std::move(r.trace)};
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };

  const auto workers = static_cast<std::size_t>(worker_count());
  if (workers <= 1 || cfg.seeds.size() == 1) {
    for (std::size_t k = 0; k < cfg.seeds.size(); ++k) run_one(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, cfg.seeds.size()); ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < cfg.seeds.size(); k = next++) run_one(k);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

}  // namespace zqvae
