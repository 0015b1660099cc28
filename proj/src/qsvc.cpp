#include "zqvae/qsvc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <numbers>

#include "zqvae/losses.hpp"
#include "zqvae/rng.hpp"

namespace zqvae {

std::string_view to_string(KernelScaling scaling) {
  return scaling == KernelScaling::None ? "none" : "tan";
}

KernelScaling parse_kernel_scaling(std::string_view name) {
  if (name == "none") return KernelScaling::None;
  if (name == "tan") return KernelScaling::TanRescale;
  throw ValidationError("unknown kernel scaling '" + std::string(name) + "' (expected none or tan)");
}

double tan_rescale(double x) { return std::tan(std::numbers::pi * x / 2.03); }

void KernelSpec::validate() const {
  feature_map.validate();
  if (feature_map.n_layers < 1) throw ValidationError("feature map needs at least one layer");
}

namespace {

// Feature-mapped states with what the fidelity needs precomputed.
struct Mapped {
  std::vector<CMatrix> mats;
  std::vector<CMatrix> roots;  // empty for pure states
};

Mapped map_states(std::span<const DensityMatrix> states, const KernelSpec& spec, const AnsatzParams& params) {
  spec.validate();
  const CMatrix u = build_unitary(spec.feature_map, params);
  Mapped out;
  for (const auto& s : states) {
    if (s.n_qubits() != spec.feature_map.n_qubits) {
      throw DimensionError("kernel feature map acts on " + std::to_string(spec.feature_map.n_qubits) +
                           " qubits, state has " + std::to_string(s.n_qubits()));
    }
    CMatrix m = symmetrize(u * s.matrix() * u.adjoint());
    if (s.is_pure()) {
      out.roots.emplace_back();
    } else {
      out.roots.push_back(mat_func(m, [](double x) { return std::sqrt(x); }, 0.0));
    }
    out.mats.push_back(std::move(m));
  }
  return out;
}

double mapped_fidelity(const Mapped& a, std::size_t i, const Mapped& b, std::size_t j) {
  if (a.roots[i].size() == 0) return std::clamp((a.mats[i].cwiseProduct(b.mats[j].transpose())).sum().real(), 0.0, 1.0);
  if (b.roots[j].size() == 0) return std::clamp((b.mats[j].cwiseProduct(a.mats[i].transpose())).sum().real(), 0.0, 1.0);
  const CMatrix inner = a.roots[i] * b.mats[j] * a.roots[i];
  const auto values = eigh(inner).values;
  double acc = 0.0;
  for (Eigen::Index k = 0; k < values.size(); ++k) acc += std::sqrt(std::max(values(k), 0.0));
  return std::clamp(acc * acc, 0.0, 1.0);
}

double scale(double f, KernelScaling scaling) { return scaling == KernelScaling::TanRescale ? tan_rescale(f) : f; }

}  // namespace

RMatrix kernel_matrix(std::span<const DensityMatrix> states, const KernelSpec& spec, const AnsatzParams& params) {
  const Mapped m = map_states(states, spec, params);
  const auto n = static_cast<Eigen::Index>(states.size());
  RMatrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = scale(1.0, spec.scaling);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      k(i, j) = k(j, i) = scale(mapped_fidelity(m, i, m, j), spec.scaling);
    }
  }
  return k;
}

RMatrix cross_kernel(std::span<const DensityMatrix> rows, std::span<const DensityMatrix> cols,
                     const KernelSpec& spec, const AnsatzParams& params) {
  const Mapped a = map_states(rows, spec, params);
  const Mapped b = map_states(cols, spec, params);
  RMatrix k(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (Eigen::Index i = 0; i < k.rows(); ++i) {
    for (Eigen::Index j = 0; j < k.cols(); ++j) k(i, j) = scale(mapped_fidelity(a, i, b, j), spec.scaling);
  }
  return k;
}

SvmModel fit(const RMatrix& kernel, std::span<const int> labels, double c_reg, double tol) {
  const Eigen::Index n = kernel.rows();
  if (kernel.cols() != n) throw DimensionError("kernel matrix must be square");
  if (static_cast<Eigen::Index>(labels.size()) != n) throw DimensionError("label count does not match kernel");
  if (n == 0) throw ValidationError("fit: empty training set");
  if (!(c_reg > 0.0)) throw ValidationError("c_reg must be positive");
  if ((kernel - kernel.transpose()).cwiseAbs().maxCoeff() > 1e-9) throw ValidationError("kernel is not symmetric");
  for (int y : labels) {
    if (y != 1 && y != -1) throw ValidationError("labels must be -1 or +1");
  }

  SvmModel model;
  model.c_reg = c_reg;
  model.labels.assign(labels.begin(), labels.end());
  RMatrix k = kernel;
  const double min_eig = Eigen::SelfAdjointEigenSolver<RMatrix>(k, Eigen::EigenvaluesOnly).eigenvalues()(0);
  if (min_eig < -1e-6) {
    model.diagonal_shift = -min_eig;
    k.diagonal().array() += model.diagonal_shift;
    std::clog << "warning: kernel is not PSD (min eigenvalue " << min_eig << "); diagonal shifted by "
              << model.diagonal_shift << '\n';
  }

  const RVector y = Eigen::Map<const Eigen::VectorXi>(labels.data(), n).cast<double>();
  const RMatrix q = (y * y.transpose()).cwiseProduct(k);
  RVector alpha = RVector::Zero(n);
  RVector grad = -RVector::Ones(n);  // Q alpha - e
  constexpr double kTau = 1e-12;
  auto in_up = [&](Eigen::Index t) { return (y(t) > 0 && alpha(t) < c_reg) || (y(t) < 0 && alpha(t) > 0); };
  auto in_low = [&](Eigen::Index t) { return (y(t) > 0 && alpha(t) > 0) || (y(t) < 0 && alpha(t) < c_reg); };

  const long max_iter = std::max<long>(100000, 100L * n * n);
  for (; model.iterations < max_iter; ++model.iterations) {
    Eigen::Index i = -1;
    double g_max = -std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      if (in_up(t) && -y(t) * grad(t) > g_max) {
        g_max = -y(t) * grad(t);
        i = t;
      }
    }
    Eigen::Index j = -1;
    double g_min = std::numeric_limits<double>::infinity();
    double best_obj = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      g_min = std::min(g_min, -y(t) * grad(t));
      if (i < 0) continue;
      const double b = g_max + y(t) * grad(t);
      if (b > 0.0) {
        double a = q(i, i) + q(t, t) - 2.0 * y(i) * y(t) * q(i, t);
        if (a <= 0.0) a = kTau;
        if (-(b * b) / a < best_obj) {
          best_obj = -(b * b) / a;
          j = t;
        }
      }
    }
    if (i < 0 || j < 0 || g_max - g_min < tol) break;

    const double old_i = alpha(i);
    const double old_j = alpha(j);
    if (y(i) != y(j)) {
      double a = q(i, i) + q(j, j) + 2.0 * q(i, j);
      if (a <= 0.0) a = kTau;
      const double delta = (-grad(i) - grad(j)) / a;
      const double diff = alpha(i) - alpha(j);
      alpha(i) += delta;
      alpha(j) += delta;
      if (diff > 0 && alpha(j) < 0) {
        alpha(j) = 0;
        alpha(i) = diff;
      } else if (diff <= 0 && alpha(i) < 0) {
        alpha(i) = 0;
        alpha(j) = -diff;
      }
      if (diff > 0 && alpha(i) > c_reg) {
        alpha(i) = c_reg;
        alpha(j) = c_reg - diff;
      } else if (diff <= 0 && alpha(j) > c_reg) {
        alpha(j) = c_reg;
        alpha(i) = c_reg + diff;
      }
    } else {
      double a = q(i, i) + q(j, j) - 2.0 * q(i, j);
      if (a <= 0.0) a = kTau;
      const double delta = (grad(i) - grad(j)) / a;
      const double sum = alpha(i) + alpha(j);
      alpha(i) -= delta;
      alpha(j) += delta;
      if (sum > c_reg && alpha(i) > c_reg) {
        alpha(i) = c_reg;
        alpha(j) = sum - c_reg;
      } else if (sum <= c_reg && alpha(j) < 0) {
        alpha(j) = 0;
        alpha(i) = sum;
      }
      if (sum > c_reg && alpha(j) > c_reg) {
        alpha(j) = c_reg;
        alpha(i) = sum - c_reg;
      } else if (sum <= c_reg && alpha(i) < 0) {
        alpha(i) = 0;
        alpha(j) = sum;
      }
    }
    grad += q.col(i) * (alpha(i) - old_i) + q.col(j) * (alpha(j) - old_j);
  }

  // Bias from free vectors, or the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  int n_free = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = y(t) * grad(t);
    if (alpha(t) >= c_reg) {
      if (y(t) < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (alpha(t) <= 0) {
      if (y(t) > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  double rho = 0.0;
  if (n_free > 0) {
    rho = sum_free / n_free;
  } else if (std::isfinite(ub) && std::isfinite(lb)) {
    rho = (ub + lb) / 2.0;
  } else {
    rho = std::isfinite(ub) ? ub : (std::isfinite(lb) ? lb : 0.0);
  }
  model.bias = -rho;
  model.alpha = alpha;
  for (Eigen::Index t = 0; t < n; ++t) {
    if (alpha(t) > 0.0) model.support.push_back(static_cast<int>(t));
  }
  return model;
}

RVector decision_values(const SvmModel& model, const RMatrix& k_test_train) {
  if (k_test_train.cols() != model.alpha.size()) throw DimensionError("test kernel width does not match model");
  RVector coef(model.alpha.size());
  for (Eigen::Index i = 0; i < coef.size(); ++i) coef(i) = model.alpha(i) * model.labels[i];
  return (k_test_train * coef).array() + model.bias;
}

std::optional<double> auc_score(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DimensionError("auc: score and label counts differ");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::vector<double> rank(n);
  for (std::size_t lo = 0; lo < n;) {
    std::size_t hi = lo;
    while (hi + 1 < n && scores[order[hi + 1]] == scores[order[lo]]) ++hi;
    const double avg = (static_cast<double>(lo + hi) / 2.0) + 1.0;
    for (std::size_t k = lo; k <= hi; ++k) rank[order[k]] = avg;
    lo = hi + 1;
  }
  double pos = 0.0;
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] > 0) {
      pos += 1.0;
      rank_sum += rank[i];
    }
  }
  const double neg = static_cast<double>(n) - pos;
  if (pos == 0.0 || neg == 0.0) return std::nullopt;
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

Evaluation evaluate(const SvmModel& model, const RMatrix& k_test_train, std::span<const int> labels) {
  if (k_test_train.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw DimensionError("test kernel rows do not match label count");
  }
  if (labels.empty()) throw ValidationError("evaluate: empty test set");
  const RVector dv = decision_values(model, k_test_train);
  int correct = 0;
  for (Eigen::Index t = 0; t < dv.size(); ++t) {
    if ((dv(t) >= 0.0 ? 1 : -1) == labels[t]) ++correct;
  }
  Evaluation out;
  out.accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());
  out.auc = auc_score(std::span(dv.data(), static_cast<std::size_t>(dv.size())), labels);
  return out;
}

void QsvcConfig::validate() const {
  if (n_layers < 1) throw ValidationError("qsvc.n_layers must be >= 1");
  if (!(c_reg > 0.0)) throw ValidationError("qsvc.c_reg must be positive");
}

AnsatzParams feature_map_params(const AnsatzSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  AnsatzParams p(spec.param_count());
  for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = rng.uniform(-std::numbers::pi, std::numbers::pi);
  return p;
}

Evaluation train_and_evaluate(std::span<const DensityMatrix> train, std::span<const int> train_labels,
                              std::span<const DensityMatrix> test, std::span<const int> test_labels,
                              const QsvcConfig& cfg) {
  cfg.validate();
  if (train.empty() || test.empty()) throw ValidationError("qsvc needs non-empty train and test sets");
  const KernelSpec spec{AnsatzSpec{train.front().n_qubits(), cfg.n_layers}, cfg.scaling};
  const AnsatzParams params = feature_map_params(spec.feature_map, cfg.feature_seed);
  const SvmModel model = fit(kernel_matrix(train, spec, params), train_labels, cfg.c_reg);
  return evaluate(model, cross_kernel(test, train, spec, params), test_labels);
}

void write_matrix_csv(const RMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
    out << '\n';
  }
}

}  // namespace zqvae
