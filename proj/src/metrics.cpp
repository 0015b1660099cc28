#include "zqvae/metrics.hpp"

#include <cmath>

#include "zqvae/losses.hpp"

namespace zqvae {

double reconstruction_rate(const CompiledModel& model, std::span<const DensityMatrix> points) {
  if (points.empty()) throw ValidationError("reconstruction_rate: empty split");
  double acc = 0.0;
  for (const auto& rho : points) acc += fidelity(rho, model.reconstruct(rho));
  return acc / static_cast<double>(points.size());
}

RMatrix pairwise_fidelity(std::span<const DensityMatrix> states) {
  const auto n = static_cast<Eigen::Index>(states.size());
  RMatrix f = RMatrix::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) f(i, j) = f(j, i) = fidelity(states[i], states[j]);
  }
  return f;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("pearson needs two equal samples of size >= 2");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw ValidationError("pearson: zero variance");
  return sxy / std::sqrt(sxx * syy);
}

double pairwise_fidelity_pcc(std::span<const DensityMatrix> a, std::span<const DensityMatrix> b) {
  if (a.size() != b.size()) throw ValidationError("pairwise_fidelity_pcc: state counts differ");
  if (a.size() < 3) throw ValidationError("pairwise_fidelity_pcc needs at least three states");
  const RMatrix fa = pairwise_fidelity(a);
  const RMatrix fb = pairwise_fidelity(b);
  std::vector<double> ua;
  std::vector<double> ub;
  for (Eigen::Index i = 0; i < fa.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < fa.cols(); ++j) {
      ua.push_back(fa(i, j));
      ub.push_back(fb(i, j));
    }
  }
  return pearson(ua, ub);
}

std::optional<double> latent_volume(std::span<const DensityMatrix> latents) {
  if (latents.size() < 2) throw ValidationError("latent_volume needs at least two states");
  if (latents.front().n_qubits() != 1) return std::nullopt;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Vector3d sq = Eigen::Vector3d::Zero();
  for (const auto& z : latents) {
    if (z.n_qubits() != 1) throw DimensionError("latent_volume: mixed latent widths");
    const Bloch b = bloch_coords(z, 0);
    const Eigen::Vector3d v(b.x, b.y, b.z);
    mean += v;
    sq += v.cwiseProduct(v);
  }
  const double n = static_cast<double>(latents.size());
  mean /= n;
  const Eigen::Vector3d var = (sq / n - mean.cwiseProduct(mean)).cwiseMax(0.0);
  return std::sqrt(var.sum());
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw ValidationError("mean_std of nothing");
  MeanStd out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(var / static_cast<double>(values.size()));
  return out;
}

SeedMetrics seed_metrics(const ModelSpec& spec, const SeedResult& result, const Dataset& data,
                         const QsvcConfig& qsvc) {
  if (data.split.test.empty()) throw ValidationError("dataset has no test split");
  const CompiledModel model(spec, result.params);
  const auto test = data.select(data.split.test);
  SeedMetrics m;
  m.seed = result.seed;
  m.f = reconstruction_rate(model, test);

  std::vector<DensityMatrix> test_latent;
  for (const auto& rho : test) test_latent.push_back(model.encode(rho));
  m.latent_volume = latent_volume(test_latent);
  try {
    m.input_latent_pcc = pairwise_fidelity_pcc(test, test_latent);
  } catch (const ValidationError&) {
    m.input_latent_pcc = 0.0;  // collapsed latent: no correlation to report
  }

  if (data.labels && !data.split.train.empty()) {
    const auto train = data.select(data.split.train);
    const auto y_train = data.select_labels(data.split.train);
    const auto y_test = data.select_labels(data.split.test);
    std::vector<DensityMatrix> train_latent;
    std::vector<DensityMatrix> train_recon;
    std::vector<DensityMatrix> test_recon;
    for (const auto& rho : train) {
      train_latent.push_back(model.encode(rho));
      train_recon.push_back(model.decode(train_latent.back()));
    }
    for (const auto& z : test_latent) test_recon.push_back(model.decode(z));
    const Evaluation l = train_and_evaluate(train_latent, y_train, test_latent, y_test, qsvc);
    const Evaluation r = train_and_evaluate(train_recon, y_train, test_recon, y_test, qsvc);
    m.l = l.accuracy;
    m.l_auc = l.auc;
    m.r = r.accuracy;
    m.r_auc = r.auc;
  }
  return m;
}

ReportTriple summarize(std::vector<SeedMetrics> per_seed) {
  if (per_seed.empty()) throw ValidationError("report needs at least one seed");
  ReportTriple out;
  std::vector<double> f;
  std::vector<double> l;
  std::vector<double> r;
  for (const auto& m : per_seed) {
    f.push_back(m.f);
    if (m.l) l.push_back(*m.l);
    if (m.r) r.push_back(*m.r);
  }
  out.f = mean_std(f);
  if (l.size() == per_seed.size()) out.l = mean_std(l);
  if (r.size() == per_seed.size()) out.r = mean_std(r);
  out.per_seed = std::move(per_seed);
  return out;
}

ReportTriple report_triple(const ModelSpec& spec, std::span<const SeedResult> results, const Dataset& data,
                           const QsvcConfig& qsvc) {
  std::vector<SeedMetrics> per_seed;
  for (const auto& r : results) per_seed.push_back(seed_metrics(spec, r, data, qsvc));
  return summarize(std::move(per_seed));
}

}  // namespace zqvae
