#include "zqvae/checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "zqvae/losses.hpp"
#include "zqvae/objective.hpp"
#include "zqvae/rng.hpp"

namespace zqvae {

namespace {

ModelParams random_params(const ModelSpec& spec, Rng& rng) {
  RVector flat(total_param_count(spec));
  for (Eigen::Index i = 0; i < flat.size(); ++i) flat(i) = rng.uniform(-std::numbers::pi, std::numbers::pi);
  return unflatten(spec, flat);
}

ModelSpec random_model(Rng& rng, int n_x, int n_z) {
  const int na = static_cast<int>(rng.below(2));
  const int nb = static_cast<int>(rng.below(2));
  const int layers = 1 + static_cast<int>(rng.below(3));
  return ModelSpec{EncoderSpec{n_x, n_z, na, layers}, DecoderSpec{n_x, n_z, nb, layers}};
}

std::vector<DensityMatrix> random_pure_points(Rng& rng, int n_qubits, int max_points) {
  const int n = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_points)));
  std::vector<DensityMatrix> pts;
  for (int i = 0; i < n; ++i) pts.push_back(DensityMatrix::trusted(random_pure(rng, n_qubits)));
  return pts;
}

std::string fmt(const char* label, double v) {
  std::ostringstream out;
  out << label << ' ' << v;
  return out.str();
}

SuiteResult equivalence_run(const char* name, LossKind recon, int trials, std::uint64_t seed) {
  SuiteResult r{name};
  Rng rng(seed);
  ObjectiveSpec spec;
  spec.recon = recon;
  spec.reg = LossKind::JSD;
  spec.beta = 0.0;
  for (int t = 0; t < trials; ++t) {
    const ModelSpec model = random_model(rng, 2, 1);
    const ModelParams params = random_params(model, rng);
    const auto pts = random_pure_points(rng, 2, 8);
    const EquivalenceReport rep = check_global_instance_equiv(spec, model, params, pts);
    r.worst = std::max(r.worst, rep.residual());
    if (!rep.holds()) ++r.failures;
    ++r.trials;
  }
  return r;
}

}  // namespace

SuiteResult cptp_suite(int trials, std::uint64_t seed, Fault fault) {
  SuiteResult r{"cptp"};
  Rng rng(seed);
  double trace_dev = 0.0;
  double min_eig = 1.0;
  double linearity = 0.0;
  for (int t = 0; t < trials; ++t) {
    const ModelSpec spec = random_model(rng, 2, 1);
    const CompiledModel model(spec, random_params(spec, rng));
    const double leak = fault == Fault::TraceLeak ? 1e-3 : 0.0;
    const Channel enc = [&](const DensityMatrix& rho) {
      const DensityMatrix z = model.encode(rho);
      return leak > 0.0 ? DensityMatrix::trusted(z.matrix() * (1.0 - leak)) : z;
    };
    const Channel dec = [&](const DensityMatrix& z) { return model.decode(z); };
    const Channel both = [&](const DensityMatrix& rho) { return model.decode(enc(rho)); };
    bool ok = true;
    for (const auto& [ch, n_in] : {std::pair{&enc, 2}, std::pair{&dec, 1}, std::pair{&both, 2}}) {
      const CptpReport rep = verify_cptp(*ch, n_in, 1, rng);
      trace_dev = std::max(trace_dev, rep.max_trace_deviation);
      min_eig = std::min(min_eig, rep.min_eigenvalue);
      linearity = std::max(linearity, rep.max_linearity_violation);
      ok = ok && rep.max_trace_deviation <= 1e-9 && rep.min_eigenvalue >= -1e-9 &&
           rep.max_linearity_violation <= 1e-10;
    }
    if (!ok) ++r.failures;
    ++r.trials;
  }
  r.worst = trace_dev;
  r.notes = {fmt("max_trace_deviation", trace_dev), fmt("min_eigenvalue", min_eig),
             fmt("max_linearity_residual", linearity)};
  return r;
}

SuiteResult elbo_suite(int trials, std::uint64_t seed) {
  SuiteResult r{"elbo"};
  Rng rng(seed);
  double worst_gap = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    const ModelSpec model = random_model(rng, 2, 1);
    const ModelParams params = random_params(model, rng);
    const auto pts = random_pure_points(rng, 2, 8);
    const ElboReport rep = check_elbo_bound(model, params, pts);
    worst_gap = std::min(worst_gap, rep.gap());
    if (!rep.holds()) ++r.failures;
    ++r.trials;
  }
  r.worst = worst_gap;
  r.notes = {fmt("min_lhs_minus_rhs", worst_gap)};
  return r;
}

SuiteResult equivalence_suite(int trials, std::uint64_t seed) {
  SuiteResult r = equivalence_run("equivalence", LossKind::WassersteinAux, trials, seed);
  r.notes = {fmt("max_residual", r.worst)};
  return r;
}

SuiteResult equivalence_control_suite(int trials, std::uint64_t seed) {
  SuiteResult raw = equivalence_run("equivalence-control", LossKind::Fidelity, trials, seed);
  SuiteResult r{"equivalence-control", raw.trials, 0, raw.worst};
  if (!(raw.worst > 1e-3)) r.failures = 1;
  r.notes = {fmt("max_residual", raw.worst), fmt("trials_with_equality", raw.trials - raw.failures)};
  return r;
}

SuiteResult divergence_suite(int trials, std::uint64_t seed) {
  SuiteResult r{"divergence"};
  Rng rng(seed);
  const CostObservable cost = default_cost(2);
  double min_value = 0.0;
  double max_self = 0.0;
  double max_asym = 0.0;
  double max_classical = 0.0;
  double max_swap = 0.0;
  for (int t = 0; t < trials; ++t) {
    // Every third draw uses a pure first argument.
    const DensityMatrix rho = DensityMatrix::trusted(t % 3 == 0 ? random_pure(rng, 2) : random_density(rng, 2));
    const DensityMatrix sigma = DensityMatrix::trusted(random_density(rng, 2));

    const double values[] = {1.0 - fidelity(rho, sigma), kld(rho, sigma), jsd(rho, sigma)};
    const double selfs[] = {1.0 - fidelity(rho, rho), kld(rho, rho), jsd(rho, rho)};
    double lo = 0.0;
    double self = 0.0;
    for (double v : values) lo = std::min(lo, v);
    for (double v : selfs) self = std::max(self, std::abs(v));
    const double asym = std::abs(jsd(rho, sigma) - jsd(sigma, rho));

    const CMatrix u = random_unitary(rng, 4);
    RVector p(4);
    RVector q(4);
    for (int i = 0; i < 4; ++i) {
      p(i) = rng.uniform() + 1e-3;
      q(i) = rng.uniform() + 1e-3;
    }
    p /= p.sum();
    q /= q.sum();
    const DensityMatrix rp = DensityMatrix::trusted(symmetrize(u * p.cast<Complex>().asDiagonal() * u.adjoint()));
    const DensityMatrix rq = DensityMatrix::trusted(symmetrize(u * q.cast<Complex>().asDiagonal() * u.adjoint()));
    double classical = 0.0;
    for (int i = 0; i < 4; ++i) classical += p(i) * std::log(p(i) / q(i));
    const double classical_err = std::abs(kld(rp, rq) - classical);

    const double swap_err = std::abs(cost.pair_expectation(rho.matrix(), rho.matrix()) - (1.0 - rho.purity()) / 2.0);

    min_value = std::min(min_value, lo);
    max_self = std::max(max_self, self);
    max_asym = std::max(max_asym, asym);
    max_classical = std::max(max_classical, classical_err);
    max_swap = std::max(max_swap, swap_err);
    const bool ok = lo >= -1e-9 && self <= 1e-8 && asym == 0.0 && classical_err <= 1e-9 && swap_err <= 1e-10;
    if (!ok) ++r.failures;
    ++r.trials;
  }
  r.worst = std::max({-min_value, max_self, max_classical, max_swap});
  r.notes = {fmt("min_divergence", min_value), fmt("max_self_divergence", max_self),
             fmt("max_jsd_asymmetry", max_asym), fmt("max_classical_kl_error", max_classical),
             fmt("max_swap_identity_error", max_swap)};
  return r;
}

std::vector<std::string> suite_names() {
  return {"cptp", "elbo", "equivalence", "equivalence-control", "divergence"};
}

SuiteResult run_suite(const std::string& name, int trials, std::uint64_t seed, Fault fault) {
  if (name == "cptp") return cptp_suite(trials, seed, fault);
  if (name == "elbo") return elbo_suite(trials, seed);
  if (name == "equivalence") return equivalence_suite(trials, seed);
  if (name == "equivalence-control") return equivalence_control_suite(trials, seed);
  if (name == "divergence") return divergence_suite(trials, seed);
  throw ValidationError("unknown check suite '" + name + "'");
}

}  // namespace zqvae
