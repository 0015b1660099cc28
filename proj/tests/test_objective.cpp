#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "zqvae/objective.hpp"

using namespace zqvae;

namespace {

ModelParams random_params(const ModelSpec& spec, Rng& rng) {
  RVector flat(total_param_count(spec));
  for (Eigen::Index i = 0; i < flat.size(); ++i) flat(i) = rng.uniform(-std::numbers::pi, std::numbers::pi);
  return unflatten(spec, flat);
}

std::vector<DensityMatrix> pure_points(Rng& rng, int n, int count) {
  std::vector<DensityMatrix> out;
  for (int i = 0; i < count; ++i) out.push_back(DensityMatrix::trusted(random_pure(rng, n)));
  return out;
}

ObjectiveSpec make_spec(LossKind recon, LossKind reg, double beta, ObjectiveMode mode = ObjectiveMode::Instance) {
  ObjectiveSpec s;
  s.recon = recon;
  s.reg = reg;
  s.beta = beta;
  s.mode = mode;
  return s;
}

}  // namespace

TEST_SUITE("objective") {

TEST_CASE("mode names and spec validation") {
  CHECK(parse_objective_mode("global") == ObjectiveMode::Global);
  CHECK(to_string(ObjectiveMode::Instance) == "instance");
  CHECK_THROWS_AS(parse_objective_mode("batch"), ValidationError);
  CHECK_THROWS_AS(make_spec(LossKind::Fidelity, LossKind::WassersteinAux, 0).validate(), ValidationError);
  CHECK_THROWS_AS(make_spec(LossKind::Fidelity, LossKind::JSD, NAN).validate(), ValidationError);
  CHECK_NOTHROW(make_spec(LossKind::KLD, LossKind::KLD, -2.0).validate());
}

TEST_CASE("flatten / unflatten") {
  Rng rng(1);
  const ModelSpec spec = ModelSpec::symmetric(3, 1, 1, 2);
  CHECK(total_param_count(spec) == 32);
  const ModelParams p = random_params(spec, rng);
  const ModelParams q = unflatten(spec, flatten(p));
  CHECK(p.theta_e == q.theta_e);
  CHECK(p.theta_d == q.theta_d);
  CHECK_THROWS_AS(unflatten(spec, RVector::Zero(31)), DimensionError);
}

TEST_CASE("instance objective is the per-point sum") {
  Rng rng(2);
  const ModelSpec spec = ModelSpec::symmetric(2, 1, 1, 2);
  const ModelParams p = random_params(spec, rng);
  const CompiledModel m(spec, p);
  const auto pts = pure_points(rng, 2, 5);
  const ObjectiveSpec s = make_spec(LossKind::Fidelity, LossKind::JSD, 0.7);
  const InstanceEval e = eval_instance(s, m, pts);
  double expect = 0.0;
  for (const auto& rho : pts) {
    const DensityMatrix z = m.encode(rho);
    expect += 1.0 - fidelity(rho, m.decode(z)) + 0.7 * jsd(z, maximally_mixed(1));
  }
  CHECK(e.total == doctest::Approx(expect).epsilon(1e-12));
  CHECK(e.recon_terms.size() == 5);

  // order of points does not matter beyond rounding
  std::vector<DensityMatrix> rev(pts.rbegin(), pts.rend());
  CHECK(eval_instance(s, m, rev).total == doctest::Approx(e.total).epsilon(1e-13));
  CHECK_THROWS_AS(eval_instance(s, m, std::span<const DensityMatrix>{}), ValidationError);
}

TEST_CASE("objective is affine in beta") {
  Rng rng(3);
  const ModelSpec spec = ModelSpec::symmetric(2, 1, 0, 3);
  const ModelParams p = random_params(spec, rng);
  const auto pts = pure_points(rng, 2, 4);
  auto at = [&](double beta) { return eval_instance(make_spec(LossKind::KLD, LossKind::KLD, beta), spec, p, pts); };
  const InstanceEval e0 = at(0.0);
  const InstanceEval e1 = at(1.0);
  double reg = 0.0;
  for (double r : e0.reg_terms) reg += r;
  CHECK(e1.total - e0.total == doctest::Approx(reg).epsilon(1e-12));
  CHECK(at(-1.5).total == doctest::Approx(e0.total - 1.5 * reg).epsilon(1e-12));
}

TEST_CASE("global objective evaluates the mixtures") {
  Rng rng(4);
  const ModelSpec spec = ModelSpec::symmetric(2, 1, 1, 2);
  const ModelParams p = random_params(spec, rng);
  const CompiledModel m(spec, p);
  const auto pts = pure_points(rng, 2, 6);
  const GlobalState g(pts);
  const ObjectiveSpec s = make_spec(LossKind::JSD, LossKind::Fidelity, 0.3, ObjectiveMode::Global);
  const GlobalEval e = eval_global(s, m, g);
  const DensityMatrix z = m.encode(g.rho());
  CHECK(e.recon == doctest::Approx(jsd(g.rho(), m.decode(z))).epsilon(1e-12));
  CHECK(e.reg == doctest::Approx(1.0 - fidelity(z, maximally_mixed(1))).epsilon(1e-12));
  CHECK(e.total == doctest::Approx(e.recon + 0.3 * e.reg).epsilon(1e-12));
}

TEST_CASE("wasserstein: global equals instance mean at beta 0") {
  Rng rng(5);
  for (int t = 0; t < 10; ++t) {
    const ModelSpec spec = ModelSpec::symmetric(2, 1, static_cast<int>(t % 2), 2);
    const ModelParams p = random_params(spec, rng);
    const auto pts = pure_points(rng, 2, 1 + t % 7);
    const auto rep = check_global_instance_equiv(make_spec(LossKind::WassersteinAux, LossKind::JSD, 0.0), spec, p, pts);
    CHECK(rep.residual() <= 1e-12);
  }
}

TEST_CASE("fidelity: global and instance mean differ") {
  Rng rng(6);
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    const ModelSpec spec = ModelSpec::symmetric(2, 1, 0, 2);
    const auto pts = pure_points(rng, 2, 4);
    const auto rep =
        check_global_instance_equiv(make_spec(LossKind::Fidelity, LossKind::JSD, 0.0), spec, random_params(spec, rng), pts);
    worst = std::max(worst, rep.residual());
  }
  CHECK(worst > 1e-3);
}

TEST_CASE("make_objective dispatches on mode") {
  Rng rng(7);
  const ModelSpec spec = ModelSpec::symmetric(2, 1, 0, 1);
  const ModelParams p = random_params(spec, rng);
  const auto pts = pure_points(rng, 2, 3);
  const RVector x = flatten(p);
  const ObjectiveSpec inst = make_spec(LossKind::Fidelity, LossKind::JSD, 0.5);
  ObjectiveSpec glob = inst;
  glob.mode = ObjectiveMode::Global;
  CHECK(make_objective(inst, spec, pts)(x) == eval_instance(inst, spec, p, pts).total);
  CHECK(make_objective(glob, spec, pts)(x) == eval_global(glob, spec, p, GlobalState(pts)).total);
}

TEST_CASE("elbo report matches hand-computed divergences") {
  Rng rng(8);
  const ModelSpec spec = ModelSpec::symmetric(2, 1, 1, 2);
  const ModelParams p = random_params(spec, rng);
  const auto pts = pure_points(rng, 2, 3);
  const CompiledModel m(spec, p);
  const GlobalState g(pts);
  const DensityMatrix zg = m.encode(g.rho());
  const double lhs = -kld(g.rho(), m.decode(maximally_mixed(1)));
  const double rhs = -kld(g.rho(), m.decode(zg)) - kld(zg, maximally_mixed(1));
  const ElboReport r = check_elbo_bound(spec, p, pts);
  CHECK(r.lhs == doctest::Approx(lhs).epsilon(1e-12));
  CHECK(r.rhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("elbo bound is violated by some models") {
  // random models break it; see check_elbo_bound
  Rng rng(9);
  int violations = 0;
  for (int t = 0; t < 200; ++t) {
    const ModelSpec spec = ModelSpec::symmetric(2, 1, static_cast<int>(rng.below(2)), 1 + static_cast<int>(rng.below(3)));
    const auto pts = pure_points(rng, 2, 1 + static_cast<int>(rng.below(8)));
    if (!check_elbo_bound(spec, random_params(spec, rng), pts).holds()) ++violations;
  }
  CHECK(violations > 0);
}

}  // TEST_SUITE
