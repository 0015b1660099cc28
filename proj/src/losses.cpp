#include "zqvae/losses.hpp"

#include <cmath>
#include <numbers>

namespace zqvae {

namespace {

void require_same_dim(const DensityMatrix& a, const DensityMatrix& b, const char* what) {
  if (a.dim() != b.dim()) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a.dim()) +
                         " vs " + std::to_string(b.dim()) + ")");
  }
}

double clamp_unit(double x) { return std::clamp(x, 0.0, 1.0); }

// sqrt of a PSD matrix; eigenvalues at roundoff level are dropped so a
// rank-deficient state keeps an exact null space.
CMatrix psd_root(const CMatrix& m) {
  const auto sys = eigh(m);
  const double cut = 1e-13 * std::max(sys.values.maxCoeff(), 1.0);
  RVector r(sys.values.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = sys.values(i) > cut ? std::sqrt(sys.values(i)) : 0.0;
  return sys.vectors * r.cast<Complex>().asDiagonal() * sys.vectors.adjoint();
}

// ||sqrt(a) sqrt(b)||_1^2 through singular values, not a second square root.
double root_fidelity_squared(const CMatrix& a, const CMatrix& b) {
  const Eigen::JacobiSVD<CMatrix> svd(psd_root(a) * psd_root(b));
  const double acc = svd.singularValues().sum();
  return acc * acc;
}

double entropy_of_spectrum(const RVector& values) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double p = values(i);
    if (p > 0.0) s -= p * std::log(std::max(p, kEigenvalueFloor));
  }
  return s;
}

}  // namespace

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::Fidelity: return "fidelity";
    case LossKind::KLD: return "kld";
    case LossKind::JSD: return "jsd";
    case LossKind::WassersteinAux: return "wasserstein";
  }
  return "unknown";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "fidelity") return LossKind::Fidelity;
  if (name == "kld") return LossKind::KLD;
  if (name == "jsd") return LossKind::JSD;
  if (name == "wasserstein") return LossKind::WassersteinAux;
  throw ValidationError("unknown loss kind '" + std::string(name) +
                        "' (expected fidelity, kld, jsd or wasserstein)");
}

void check_loss_role(LossKind kind, LossRole role) {
  if (role == LossRole::Regularization && kind == LossKind::WassersteinAux) {
    throw ValidationError("the Wasserstein loss is only available for reconstruction");
  }
}

CostObservable::CostObservable(CMatrix mat) : mat_(std::move(mat)) {
  const int total = qubits_for_dim(mat_.rows());
  if (mat_.cols() != mat_.rows() || total % 2 != 0) {
    throw DimensionError("cost observable must act on two equal registers");
  }
  if (hermitian_residual(mat_) > kHermitianTol) throw ValidationError("cost observable is not Hermitian");
  if (eigh(mat_).values.minCoeff() < -kHermitianTol) {
    throw ValidationError("cost observable is not positive semidefinite");
  }
  register_qubits_ = total / 2;
}

double CostObservable::pair_expectation(const CMatrix& a, const CMatrix& b) const {
  const Eigen::Index d = qubit_dim(register_qubits_);
  if (a.rows() != d || b.rows() != d) throw DimensionError("cost observable register mismatch");
  // Tr[(a (x) b) C] = sum a_ij b_kl C[(j,l), (i,k)].
  Complex acc(0.0, 0.0);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const Complex aij = a(i, j);
      if (aij == Complex(0.0, 0.0)) continue;
      for (Eigen::Index k = 0; k < d; ++k) {
        for (Eigen::Index l = 0; l < d; ++l) acc += aij * b(k, l) * mat_(j * d + l, i * d + k);
      }
    }
  }
  return acc.real();
}

CostObservable default_cost(int n_x) {
  if (n_x < 1) throw DimensionError("default_cost needs n_x >= 1");
  const Eigen::Index d = qubit_dim(n_x);
  if (2 * n_x > kMaxQubits) throw DimensionError("default_cost: register too large");
  const Eigen::Index dd = d * d;
  CMatrix swap = CMatrix::Zero(dd, dd);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) swap(i * d + j, j * d + i) = 1.0;
  }
  return CostObservable((CMatrix::Identity(dd, dd) - swap) / 2.0);
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require_same_dim(rho, sigma, "fidelity");
  if (rho.is_pure() || sigma.is_pure()) {
    // <psi|sigma|psi> = Tr(rho sigma) for rho = |psi><psi|.
    return clamp_unit((rho.matrix().cwiseProduct(sigma.matrix().transpose())).sum().real());
  }
  return clamp_unit(root_fidelity_squared(sigma.matrix(), rho.matrix()));
}

double fidelity_general(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require_same_dim(rho, sigma, "fidelity");
  return clamp_unit(root_fidelity_squared(rho.matrix(), sigma.matrix()));
}

double kld(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require_same_dim(rho, sigma, "kld");
  const CMatrix log_sigma = mat_func(sigma.matrix(), [](double x) { return std::log(x); }, kEigenvalueFloor);
  const double cross = -(rho.matrix().cwiseProduct(log_sigma.transpose())).sum().real();
  return cross - von_neumann_entropy(rho);
}

double jsd(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require_same_dim(rho, sigma, "jsd");
  const DensityMatrix mid = DensityMatrix::trusted((rho.matrix() + sigma.matrix()) / 2.0);
  return kld(rho, mid) + kld(sigma, mid);
}

double wasserstein_aux(const DensityMatrix& rho, const Channel& channel, const CostObservable& cost) {
  if (cost.register_qubits() != rho.n_qubits()) throw DimensionError("wasserstein_aux: cost register mismatch");
  const auto sys = eigh(rho.matrix());
  double total = 0.0;
  for (Eigen::Index i = 0; i < sys.values.size(); ++i) {
    const double p = sys.values(i);
    if (p <= kEigenvalueFloor) continue;
    const CVector e = sys.vectors.col(i);
    const DensityMatrix proj = DensityMatrix::trusted(e * e.adjoint());
    const DensityMatrix out = channel(proj);
    require_same_dim(out, proj, "wasserstein_aux");
    total += p * cost.pair_expectation(out.matrix(), proj.matrix());
  }
  return total;
}

double wasserstein_aux_ensemble(std::span<const double> weights, std::span<const DensityMatrix> members,
                                const Channel& channel, const CostObservable& cost) {
  if (weights.size() != members.size()) throw DimensionError("wasserstein_aux_ensemble: size mismatch");
  double total = 0.0;
  for (std::size_t k = 0; k < members.size(); ++k) {
    const auto& member = members[k];
    if (member.is_pure()) {
      if (cost.register_qubits() != member.n_qubits()) {
        throw DimensionError("wasserstein_aux: cost register mismatch");
      }
      const DensityMatrix out = channel(member);
      require_same_dim(out, member, "wasserstein_aux");
      total += weights[k] * cost.pair_expectation(out.matrix(), member.matrix());
    } else {
      total += weights[k] * wasserstein_aux(member, channel, cost);
    }
  }
  return total;
}

double regularization(const DensityMatrix& zeta, LossKind kind) {
  check_loss_role(kind, LossRole::Regularization);
  // zeta and I/d commute, so every divergence reduces to the spectrum of zeta.
  const RVector lambda = eigh(zeta.matrix()).values;
  const double d = static_cast<double>(zeta.dim());
  switch (kind) {
    case LossKind::Fidelity: {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < lambda.size(); ++i) acc += std::sqrt(std::max(lambda(i), 0.0));
      return 1.0 - clamp_unit(acc * acc / d);
    }
    case LossKind::KLD:
      return zeta.n_qubits() * std::numbers::ln2 - entropy_of_spectrum(lambda);
    case LossKind::JSD: {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        const double p = std::max(lambda(i), 0.0);
        const double mid = (p + 1.0 / d) / 2.0;
        const double log_mid = std::log(std::max(mid, kEigenvalueFloor));
        if (p > 0.0) acc += p * (std::log(std::max(p, kEigenvalueFloor)) - log_mid);
        acc += (1.0 / d) * (std::log(1.0 / d) - log_mid);
      }
      return acc;
    }
    case LossKind::WassersteinAux: break;
  }
  throw ValidationError("unsupported regularization kind");
}

double reconstruction_divergence(const DensityMatrix& rho, const DensityMatrix& sigma, LossKind kind) {
  switch (kind) {
    case LossKind::Fidelity: return 1.0 - fidelity(rho, sigma);
    case LossKind::KLD: return kld(rho, sigma);
    case LossKind::JSD: return jsd(rho, sigma);
    case LossKind::WassersteinAux: break;
  }
  throw ValidationError("the Wasserstein reconstruction loss needs the channel; use wasserstein_aux");
}

}  // namespace zqvae
