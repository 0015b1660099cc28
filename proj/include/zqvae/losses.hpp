// losses.hpp
// Divergences between density matrices used as reconstruction (L1) and
// regularization (L2) losses. Entropies are in nats.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "zqvae/channel.hpp"
#include "zqvae/qstate.hpp"

namespace zqvae {

enum class LossKind { Fidelity, KLD, JSD, WassersteinAux };
enum class LossRole { Reconstruction, Regularization };

// Names used in run configs: "fidelity", "kld", "jsd", "wasserstein".
std::string_view to_string(LossKind kind);
LossKind parse_loss_kind(std::string_view name);

// Throws if `kind` is not allowed in `role` (Wasserstein is reconstruction only).
void check_loss_role(LossKind kind, LossRole role);

// Hermitian PSD cost observable on two copies of an n_x-qubit register.
class CostObservable {
 public:
  explicit CostObservable(CMatrix mat);

  const CMatrix& matrix() const { return mat_; }
  int register_qubits() const { return register_qubits_; }

  // Tr[(a (x) b) C] without forming the Kronecker product.
  double pair_expectation(const CMatrix& a, const CMatrix& b) const;

 private:
  CMatrix mat_;
  int register_qubits_ = 0;
};

// Projector onto the antisymmetric subspace, (I - SWAP) / 2.
CostObservable default_cost(int n_x);

// Uhlmann fidelity (Tr sqrt(sqrt(sigma) rho sqrt(sigma)))^2 in [0, 1].
// Uses Tr(rho sigma) when either argument is pure.
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

// Fidelity through the sqrt(rho) sigma sqrt(rho) ordering, no pure-state
// shortcut. Exposed for cross-checking.
double fidelity_general(const DensityMatrix& rho, const DensityMatrix& sigma);

// Quantum relative entropy S(rho | sigma) = -Tr(rho log sigma) - S(rho).
double kld(const DensityMatrix& rho, const DensityMatrix& sigma);

// S(rho | m) + S(sigma | m) with m the equal mixture. Symmetric exactly.
double jsd(const DensityMatrix& rho, const DensityMatrix& sigma);

// Auxiliary transport cost Tr(pi(rho, T) C) with the coupling built from the
// eigendecomposition of rho: pi = sum_i p_i T(e_i e_i^dag) (x) e_i e_i^dag.
// Eigenvalues at or below the floor are skipped.
double wasserstein_aux(const DensityMatrix& rho, const Channel& channel, const CostObservable& cost);

// Same cost with the coupling built from an explicit ensemble
// rho = sum_k w_k psi_k. This is the linear extension of the pure-state
// coupling: the result is linear in the ensemble weights, so evaluating a
// mixture equals the weighted sum of its members' costs.
double wasserstein_aux_ensemble(std::span<const double> weights, std::span<const DensityMatrix> members,
                                const Channel& channel, const CostObservable& cost);

// L2(zeta, I/d) for kind in {Fidelity, KLD, JSD}. KLD uses n ln 2 - S(zeta).
double regularization(const DensityMatrix& zeta, LossKind kind);

// L1(rho, sigma) for kind in {Fidelity, KLD, JSD}; fidelity loss is 1 - F.
double reconstruction_divergence(const DensityMatrix& rho, const DensityMatrix& sigma, LossKind kind);

}  // namespace zqvae
