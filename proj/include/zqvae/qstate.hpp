// qstate.hpp
// Density-matrix state type, classical-to-quantum embeddings, Bloch readout
// and the global (dataset-mixture) state.

#pragma once

#include <array>
#include <span>
#include <vector>

#include "zqvae/linalg.hpp"

namespace zqvae {

// Hermitian, unit-trace, positive semidefinite matrix over n qubits.
class DensityMatrix {
 public:
  DensityMatrix() = default;

  // Validates every invariant (Hermitian, trace one, PSD) to `tol`.
  static DensityMatrix from_matrix(CMatrix m, double tol = kHermitianTol);

  // Only checks that the dimension is a power of two. Used on outputs of
  // operations that preserve the invariants by construction.
  static DensityMatrix trusted(CMatrix m);

  int n_qubits() const { return n_qubits_; }
  Eigen::Index dim() const { return mat_.rows(); }
  const CMatrix& matrix() const { return mat_; }

  double trace() const { return mat_.trace().real(); }
  double purity() const { return mat_.cwiseAbs2().sum(); }
  bool is_pure(double tol = 1e-9) const { return purity() > 1.0 - tol; }

 private:
  explicit DensityMatrix(CMatrix m);

  int n_qubits_ = 0;
  CMatrix mat_;
};

// Pure state |psi><psi| for a normalized state vector.
DensityMatrix pure_state(const CVector& psi);

// Amplitude embedding: tail zero-padding to 2^n, then L2 normalization.
DensityMatrix amplitude_embed(std::span<const double> features, int n_qubits);

// Normalized, zero-padded amplitude vector used by amplitude_embed.
RVector embedded_amplitudes(std::span<const double> features, int n_qubits);

// Angle embedding: Ry(feature_q) on qubit q of |0...0>.
DensityMatrix angle_embed(std::span<const double> features);

DensityMatrix maximally_mixed(int n_qubits);

// Von Neumann entropy in nats.
double von_neumann_entropy(const DensityMatrix& rho);

// Uniform mixture of the dataset's states. The ensemble is kept alongside the
// mixture so that quantities defined on ensembles (not just on rho_glob) can
// be evaluated.
class GlobalState {
 public:
  explicit GlobalState(std::span<const DensityMatrix> points);

  const DensityMatrix& rho() const { return rho_; }
  int n_points() const { return static_cast<int>(components_.size()); }
  const std::vector<DensityMatrix>& components() const { return components_; }

 private:
  DensityMatrix rho_;
  std::vector<DensityMatrix> components_;
};

GlobalState global_state(std::span<const DensityMatrix> points);

struct Bloch {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double norm() const;
};

// Single-qubit reduced state of `rho` on `qubit`.
DensityMatrix qubit_marginal(const DensityMatrix& rho, int qubit);

// (Tr rho X_q, Tr rho Y_q, Tr rho Z_q).
Bloch bloch_coords(const DensityMatrix& rho, int qubit);

// Single-qubit Pauli matrices.
CMatrix pauli_x();
CMatrix pauli_y();
CMatrix pauli_z();

}  // namespace zqvae
