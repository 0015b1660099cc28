#include "zqvae/qstate.hpp"

#include <cmath>
#include <numeric>

namespace zqvae {

DensityMatrix::DensityMatrix(CMatrix m) : mat_(std::move(m)) {
  if (mat_.rows() != mat_.cols() || mat_.rows() < 1) {
    throw DimensionError("density matrix must be square and non-empty");
  }
  n_qubits_ = qubits_for_dim(mat_.rows());
}

DensityMatrix DensityMatrix::trusted(CMatrix m) { return DensityMatrix(std::move(m)); }

DensityMatrix DensityMatrix::from_matrix(CMatrix m, double tol) {
  DensityMatrix rho(std::move(m));
  if (!rho.mat_.allFinite()) throw ValidationError("density matrix has non-finite entries");
  const double herm = hermitian_residual(rho.mat_);
  if (herm > tol) {
    throw ValidationError("density matrix is not Hermitian (residual " + std::to_string(herm) + ")");
  }
  if (std::abs(rho.trace() - 1.0) > tol) {
    throw ValidationError("density matrix trace is " + std::to_string(rho.trace()));
  }
  const double min_eig = eigh(rho.mat_).values.minCoeff();
  if (min_eig < -tol) {
    throw ValidationError("density matrix has negative eigenvalue " + std::to_string(min_eig));
  }
  return rho;
}

DensityMatrix pure_state(const CVector& psi) {
  const double norm = psi.norm();
  if (!(norm > 0.0)) throw ValidationError("pure_state: zero vector");
  const CVector v = psi / norm;
  return DensityMatrix::trusted(v * v.adjoint());
}

RVector embedded_amplitudes(std::span<const double> features, int n_qubits) {
  const Eigen::Index dim = qubit_dim(n_qubits);
  if (static_cast<Eigen::Index>(features.size()) > dim) {
    throw DimensionError("amplitude_embed: " + std::to_string(features.size()) +
                         " features do not fit in " + std::to_string(n_qubits) + " qubits");
  }
  RVector amp = RVector::Zero(dim);
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (!std::isfinite(features[i])) throw ValidationError("amplitude_embed: non-finite feature");
    amp(static_cast<Eigen::Index>(i)) = features[i];
  }
  const double norm = amp.norm();
  if (!(norm > 0.0)) throw ValidationError("amplitude_embed: zero feature vector");
  return amp / norm;
}

DensityMatrix amplitude_embed(std::span<const double> features, int n_qubits) {
  const RVector amp = embedded_amplitudes(features, n_qubits);
  const CVector psi = amp.cast<Complex>();
  return DensityMatrix::trusted(psi * psi.adjoint());
}

DensityMatrix angle_embed(std::span<const double> features) {
  if (features.empty()) throw DimensionError("angle_embed: no features");
  CVector psi = CVector::Ones(1);
  for (double f : features) {
    CVector q(2);
    q << std::cos(f / 2.0), std::sin(f / 2.0);
    psi = kron(psi, q).eval();
  }
  return DensityMatrix::trusted(psi * psi.adjoint());
}

DensityMatrix maximally_mixed(int n_qubits) {
  if (n_qubits < 1) throw DimensionError("maximally_mixed needs at least one qubit");
  const Eigen::Index d = qubit_dim(n_qubits);
  return DensityMatrix::trusted(CMatrix::Identity(d, d) / static_cast<double>(d));
}

double von_neumann_entropy(const DensityMatrix& rho) {
  const auto sys = eigh(rho.matrix());
  double s = 0.0;
  for (Eigen::Index i = 0; i < sys.values.size(); ++i) {
    const double p = sys.values(i);
    if (p > 0.0) s -= p * std::log(std::max(p, kEigenvalueFloor));
  }
  return s;
}

GlobalState::GlobalState(std::span<const DensityMatrix> points)
    : components_(points.begin(), points.end()) {
  if (components_.empty()) throw ValidationError("global_state: empty dataset");
  const int n = components_.front().n_qubits();
  CMatrix acc = CMatrix::Zero(components_.front().dim(), components_.front().dim());
  for (const auto& p : components_) {
    if (p.n_qubits() != n) throw DimensionError("global_state: mismatched qubit counts");
    acc += p.matrix();
  }
  acc /= static_cast<double>(components_.size());
  rho_ = DensityMatrix::trusted(symmetrize(acc));
}

GlobalState global_state(std::span<const DensityMatrix> points) { return GlobalState(points); }

double Bloch::norm() const { return std::sqrt(x * x + y * y + z * z); }

DensityMatrix qubit_marginal(const DensityMatrix& rho, int qubit) {
  const int n = rho.n_qubits();
  if (qubit < 0 || qubit >= n) {
    throw DimensionError("qubit index " + std::to_string(qubit) + " out of range");
  }
  std::vector<int> traced;
  for (int q = 0; q < n; ++q) {
    if (q != qubit) traced.push_back(q);
  }
  return DensityMatrix::trusted(partial_trace(rho.matrix(), n, traced));
}

Bloch bloch_coords(const DensityMatrix& rho, int qubit) {
  const CMatrix r = qubit_marginal(rho, qubit).matrix();
  // For r = [[a, b], [c, d]]: <X> = b + c, <Y> = i(b - c), <Z> = a - d.
  return Bloch{(r(0, 1) + r(1, 0)).real(), (Complex(0, 1) * (r(0, 1) - r(1, 0))).real(),
               (r(0, 0) - r(1, 1)).real()};
}

CMatrix pauli_x() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

CMatrix pauli_y() {
  CMatrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

CMatrix pauli_z() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

}  // namespace zqvae
