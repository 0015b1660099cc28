// linalg.hpp
// Dense complex-matrix kernel: tensor products, partial traces, Hermitian
// eigendecomposition, spectral matrix functions and random states.
//
// Qubit convention: qubit 0 is the MOST significant bit of a computational
// basis index, so for n qubits the basis index is b_0 b_1 ... b_{n-1} read as
// a binary number. Circuit diagrams read top-to-bottom map to qubits 0..n-1.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "zqvae/error.hpp"
#include "zqvae/rng.hpp"

namespace zqvae {

template <typename Real>
using CMatrixT = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using CVectorT = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
template <typename Real>
using RVectorT = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using Complex = std::complex<double>;
using CMatrix = CMatrixT<double>;
using CVector = CVectorT<double>;
using RVector = RVectorT<double>;
using RMatrix = Eigen::MatrixXd;

inline constexpr int kMaxQubits = 12;
inline constexpr Eigen::Index kMaxDim = Eigen::Index{1} << kMaxQubits;

// Clamp applied to eigenvalues before taking logarithms.
inline constexpr double kEigenvalueFloor = 1e-12;
inline constexpr double kHermitianTol = 1e-10;

inline Eigen::Index qubit_dim(int n_qubits) {
  if (n_qubits < 0 || n_qubits > kMaxQubits) {
    throw DimensionError("qubit count " + std::to_string(n_qubits) + " outside [0, " +
                         std::to_string(kMaxQubits) + "]");
  }
  return Eigen::Index{1} << n_qubits;
}

// log2 of a power-of-two dimension; throws otherwise.
inline int qubits_for_dim(Eigen::Index dim) {
  int n = 0;
  while ((Eigen::Index{1} << n) < dim && n <= kMaxQubits) ++n;
  if ((Eigen::Index{1} << n) != dim) {
    throw DimensionError("dimension " + std::to_string(dim) + " is not a power of two");
  }
  return n;
}

// Kronecker product, (a (x) b)[i*db + k, j*db + l] = a[i,j] * b[k,l].
template <typename DerivedA, typename DerivedB>
auto kron(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  using Result = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index rows = a.rows() * b.rows();
  const Eigen::Index cols = a.cols() * b.cols();
  if (rows > kMaxDim || cols > kMaxDim) {
    throw DimensionError("kron result " + std::to_string(rows) + "x" + std::to_string(cols) +
                         " exceeds the desk-scale limit of " + std::to_string(kMaxDim));
  }
  Result out(rows, cols);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

// Largest entry of |m - m^dagger|.
template <typename Derived>
auto hermitian_residual(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() != m.cols()) throw DimensionError("matrix is not square");
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

template <typename Derived>
auto symmetrize(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  using Result = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Result out = (m + m.adjoint()) * typename Eigen::NumTraits<Scalar>::Real(0.5);
  return out;
}

// Trace over the qubits listed in `traced`; the remaining qubits keep their
// relative order.
template <typename Derived>
auto partial_trace(const Eigen::MatrixBase<Derived>& m, int n_qubits, std::span<const int> traced) {
  using Scalar = typename Derived::Scalar;
  using Result = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index dim = qubit_dim(n_qubits);
  if (m.rows() != dim || m.cols() != dim) {
    throw DimensionError("partial_trace: matrix is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", expected dimension " + std::to_string(dim));
  }
  std::vector<bool> is_traced(static_cast<std::size_t>(n_qubits), false);
  for (int q : traced) {
    if (q < 0 || q >= n_qubits) {
      throw DimensionError("partial_trace: qubit index " + std::to_string(q) + " out of range");
    }
    is_traced[static_cast<std::size_t>(q)] = true;
  }
  std::vector<int> kept_bits;
  std::vector<int> traced_bits;
  for (int q = 0; q < n_qubits; ++q) {
    const int bit = n_qubits - 1 - q;
    (is_traced[static_cast<std::size_t>(q)] ? traced_bits : kept_bits).push_back(bit);
  }
  // Offsets into the full index for every kept / traced sub-index, both read
  // most-significant qubit first.
  auto offsets = [](const std::vector<int>& bits) {
    const std::size_t count = std::size_t{1} << bits.size();
    std::vector<Eigen::Index> off(count, 0);
    for (std::size_t s = 0; s < count; ++s) {
      Eigen::Index full = 0;
      for (std::size_t b = 0; b < bits.size(); ++b) {
        if ((s >> (bits.size() - 1 - b)) & 1U) full |= Eigen::Index{1} << bits[b];
      }
      off[s] = full;
    }
    return off;
  };
  const auto keep_off = offsets(kept_bits);
  const auto trace_off = offsets(traced_bits);
  const auto dk = static_cast<Eigen::Index>(keep_off.size());
  Result out = Result::Zero(dk, dk);
  for (Eigen::Index i = 0; i < dk; ++i) {
    for (Eigen::Index j = 0; j < dk; ++j) {
      Scalar acc(0);
      for (Eigen::Index t : trace_off) acc += m(keep_off[i] + t, keep_off[j] + t);
      out(i, j) = acc;
    }
  }
  return out;
}

template <typename Derived>
auto partial_trace(const Eigen::MatrixBase<Derived>& m, int n_qubits, std::initializer_list<int> traced) {
  return partial_trace(m, n_qubits, std::span<const int>(traced.begin(), traced.size()));
}

template <typename Real>
struct EigenSystemT {
  RVectorT<Real> values;    // ascending
  CMatrixT<Real> vectors;   // columns, phase-fixed
};
using EigenSystem = EigenSystemT<double>;

// Hermitian eigendecomposition with a deterministic gauge: eigenvalues
// ascending, and each eigenvector's first non-negligible component made real
// and positive.
template <typename Derived>
auto eigh(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  if (m.rows() != m.cols()) throw DimensionError("eigh: matrix is not square");
  if (hermitian_residual(m) > Real(kHermitianTol)) {
    throw ValidationError("eigh: matrix is not Hermitian (residual " +
                          std::to_string(static_cast<double>(hermitian_residual(m))) + ")");
  }
  Eigen::SelfAdjointEigenSolver<CMatrixT<Real>> solver(symmetrize(m));
  if (solver.info() != Eigen::Success) throw RuntimeFailure("eigh: eigensolver did not converge");
  EigenSystemT<Real> sys{solver.eigenvalues(), solver.eigenvectors()};
  for (Eigen::Index c = 0; c < sys.vectors.cols(); ++c) {
    for (Eigen::Index r = 0; r < sys.vectors.rows(); ++r) {
      const auto z = sys.vectors(r, c);
      if (std::abs(z) > Real(1e-12)) {
        sys.vectors.col(c) *= std::conj(z) / std::abs(z);
        break;
      }
    }
  }
  return sys;
}

// f applied to the spectrum of a Hermitian PSD matrix, eigenvalues clamped
// from below at `eigenvalue_floor` first.
template <typename Derived, typename F>
auto mat_func(const Eigen::MatrixBase<Derived>& m, F&& f, double eigenvalue_floor) {
  using Scalar = typename Derived::Scalar;
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  const auto sys = eigh(m);
  if (sys.values.size() > 0 && sys.values.minCoeff() < Real(-kHermitianTol)) {
    throw ValidationError("mat_func: matrix is not positive semidefinite (min eigenvalue " +
                          std::to_string(static_cast<double>(sys.values.minCoeff())) + ")");
  }
  RVectorT<Real> mapped(sys.values.size());
  for (Eigen::Index i = 0; i < sys.values.size(); ++i) {
    const Real v = std::max(sys.values(i), Real(eigenvalue_floor));
    mapped(i) = static_cast<Real>(f(v));
    if (!std::isfinite(static_cast<double>(mapped(i)))) {
      throw ValidationError("mat_func: function is undefined at clamped eigenvalue " +
                            std::to_string(static_cast<double>(v)) +
                            "; raise the eigenvalue floor");
    }
  }
  CMatrixT<Real> out = sys.vectors * mapped.asDiagonal() * sys.vectors.adjoint();
  return CMatrixT<Real>(symmetrize(out));
}

// Complex Ginibre matrix with i.i.d. standard normal real/imaginary parts.
template <typename Real = double>
CMatrixT<Real> ginibre(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  CMatrixT<Real> g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const Real re = static_cast<Real>(rng.normal());
      const Real im = static_cast<Real>(rng.normal());
      g(i, j) = {re, im};
    }
  }
  return g;
}

// Full-rank random density matrix G G^dagger / Tr(G G^dagger).
template <typename Real = double>
CMatrixT<Real> random_density(Rng& rng, int n_qubits) {
  if (n_qubits < 1) throw DimensionError("random_density needs at least one qubit");
  const Eigen::Index d = qubit_dim(n_qubits);
  const CMatrixT<Real> g = ginibre<Real>(rng, d, d);
  CMatrixT<Real> rho = g * g.adjoint();
  rho /= rho.trace().real();
  return CMatrixT<Real>(symmetrize(rho));
}

template <typename Real = double>
CVectorT<Real> random_state_vector(Rng& rng, int n_qubits) {
  if (n_qubits < 1) throw DimensionError("random_pure needs at least one qubit");
  CVectorT<Real> v = ginibre<Real>(rng, qubit_dim(n_qubits), 1);
  v.normalize();
  return v;
}

template <typename Real = double>
CMatrixT<Real> random_pure(Rng& rng, int n_qubits) {
  const CVectorT<Real> v = random_state_vector<Real>(rng, n_qubits);
  return v * v.adjoint();
}

// Haar unitary from the QR decomposition of a Ginibre matrix, with the
// diagonal phases of R folded back into Q.
template <typename Real = double>
CMatrixT<Real> random_unitary(Rng& rng, Eigen::Index dim) {
  if (dim < 1) throw DimensionError("random_unitary needs dim >= 1");
  const CMatrixT<Real> g = ginibre<Real>(rng, dim, dim);
  Eigen::HouseholderQR<CMatrixT<Real>> qr(g);
  CMatrixT<Real> q = qr.householderQ();
  const CMatrixT<Real> r = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < dim; ++i) {
    const auto d = r(i, i);
    if (std::abs(d) > Real(0)) q.col(i) *= d / std::abs(d);
  }
  return q;
}

template <typename Real = double>
CMatrixT<Real> random_hermitian(Rng& rng, Eigen::Index dim) {
  const CMatrixT<Real> g = ginibre<Real>(rng, dim, dim);
  return CMatrixT<Real>(symmetrize(g));
}

}  // namespace zqvae
