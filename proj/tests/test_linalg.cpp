#include "doctest.h"

#include <cmath>
#include <vector>

#include "zqvae/linalg.hpp"

using namespace zqvae;

namespace {

CMatrix eye(Eigen::Index d) { return CMatrix::Identity(d, d); }

// Brute force: Tr_B over a kron(I_left, |b><b|, I_right) sandwich for every
// traced basis vector, one qubit at a time.
CMatrix trace_one_qubit(const CMatrix& m, int n, int q) {
  const Eigen::Index left = Eigen::Index{1} << q;
  const Eigen::Index right = Eigen::Index{1} << (n - 1 - q);
  CMatrix out = CMatrix::Zero(left * right, left * right);
  for (int b = 0; b < 2; ++b) {
    CMatrix e = CMatrix::Zero(2, 1);
    e(b, 0) = 1.0;
    const CMatrix proj = kron(kron(eye(left), e), eye(right));  // (2^n) x (2^(n-1))
    out += proj.adjoint() * m * proj;
  }
  return out;
}

}  // namespace

TEST_SUITE("linalg") {

TEST_CASE("kron of 2x2 blocks") {
  CMatrix a(2, 2);
  a << 1.0, 2.0, 3.0, 4.0;
  CMatrix b(2, 2);
  b << 0.0, 1.0, 1.0, 0.0;
  const CMatrix k = kron(a, b);
  CHECK(k.rows() == 4);
  CHECK(std::abs(k(0, 1) - Complex(1.0)) < 1e-15);
  CHECK(std::abs(k(1, 0) - Complex(1.0)) < 1e-15);
  CHECK(std::abs(k(2, 3) - Complex(4.0)) < 1e-15);
  CHECK(std::abs(k(3, 2) - Complex(4.0)) < 1e-15);
  CHECK(std::abs(k(0, 0)) < 1e-15);
  CHECK(std::abs(k(1, 2) - Complex(2.0)) < 1e-15);
}

TEST_CASE("partial trace of a product state") {
  Rng rng(3);
  const CMatrix a = random_density(rng, 1);
  const CMatrix b = random_density(rng, 2);
  const CMatrix ab = kron(a, b);
  CHECK((partial_trace(ab, 3, {0}) - b).norm() < 1e-13);
  CHECK((partial_trace(ab, 3, {1, 2}) - a).norm() < 1e-13);
}

TEST_CASE("partial trace matches the projector sandwich") {
  Rng rng(11);
  for (int n = 2; n <= 4; ++n) {
    const CMatrix m = random_density(rng, n);
    for (int q = 0; q < n; ++q) {
      const std::vector<int> traced{q};
      CHECK((partial_trace(m, n, traced) - trace_one_qubit(m, n, q)).norm() < 1e-13);
    }
    // two qubits, traced in either listing order
    const CMatrix step = trace_one_qubit(trace_one_qubit(m, n, n - 1), n - 1, 0);
    CHECK((partial_trace(m, n, {0, n - 1}) - step).norm() < 1e-13);
    CHECK((partial_trace(m, n, {n - 1, 0}) - step).norm() < 1e-13);
  }
}

TEST_CASE("partial trace over everything is the trace") {
  Rng rng(5);
  const CMatrix m = random_density(rng, 2);
  const CMatrix t = partial_trace(m, 2, {0, 1});
  REQUIRE(t.rows() == 1);
  CHECK(std::abs(t(0, 0) - Complex(1.0)) < 1e-14);
}

TEST_CASE("partial trace rejects bad shapes") {
  CHECK_THROWS_AS(partial_trace(CMatrix::Identity(3, 3), 2, {0}), DimensionError);
  CHECK_THROWS_AS(partial_trace(CMatrix::Identity(4, 4), 2, {2}), DimensionError);
  CHECK_THROWS_AS(qubit_dim(kMaxQubits + 1), DimensionError);
  CHECK_THROWS_AS(qubits_for_dim(6), DimensionError);
  CHECK(qubits_for_dim(8) == 3);
}

TEST_CASE("eigh: ascending, reconstructs, fixed gauge") {
  Rng rng(7);
  const CMatrix h = random_hermitian(rng, 8);
  const auto sys = eigh(h);
  for (Eigen::Index i = 1; i < sys.values.size(); ++i) CHECK(sys.values(i - 1) <= sys.values(i));
  const CMatrix back = sys.vectors * sys.values.cast<Complex>().asDiagonal() * sys.vectors.adjoint();
  CHECK((back - h).norm() < 1e-12);
  for (Eigen::Index c = 0; c < sys.vectors.cols(); ++c) {
    for (Eigen::Index r = 0; r < sys.vectors.rows(); ++r) {
      if (std::abs(sys.vectors(r, c)) > 1e-12) {
        CHECK(std::abs(sys.vectors(r, c).imag()) < 1e-14);
        CHECK(sys.vectors(r, c).real() > 0.0);
        break;
      }
    }
  }
  // same input twice, same vectors
  CHECK((eigh(h).vectors - sys.vectors).norm() == 0.0);
}

TEST_CASE("eigh rejects non-Hermitian input") {
  CMatrix m(2, 2);
  m << 1.0, 1.0, 0.0, 1.0;
  CHECK_THROWS_AS(eigh(m), ValidationError);
}

TEST_CASE("mat_func sqrt squares back") {
  Rng rng(9);
  const CMatrix rho = random_density(rng, 2);
  const CMatrix s = mat_func(rho, [](double v) { return std::sqrt(v); }, 0.0);
  CHECK((s * s - rho).norm() < 1e-12);
  CHECK(hermitian_residual(s) < 1e-15);
}

TEST_CASE("mat_func log clamps at the floor") {
  CMatrix p = CMatrix::Zero(2, 2);
  p(0, 0) = 1.0;
  const CMatrix l = mat_func(p, [](double v) { return std::log(v); }, kEigenvalueFloor);
  CHECK(std::abs(l(0, 0)) < 1e-12);
  CHECK(std::abs(l(1, 1).real() - std::log(1e-12)) < 1e-9);
  CHECK_THROWS_AS(mat_func(p, [](double v) { return std::log(v); }, 0.0), ValidationError);
  CHECK_THROWS_AS(mat_func(CMatrix(-p), [](double v) { return v; }, 0.0), ValidationError);
}

TEST_CASE("random objects satisfy their invariants") {
  Rng rng(13);
  const CMatrix u = random_unitary(rng, 8);
  CHECK((u.adjoint() * u - eye(8)).norm() < 1e-12);
  const CMatrix rho = random_density(rng, 3);
  CHECK(std::abs(rho.trace() - Complex(1.0)) < 1e-13);
  CHECK(eigh(rho).values.minCoeff() > 0.0);
  const CMatrix psi = random_pure(rng, 2);
  CHECK(std::abs((psi * psi).trace() - Complex(1.0)) < 1e-13);
}

TEST_CASE("float instantiation") {
  Rng rng(1);
  const CMatrixT<float> rho = random_density<float>(rng, 2);
  const CMatrixT<float> r = partial_trace(rho, 2, {1});
  CHECK(std::abs(r.trace().real() - 1.0f) < 1e-5f);
  CHECK(eigh(rho).values.minCoeff() > -1e-6f);
}

TEST_CASE("rng is reproducible and splits independently") {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 16; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(42);
  Rng child0 = c.split(0);
  Rng child1 = c.split(1);
  CHECK(child0.next_u64() != child1.next_u64());
  CHECK(c.next_u64() == Rng(42).next_u64());
  // uniform mean over many draws
  Rng d(1);
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) sum += d.uniform();
  CHECK(sum / 20000.0 == doctest::Approx(0.5).epsilon(0.02));
}

}  // TEST_SUITE
