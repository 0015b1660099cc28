#include "zqvae/channel.hpp"

#include <cmath>

namespace zqvae {

namespace {

void apply_ry(CMatrix& u, int n, int qubit, double theta) {
  const Eigen::Index mask = Eigen::Index{1} << (n - 1 - qubit);
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    if (i & mask) continue;
    const Eigen::Index j = i | mask;
    for (Eigen::Index k = 0; k < u.cols(); ++k) {
      const Complex a = u(i, k);
      const Complex b = u(j, k);
      u(i, k) = c * a - s * b;
      u(j, k) = s * a + c * b;
    }
  }
}

void apply_rzz(CMatrix& u, int n, int qa, int qb, double theta) {
  const int ba = n - 1 - qa;
  const int bb = n - 1 - qb;
  const Complex same = std::polar(1.0, -theta / 2.0);
  const Complex diff = std::polar(1.0, theta / 2.0);
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    const bool parity = (((i >> ba) ^ (i >> bb)) & 1) != 0;
    u.row(i) *= parity ? diff : same;
  }
}

void check_params(const AnsatzSpec& spec, const AnsatzParams& params) {
  spec.validate();
  if (params.size() != spec.param_count()) {
    throw DimensionError("ansatz expects " + std::to_string(spec.param_count()) +
                         " parameters, got " + std::to_string(params.size()));
  }
}

// Rows {0, stride, 2*stride, ...} of `u`, i.e. U restricted to inputs whose
// trailing qubits are |0>.
CMatrix strided_rows(const CMatrix& u, Eigen::Index count, Eigen::Index stride) {
  CMatrix w(count, u.cols());
  for (Eigen::Index i = 0; i < count; ++i) w.row(i) = u.row(i * stride);
  return w;
}

}  // namespace

void AnsatzSpec::validate() const {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw DimensionError("ansatz qubit count " + std::to_string(n_qubits) + " out of range");
  }
  if (n_layers < 0) throw ValidationError("ansatz layer count must be non-negative");
}

CMatrix build_unitary(const AnsatzSpec& spec, const AnsatzParams& params) {
  check_params(spec, params);
  const int n = spec.n_qubits;
  const Eigen::Index dim = qubit_dim(n);
  CMatrix u = CMatrix::Identity(dim, dim);
  Eigen::Index k = 0;
  for (int layer = 0; layer < spec.n_layers; ++layer) {
    if (n >= 2) {
      for (int q = 0; q < n; ++q) apply_rzz(u, n, q, (q + 1) % n, params(k++));
      for (int q = 0; q < n; ++q) apply_ry(u, n, q, params(k++));
    } else {
      apply_ry(u, n, 0, params(k++));
    }
  }
  return u;
}

std::pair<AnsatzSpec, AnsatzParams> adjoint_ansatz(const AnsatzSpec& spec, const AnsatzParams& params) {
  check_params(spec, params);
  const int n = spec.n_qubits;
  const int layers = spec.n_layers;
  if (n == 1) {
    return {spec, -params.reverse()};
  }
  // Layer l (1-based) of the original holds zz_l then y_l. The adjoint, in
  // time order, is y_L^-1, zz_L^-1, y_{L-1}^-1, ..., zz_1^-1; regrouping into
  // Rzz-then-Ry layers needs one extra layer with empty ends.
  const AnsatzSpec out_spec{n, layers + 1};
  AnsatzParams out = AnsatzParams::Zero(out_spec.param_count());
  auto zz = [&](int layer) { return params.segment((layer - 1) * 2 * n, n); };
  auto y = [&](int layer) { return params.segment((layer - 1) * 2 * n + n, n); };
  for (int m = 1; m <= layers + 1; ++m) {
    const Eigen::Index base = (m - 1) * 2 * n;
    if (m > 1) out.segment(base, n) = -zz(layers - m + 2);
    if (m <= layers) out.segment(base + n, n) = -y(layers - m + 1);
  }
  return {out_spec, out};
}

void EncoderSpec::validate() const {
  if (n_z < 1 || n_z > n_x) throw DimensionError("encoder needs 1 <= n_z <= n_x");
  if (n_aux < 0) throw ValidationError("encoder ancilla count must be non-negative");
  ansatz().validate();
}

void DecoderSpec::validate() const {
  if (n_z < 1 || n_z > n_x) throw DimensionError("decoder needs 1 <= n_z <= n_x");
  if (n_aux < 0) throw ValidationError("decoder ancilla count must be non-negative");
  ansatz().validate();
}

int default_aux_count(int n_x, int n_z) {
  if (n_z > n_x) throw DimensionError("default_aux_count needs n_z <= n_x");
  return n_x + 2 * n_z;
}

DensityMatrix apply_encoder(const EncoderSpec& enc, const CMatrix& unitary, const DensityMatrix& rho) {
  if (rho.n_qubits() != enc.n_x) {
    throw DimensionError("encoder expects " + std::to_string(enc.n_x) + " input qubits, got " +
                         std::to_string(rho.n_qubits()));
  }
  const int total = enc.n_x + enc.n_aux;
  if (unitary.rows() != qubit_dim(total)) throw DimensionError("encoder unitary has wrong dimension");
  // (rho (x) |0><0|_aux) only touches rows/cols that are multiples of 2^n_aux.
  const CMatrix w = strided_rows(unitary, rho.dim(), qubit_dim(enc.n_aux));
  if (rho.is_pure(1e-12)) {
    // Rank one: push the state vector through and trace out of phi phi^dag.
    Eigen::Index k = 0;
    rho.matrix().diagonal().real().maxCoeff(&k);
    const CVector psi = rho.matrix().col(k) / std::sqrt(rho.matrix()(k, k).real());
    const CVector phi = w.adjoint() * psi;
    const Eigen::Index kept = qubit_dim(enc.n_z);
    const Eigen::Index tail = qubit_dim(enc.n_aux);
    const Eigen::Index head = qubit_dim(enc.n_trash());
    CMatrix out = CMatrix::Zero(kept, kept);
    for (Eigen::Index h = 0; h < head; ++h) {
      for (Eigen::Index t = 0; t < tail; ++t) {
        const auto block = phi(Eigen::seqN(h * kept * tail + t, kept, tail));
        out.noalias() += block * block.adjoint();
      }
    }
    return DensityMatrix::trusted(symmetrize(out));
  }
  const CMatrix dilated = w.adjoint() * rho.matrix() * w;
  std::vector<int> traced;
  for (int q = 0; q < enc.n_trash(); ++q) traced.push_back(q);
  for (int q = enc.n_x; q < total; ++q) traced.push_back(q);
  return DensityMatrix::trusted(symmetrize(partial_trace(dilated, total, traced)));
}

DensityMatrix apply_decoder(const DecoderSpec& dec, const CMatrix& unitary, const DensityMatrix& zeta) {
  if (zeta.n_qubits() != dec.n_z) {
    throw DimensionError("decoder expects " + std::to_string(dec.n_z) + " latent qubits, got " +
                         std::to_string(zeta.n_qubits()));
  }
  const int total = dec.n_x + dec.n_aux;
  if (unitary.rows() != qubit_dim(total)) throw DimensionError("decoder unitary has wrong dimension");
  const CMatrix w = strided_rows(unitary, zeta.dim(), qubit_dim(dec.n_trash() + dec.n_aux));
  const CMatrix dilated = w.adjoint() * zeta.matrix() * w;
  if (dec.n_aux == 0) return DensityMatrix::trusted(symmetrize(dilated));
  std::vector<int> traced;
  for (int q = dec.n_x; q < total; ++q) traced.push_back(q);
  return DensityMatrix::trusted(symmetrize(partial_trace(dilated, total, traced)));
}

DensityMatrix encode(const EncoderSpec& enc, const AnsatzParams& params, const DensityMatrix& rho) {
  enc.validate();
  return apply_encoder(enc, build_unitary(enc.ansatz(), params), rho);
}

DensityMatrix decode(const DecoderSpec& dec, const AnsatzParams& params, const DensityMatrix& zeta) {
  dec.validate();
  return apply_decoder(dec, build_unitary(dec.ansatz(), params), zeta);
}

ModelSpec ModelSpec::symmetric(int n_x, int n_z, int n_aux, int n_layers) {
  return ModelSpec{EncoderSpec{n_x, n_z, n_aux, n_layers}, DecoderSpec{n_x, n_z, n_aux, n_layers}};
}

void ModelSpec::validate() const {
  encoder.validate();
  decoder.validate();
  if (encoder.n_x != decoder.n_x || encoder.n_z != decoder.n_z) {
    throw DimensionError("encoder and decoder disagree on n_x / n_z");
  }
}

CompiledModel::CompiledModel(ModelSpec spec, const ModelParams& params) : spec_(std::move(spec)) {
  spec_.validate();
  u_ = build_unitary(spec_.encoder.ansatz(), params.theta_e);
  v_ = build_unitary(spec_.decoder.ansatz(), params.theta_d);
}

DensityMatrix CompiledModel::encode(const DensityMatrix& rho) const {
  return apply_encoder(spec_.encoder, u_, rho);
}

DensityMatrix CompiledModel::decode(const DensityMatrix& zeta) const {
  return apply_decoder(spec_.decoder, v_, zeta);
}

CptpReport verify_cptp(const Channel& channel, int n_in, int trials, Rng& rng, double tolerance) {
  CptpReport report;
  report.tolerance = tolerance;
  constexpr int kMixture = 3;
  for (int t = 0; t < trials; ++t) {
    std::vector<DensityMatrix> inputs;
    std::vector<double> weights;
    double wsum = 0.0;
    for (int k = 0; k < kMixture; ++k) {
      inputs.push_back(DensityMatrix::trusted(random_density(rng, n_in)));
      weights.push_back(rng.uniform() + 1e-3);
      wsum += weights.back();
    }
    CMatrix mix = CMatrix::Zero(inputs[0].dim(), inputs[0].dim());
    for (int k = 0; k < kMixture; ++k) {
      weights[k] /= wsum;
      mix += weights[k] * inputs[k].matrix();
    }
    const DensityMatrix out_mix = channel(DensityMatrix::trusted(mix));
    CMatrix combined = CMatrix::Zero(out_mix.dim(), out_mix.dim());
    auto track = [&](const DensityMatrix& out) {
      report.max_trace_deviation = std::max(report.max_trace_deviation, std::abs(out.trace() - 1.0));
      report.min_eigenvalue = std::min(report.min_eigenvalue, eigh(out.matrix()).values.minCoeff());
    };
    for (int k = 0; k < kMixture; ++k) {
      const DensityMatrix out = channel(inputs[k]);
      if (out.dim() != out_mix.dim()) throw DimensionError("verify_cptp: channel output dimension varies");
      track(out);
      combined += weights[k] * out.matrix();
    }
    track(out_mix);
    report.max_linearity_violation =
        std::max(report.max_linearity_violation, (out_mix.matrix() - combined).cwiseAbs().maxCoeff());
    ++report.trials;
  }
  return report;
}

}  // namespace zqvae
