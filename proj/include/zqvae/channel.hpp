// channel.hpp
// Layered Rzz/Ry ansatz circuits and the encoder/decoder channels built from
// them by ancilla dilation and partial trace.
//
// Register layouts (qubit 0 first):
//   encoder input   [ X (n_x) | aux (n_a) ]      trash = first n_t of X
//   encoder output  [ Z (n_z) ]                  = last n_z qubits of X
//   decoder input   [ Z (n_z) | |0> (n_t) | aux (n_b) ]
//   decoder output  [ X (n_x) ]                  aux traced out
// Both channels conjugate as U^dagger (.) U.

#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "zqvae/linalg.hpp"
#include "zqvae/qstate.hpp"

namespace zqvae {

// Per layer: Rzz on the ring pairs (0,1), (1,2), ..., (n-1,0), then Ry on
// every qubit. A single-qubit ansatz is a chain of Ry gates.
//   Rzz(t) = exp(-i t/2 Z(x)Z),  Ry(t) = exp(-i t/2 Y)
struct AnsatzSpec {
  int n_qubits = 1;
  int n_layers = 1;

  int params_per_layer() const { return n_qubits >= 2 ? 2 * n_qubits : 1; }
  int param_count() const { return n_layers * params_per_layer(); }
  void validate() const;
};

using AnsatzParams = RVector;

CMatrix build_unitary(const AnsatzSpec& spec, const AnsatzParams& params);

// Parameters of an (n_layers + 1)-layer ansatz whose unitary is the adjoint of
// build_unitary(spec, params).
std::pair<AnsatzSpec, AnsatzParams> adjoint_ansatz(const AnsatzSpec& spec, const AnsatzParams& params);

struct EncoderSpec {
  int n_x = 2;
  int n_z = 1;
  int n_aux = 0;
  int n_layers = 1;

  int n_trash() const { return n_x - n_z; }
  AnsatzSpec ansatz() const { return {n_x + n_aux, n_layers}; }
  void validate() const;
};

struct DecoderSpec {
  int n_x = 2;
  int n_z = 1;
  int n_aux = 0;
  int n_layers = 1;

  int n_trash() const { return n_x - n_z; }
  AnsatzSpec ansatz() const { return {n_x + n_aux, n_layers}; }
  void validate() const;
};

// Sufficient ancilla count for arbitrary encoder/decoder channels.
int default_aux_count(int n_x, int n_z);

// Channel application from a prebuilt unitary.
DensityMatrix apply_encoder(const EncoderSpec& enc, const CMatrix& unitary, const DensityMatrix& rho);
DensityMatrix apply_decoder(const DecoderSpec& dec, const CMatrix& unitary, const DensityMatrix& zeta);

DensityMatrix encode(const EncoderSpec& enc, const AnsatzParams& params, const DensityMatrix& rho);
DensityMatrix decode(const DecoderSpec& dec, const AnsatzParams& params, const DensityMatrix& zeta);

struct ModelSpec {
  EncoderSpec encoder;
  DecoderSpec decoder;

  // Same layer and ancilla counts on both sides.
  static ModelSpec symmetric(int n_x, int n_z, int n_aux, int n_layers);
  int n_x() const { return encoder.n_x; }
  int n_z() const { return encoder.n_z; }
  void validate() const;
};

struct ModelParams {
  AnsatzParams theta_e;
  AnsatzParams theta_d;
};

// Encoder/decoder pair with its unitaries built once.
class CompiledModel {
 public:
  CompiledModel(ModelSpec spec, const ModelParams& params);

  const ModelSpec& spec() const { return spec_; }
  DensityMatrix encode(const DensityMatrix& rho) const;
  DensityMatrix decode(const DensityMatrix& zeta) const;
  DensityMatrix reconstruct(const DensityMatrix& rho) const { return decode(encode(rho)); }

 private:
  ModelSpec spec_;
  CMatrix u_;
  CMatrix v_;
};

using Channel = std::function<DensityMatrix(const DensityMatrix&)>;

struct CptpReport {
  int trials = 0;
  double max_trace_deviation = 0.0;
  double min_eigenvalue = 1.0;
  double max_linearity_violation = 0.0;
  double tolerance = 1e-9;

  bool trace_ok() const { return max_trace_deviation <= tolerance; }
  bool positivity_ok() const { return min_eigenvalue >= -tolerance; }
  bool linearity_ok() const { return max_linearity_violation <= tolerance; }
  bool passed() const { return trace_ok() && positivity_ok() && linearity_ok(); }
};

// Probes `channel` on `trials` random inputs over n_in qubits: trace
// preservation, positivity of outputs, and linearity on random 3-point
// mixtures.
CptpReport verify_cptp(const Channel& channel, int n_in, int trials, Rng& rng, double tolerance = 1e-9);

}  // namespace zqvae
