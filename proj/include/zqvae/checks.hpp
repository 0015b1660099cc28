// checks.hpp
// Randomized property suites: channel CPTP-ness, the ELBO-style bound, the
// global/instance objective equivalence and divergence axioms.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace zqvae {

struct SuiteResult {
  std::string name;
  int trials = 0;
  int failures = 0;
  double worst = 0.0;  // worst value of the suite's headline quantity
  std::vector<std::string> notes;

  bool passed() const { return failures == 0 && trials > 0; }
};

// Test hook: perturbs what a suite measures so it must fail.
enum class Fault { None, TraceLeak };

// Random encoders, decoders and their composition at n_x = 2, n_z = 1 with
// one or zero ancillas each: trace deviation <= 1e-9, smallest output
// eigenvalue >= -1e-9, linearity residual <= 1e-10.
SuiteResult cptp_suite(int trials, std::uint64_t seed, Fault fault = Fault::None);

// Random two-qubit models and datasets of 1..8 pure states; a trial fails
// when lhs < rhs - 1e-6. `worst` is the most negative lhs - rhs.
SuiteResult elbo_suite(int trials, std::uint64_t seed);

// Wasserstein reconstruction at beta = 0 on 1..8 random pure states:
// |global - instance / N| <= 1e-9. `worst` is the largest residual.
SuiteResult equivalence_suite(int trials, std::uint64_t seed);

// Same setup with the fidelity loss. Passes when at least one trial shows a
// residual above 1e-3 (the equivalence must not hold there).
SuiteResult equivalence_control_suite(int trials, std::uint64_t seed);

// Non-negativity, identity of indiscernibles, JSD symmetry, KLD against the
// classical formula on commuting pairs and the swap-trick identity.
SuiteResult divergence_suite(int trials, std::uint64_t seed);

std::vector<std::string> suite_names();
SuiteResult run_suite(const std::string& name, int trials, std::uint64_t seed, Fault fault = Fault::None);

}  // namespace zqvae
