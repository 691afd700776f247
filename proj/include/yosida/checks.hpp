#pragma once

// Statistical admission tests for operator families: nonexpansive
// resolvents, the control inequality of the declared assumption kind and
// its omega-perturbed form, and the history Lipschitz bound of the shifted
// resolvent. Violations are report content, never exceptions.

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "yosida/operators.hpp"

namespace yosida {

struct CheckReport {
  std::string name;
  std::size_t samples = 0;
  std::size_t violations = 0;
  /// Largest LHS - RHS seen (negative when every sample held with margin).
  double max_violation = 0.0;
  /// Check-specific ratio, e.g. observed Lipschitz factor over the bound.
  double max_ratio = 0.0;
  /// Zero samples were requested; a pass carries no information.
  bool vacuous = false;
  std::vector<std::string> notes;
  std::map<std::string, double> extras;

  bool passed() const { return violations == 0; }
  std::string summary() const;
};

struct SamplerConfig {
  std::size_t n_samples = 10000;
  std::uint64_t seed = 1;
  /// Absolute slack, scaled by (1 + size of the compared quantities).
  double tol = 1e-9;
  double t_range = 20.0;
  double lambda_min = 1e-3;
  double lambda_max = 10.0;
  double state_scale = 3.0;
};

/// |J_lambda(t, phi) z1 - J_lambda(t, phi) z2| <= |z1 - z2| on samples. A
/// resolvent that cannot be formed counts as a violation.
CheckReport check_dissipativity(const Operator& op, const SamplerConfig& cfg);

/// The declared control inequality (uniform-continuity or Lipschitz kind)
/// for pairs on the graph of A(t_i, phi_i), plus its omega-perturbed form for
/// A + omega I with h^omega = (h, |omega| g) and L1^omega(s) = L1(s) + s.
/// The perturbed form is checked with lambda on the k-term and on the omega
/// term; the residuals of the form without those factors are recorded under
/// extras["unscaled_*"] as diagnostics only.
CheckReport check_control_inequality(const Operator& op, const SamplerConfig& cfg);

/// |J^omega(t, phi1) z - J^omega(t, phi2) z| <= K0 lambda/(1 - lambda omega) |phi1 - phi2|_E.
/// max_ratio is the largest observed factor divided by lambda/(1 - lambda omega),
/// i.e. an empirical K to compare with K0.
CheckReport history_lipschitz_check(const Operator& op, const SamplerConfig& cfg);

}  // namespace yosida
