#pragma once

#include <cstdint>

namespace zcp {

/// Parameters of the sample-based coverage bound: calibration size,
/// optimization-variable count, and permitted outliers.
struct GuaranteeQuery {
  long n_m = 1;
  int n_theta = 1;
  int n_out = 0;

  void validate() const;
};

struct ZetaResult {
  double zeta = 0.0;
  /// The leading binomial can push the bound above 1, making it vacuous.
  bool vacuous = false;
};

/// Confidence-violation parameter
///   zeta = C(n_out + n_theta - 1, n_out) * sum_{i=0}^{n_out+n_theta-1}
///          C(n_m, i) eps^i (1-eps)^(n_m-i),
/// evaluated in log space.
ZetaResult zeta(const GuaranteeQuery& q, double epsilon);

struct EpsilonResult {
  double epsilon = 0.0;
  double guaranteed_coverage = 0.0;  // 1 - epsilon
};

/// Solves zeta(eps) = 1 - confidence by bisection (zeta is monotone
/// decreasing in eps); tolerance 1e-9 in eps.
EpsilonResult solve_epsilon(const GuaranteeQuery& q, double confidence);

}  // namespace zcp
