#include "zcp/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace zcp {

void GuaranteeQuery::validate() const {
  if (n_m < 1) throw std::invalid_argument("GuaranteeQuery: n_m must be >= 1");
  if (n_theta < 1) throw std::invalid_argument("GuaranteeQuery: n_theta must be >= 1");
  if (n_out < 0 || n_out >= n_m) {
    throw std::invalid_argument("GuaranteeQuery: require 0 <= n_out < n_m");
  }
}

namespace {

double log_binom(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

ZetaResult zeta(const GuaranteeQuery& q, double epsilon) {
  q.validate();
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("zeta: epsilon must lie in (0,1)");
  }

  const long upper = static_cast<long>(q.n_out) + q.n_theta - 1;
  const double log_eps = std::log(epsilon);
  const double log_1m = std::log1p(-epsilon);

  // Binomial tail sum via log-sum-exp for stability at large n_m.
  double max_term = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(std::min<long>(upper, q.n_m) + 1));
  for (long i = 0; i <= std::min<long>(upper, q.n_m); ++i) {
    const double t = log_binom(static_cast<double>(q.n_m), static_cast<double>(i)) +
                     static_cast<double>(i) * log_eps +
                     static_cast<double>(q.n_m - i) * log_1m;
    terms.push_back(t);
    max_term = std::max(max_term, t);
  }
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - max_term);
  const double log_tail = max_term + std::log(sum);

  const double log_lead =
      log_binom(static_cast<double>(q.n_out + q.n_theta - 1), static_cast<double>(q.n_out));

  ZetaResult res;
  res.zeta = std::exp(log_lead + log_tail);
  res.vacuous = res.zeta >= 1.0;
  return res;
}

EpsilonResult solve_epsilon(const GuaranteeQuery& q, double confidence) {
  q.validate();
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw std::invalid_argument("solve_epsilon: confidence must lie in (0,1)");
  }
  const double target = 1.0 - confidence;

  double lo = 1e-15, hi = 1.0 - 1e-15;
  const double z_lo = zeta(q, lo).zeta;
  const double z_hi = zeta(q, hi).zeta;
  // zeta decreases in epsilon: z_lo is the largest, z_hi the smallest value.
  if (z_lo < target) {
    throw std::domain_error("solve_epsilon: zeta < " + std::to_string(target) +
                            " over all of (0,1); the bound holds even at epsilon -> 0");
  }
  if (z_hi > target) {
    throw std::domain_error("solve_epsilon: zeta > " + std::to_string(target) +
                            " over all of (0,1); no attainable coverage at this confidence "
                            "(increase n_m or lower the confidence)");
  }
  // Tighter than the promised 1e-9 so that zeta(solve_epsilon(.)) recovers
  // the target even at large n_m.
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    if (zeta(q, mid).zeta > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double eps = 0.5 * (lo + hi);
  return {eps, 1.0 - eps};
}

}  // namespace zcp
