#pragma once

#include <cmath>

namespace nlsnpd::detail {

/// eps/(1+eps) - log1p(eps), i.e. 1 - 1/theta - ln(theta) at theta = 1+eps.
/// Uses the power series near eps = 0 where the two terms cancel to
/// O(eps^2).
inline double log_excess(double eps) {
  if (std::abs(eps) < 0.1) {
    // sum_{k>=2} (-1)^(k+1) (1 - 1/k) eps^k
    double power = eps * eps;
    double sum = 0.0;
    for (int k = 2; k < 40; ++k) {
      const double term = (1.0 - 1.0 / k) * power;
      sum += (k % 2 == 0) ? -term : term;
      if (std::abs(term) < 1e-20 * std::abs(sum)) break;
      power *= eps;
    }
    return sum;
  }
  return eps / (1.0 + eps) - std::log1p(eps);
}

struct Bracket {
  double theta;
  double value;  // 1 - 1/theta - ln(theta)
};

/// The bracket at theta = 1 + eta (gamma - 1), gamma = exp(log_gamma).
/// Far from theta = 1 there is no cancellation, and theta is formed
/// directly so that a tiny gamma is not lost to rounding in expm1.
inline Bracket regularized_bracket(double eta, double log_gamma) {
  const double eps = eta * std::expm1(log_gamma);
  if (eps > -0.5) return {1.0 + eps, log_excess(eps)};
  const double gamma = std::exp(log_gamma);
  const double theta = (1.0 - eta) + eta * gamma;
  const double log_theta = eta == 1.0 ? log_gamma : std::log(theta);
  return {theta, 1.0 - 1.0 / theta - log_theta};
}

}  // namespace nlsnpd::detail
