#include "nlsnpd/exact_solutions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "numerics.hpp"

namespace nlsnpd {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double frac(double u) { return u - std::floor(u); }

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

class AnsatzProfile final : public AnalyticProfile {
 public:
  explicit AnsatzProfile(AnsatzSpec spec) : spec_(std::move(spec)) {}

  Complex amplitude(const Grid1D& grid, long index) const override {
    const long m = grid.shift_steps();
    long r = index % m;
    if (r < 0) r += m;
    const double phase = grid.x0() / spec_.alpha.period +
                         static_cast<double>(r) / static_cast<double>(m);
    return spec_.C * std::exp(-spec_.kappa * grid.x(index)) *
           spec_.alpha.at_phase(phase);
  }

 private:
  AnsatzSpec spec_;
};

// E q / E_s as a series in l = 2 kappa L:
//   sum_{n>=2} q [(q-1)^(n-1) - q^(n-1)] l^n / n!
double qdeformed_series(double l, double q) {
  double sum = 0.0;
  double lpow = l;      // l^n / n!
  double qm = 1.0;      // (q-1)^(n-1)
  double qp = 1.0;      // q^(n-1)
  for (int n = 2; n < 60; ++n) {
    lpow *= l / n;
    qm *= (q - 1.0);
    qp *= q;
    const double term = (qm - qp) * lpow;
    sum += term;
    if (std::abs(term) < 1e-19 * std::abs(sum)) break;
  }
  return q * sum;
}

// E_s-free form of the q relation: q E / E_s given lambda (and its log).
double qdeformed_relation(double lambda, double l, double q) {
  if (std::abs(l) * (q + 1.0) < 0.25) return qdeformed_series(l, q);
  if (std::abs(q - 1.0) < 0.1)
    return std::expm1((q - 1.0) * l) / (q - 1.0) -
           std::exp((q - 1.0) * l) * std::expm1(l);
  return std::pow(lambda, q - 1.0) * (q / (q - 1.0) - lambda) - 1.0 / (q - 1.0);
}

}  // namespace

FourierSeries FourierSeries::sine(double period) {
  FourierSeries s;
  s.period = period;
  s.sin_coef = {1.0};
  return s;
}

double FourierSeries::at_phase(double u) const {
  const double f = frac(u);
  double value = a0;
  const std::size_t modes = std::max(cos_coef.size(), sin_coef.size());
  for (std::size_t k = 1; k <= modes; ++k) {
    const double arg = kTwoPi * frac(static_cast<double>(k) * f);
    if (k <= cos_coef.size()) value += cos_coef[k - 1] * std::cos(arg);
    if (k <= sin_coef.size()) value += sin_coef[k - 1] * std::sin(arg);
  }
  return value;
}

bool FourierSeries::is_single_sine() const {
  if (a0 != 0.0 || sin_coef.empty() || sin_coef[0] != 1.0) return false;
  for (double c : cos_coef)
    if (c != 0.0) return false;
  for (std::size_t k = 1; k < sin_coef.size(); ++k)
    if (sin_coef[k] != 0.0) return false;
  return true;
}

void validate_ansatz(const AnsatzSpec& spec, const ModelParams& params) {
  if (!(spec.alpha.period > 0.0) ||
      !close_rel(spec.alpha.period, params.shift_length(), 1e-12))
    throw DomainError("alpha must be periodic in eta*L");
  if (!std::isfinite(spec.kappa)) throw DomainError("kappa must be finite");
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Box>) {
          if (d.periods <= 0) throw DomainError("box needs at least one period");
        } else if constexpr (std::is_same_v<T, HalfLineRight>) {
          if (!(spec.kappa > 0.0))
            throw DomainError("right half-line needs kappa > 0");
        } else {
          if (!(spec.kappa < 0.0))
            throw DomainError("left half-line needs kappa < 0");
        }
      },
      spec.domain);
}

std::shared_ptr<const AnalyticProfile> ansatz_profile(const AnsatzSpec& spec) {
  return std::make_shared<AnsatzProfile>(spec);
}

WaveField build_ansatz(const AnsatzSpec& spec, const Grid1D& grid) {
  if (!close_rel(grid.shift_length(), spec.alpha.period, 1e-12))
    throw DomainError("grid shift does not match the period of alpha");
  if (!std::isfinite(spec.kappa)) throw DomainError("kappa must be finite");
  const double tol = 1e-9 * grid.dx();
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Box>) {
          if (d.periods <= 0) throw DomainError("box needs at least one period");
          const double right = static_cast<double>(d.periods) * spec.alpha.period;
          if (grid.x0() < -tol || grid.back() > right + tol + 1e-12 * right)
            throw DomainError("grid extends outside the box");
        } else if constexpr (std::is_same_v<T, HalfLineRight>) {
          if (!(spec.kappa > 0.0))
            throw DomainError("right half-line needs kappa > 0");
          if (grid.x0() < -tol)
            throw DomainError("grid extends left of the half-line");
        } else {
          if (!(spec.kappa < 0.0))
            throw DomainError("left half-line needs kappa < 0");
          if (grid.back() > tol)
            throw DomainError("grid extends right of the half-line");
        }
      },
      spec.domain);

  auto profile = ansatz_profile(spec);
  std::vector<Complex> values(static_cast<std::size_t>(grid.size()));
  for (long i = 0; i < grid.size(); ++i)
    values[static_cast<std::size_t>(i)] = profile->amplitude(grid, i);
  return WaveField(grid, std::move(values), AnsatzExtension{profile, grid});
}

double inverse_norm_squared(double kappa, long periods,
                            const ModelParams& params) {
  if (periods <= 0) throw DomainError("normalization needs N >= 1");
  const double shift = params.shift_length();
  const double n = static_cast<double>(periods);
  if (kappa == 0.0) return n * shift / 2.0;
  const double log_gamma = -2.0 * kappa * shift;
  const double sixteen_pi2 = 16.0 * std::numbers::pi * std::numbers::pi;
  const double one_minus_gamma_n = -std::expm1(n * log_gamma);
  return one_minus_gamma_n / (4.0 * kappa) * sixteen_pi2 /
         (log_gamma * log_gamma + sixteen_pi2);
}

double normalization_constant(double kappa, long periods,
                              const ModelParams& params) {
  return 1.0 / std::sqrt(inverse_norm_squared(kappa, periods, params));
}

AnsatzSpec make_normalized_ansatz(double kappa, FourierSeries alpha,
                                  AnsatzDomain domain, const ModelParams& params,
                                  const Grid1D& grid) {
  AnsatzSpec spec{kappa, std::move(alpha), domain, 1.0, 0.0};
  validate_ansatz(spec, params);
  spec.E = energy_regularized(kappa, params).E;
  if (spec.alpha.is_single_sine()) {
    if (const auto* box = std::get_if<Box>(&spec.domain)) {
      spec.C = normalization_constant(kappa, box->periods, params);
    } else {
      // Half-line: the N -> infinity limit, symmetric in the sign of kappa.
      const double log_gamma = -2.0 * kappa * params.shift_length();
      const double sixteen_pi2 = 16.0 * std::numbers::pi * std::numbers::pi;
      const double inv = 1.0 / (4.0 * std::abs(kappa)) * sixteen_pi2 /
                         (log_gamma * log_gamma + sixteen_pi2);
      spec.C = 1.0 / std::sqrt(inv);
    }
    return spec;
  }
  const double norm = build_ansatz(spec, grid).norm_squared();
  if (!(norm > 0.0)) throw DomainError("ansatz has zero norm on the grid");
  spec.C = 1.0 / std::sqrt(norm);
  return spec;
}

SpectrumPoint energy_regularized(double kappa, const ModelParams& params) {
  const double eta = params.eta();
  const double log_gamma = -2.0 * kappa * params.shift_length();
  const detail::Bracket b = detail::regularized_bracket(eta, log_gamma);
  if (!(b.theta > 0.0)) throw DomainError("theta must be positive");
  SpectrumPoint sp;
  sp.kappa = kappa;
  sp.gamma = std::exp(log_gamma);
  sp.theta = b.theta;
  sp.E = params.energy_scale() / (eta * eta * eta * eta) * b.value;
  return sp;
}

EnergyBound energy_bound_regularized(const ModelParams& params) {
  const double eta = params.eta();
  EnergyBound bound;
  if (eta < 0.05)
    bound.small_eta_asymptote = -params.energy_scale() / (2.0 * eta * eta);
  if (eta >= 1.0) return bound;
  bound.bounded = true;
  bound.value = params.energy_scale() / (eta * eta * eta * eta) *
                detail::log_excess(-eta);
  return bound;
}

SpectrumPoint energy_qdeformed(double kappa, const ModelParams& params) {
  const double l = 2.0 * kappa * params.L();
  const double q = params.q();
  if (q == 1.0) {
    SpectrumPoint sp = energy_regularized(kappa, params.with_eta(1.0));
    sp.lambda = std::exp(l);
    return sp;
  }
  SpectrumPoint sp;
  sp.kappa = kappa;
  sp.lambda = std::exp(l);
  sp.E = params.energy_scale() / q * qdeformed_relation(*sp.lambda, l, q);
  return sp;
}

SpectrumPoint energy_qdeformed_at_lambda(double lambda,
                                         const ModelParams& params) {
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  const double l = std::log(lambda);
  const double q = params.q();
  if (q == 1.0) return energy_qdeformed(l / (2.0 * params.L()), params);
  SpectrumPoint sp;
  sp.kappa = l / (2.0 * params.L());
  sp.lambda = lambda;
  sp.E = params.energy_scale() / q * qdeformed_relation(lambda, l, q);
  return sp;
}

EnergyBound energy_bound_qdeformed(const ModelParams& params) {
  const double q = params.q();
  EnergyBound bound;
  if (q > 1.0) {
    bound.bounded = true;
    bound.value = -params.energy_scale() / (q * (q - 1.0));
  }
  return bound;
}

double energy_symmetrized(double kappa, const ModelParams& params) {
  const double eta = params.eta();
  const double log_gamma = -2.0 * kappa * params.shift_length();
  return 0.5 * params.energy_scale() / (eta * eta * eta * eta) *
         (detail::regularized_bracket(eta, log_gamma).value +
          detail::regularized_bracket(eta, -log_gamma).value);
}

double solve_kappa(double E_target, Family family, const ModelParams& params) {
  if (!(E_target <= 0.0))
    throw RangeError("target energy must be <= 0 on the normalizable branch");
  if (E_target == 0.0) return 0.0;
  const EnergyBound bound = family == Family::Regularized
                                ? energy_bound_regularized(params)
                                : energy_bound_qdeformed(params);
  if (bound.bounded && E_target <= bound.value)
    throw RangeError("target energy " + std::to_string(E_target) +
                     " lies at or below the spectrum bound " +
                     std::to_string(bound.value));

  // Map both branches onto s >= 0 with energy decreasing in s.
  const double sign = family == Family::Regularized ? 1.0 : -1.0;
  auto energy = [&](double s) -> double {
    try {
      return family == Family::Regularized
                 ? energy_regularized(sign * s, params).E
                 : energy_qdeformed(sign * s, params).E;
    } catch (const DomainError&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  double lo = 0.0;
  double hi = 1.0 / params.L();
  int doublings = 0;
  while (!(energy(hi) < E_target)) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 1100 || !std::isfinite(hi))
      throw RangeError("target energy not reachable");
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (energy(mid) < E_target)
      hi = mid;
    else
      lo = mid;
  }
  const double best =
      std::abs(energy(lo) - E_target) <= std::abs(energy(hi) - E_target) ? lo
                                                                         : hi;
  return sign * best;
}

LimitReport limit_consistency_q_to_1(const ModelParams& params,
                                     int lambda_count) {
  const ModelParams base = params.with_eta(1.0);
  LimitReport report;
  for (double q : {1.0 - 1e-3, 1.0 + 1e-3, 1.0 - 1e-6, 1.0 + 1e-6, 1.0}) {
    const ModelParams qp = base.with_q(q);
    for (int j = 1; j <= lambda_count; ++j) {
      const double lambda =
          static_cast<double>(j) / static_cast<double>(lambda_count + 1);
      const double kappa = std::log(lambda) / (2.0 * base.L());
      LimitRow row;
      row.parameter = q;
      row.lambda = lambda;
      row.E_family = energy_qdeformed(kappa, qp).E;
      row.E_reference = energy_regularized(kappa, base).E;
      row.deviation = std::abs(row.E_family - row.E_reference);
      report.max_deviation = std::max(report.max_deviation, row.deviation);
      report.rows.push_back(row);
    }
  }
  return report;
}

LimitReport limit_consistency_eta_to_0(const ModelParams& params, double kappa,
                                       const std::vector<double>& etas) {
  LimitReport report;
  const double linear =
      -params.hbar() * params.hbar() * kappa * kappa / (2.0 * params.mass());
  for (double eta : etas) {
    LimitRow row;
    row.parameter = eta;
    row.E_family = energy_regularized(kappa, params.with_eta(eta)).E;
    row.E_reference = linear;
    row.deviation = std::abs(row.E_family - linear);
    report.max_deviation = std::max(report.max_deviation, row.deviation);
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace nlsnpd
