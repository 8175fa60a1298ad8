#pragma once

// Exact damped-Bloch solutions psi = C exp(-kappa x) alpha(x), with alpha
// periodic in the regularization shift, and the scalar energy relations
// they satisfy.

#include <optional>
#include <variant>
#include <vector>

#include "nlsnpd/core.hpp"

namespace nlsnpd {

/// alpha(x) = a0 + sum_k [ c_k cos(2 pi k x / P) + s_k sin(2 pi k x / P) ].
struct FourierSeries {
  double period = 1.0;
  double a0 = 0.0;
  std::vector<double> cos_coef;  // k = 1, 2, ...
  std::vector<double> sin_coef;  // k = 1, 2, ...

  /// sin(2 pi x / P).
  static FourierSeries sine(double period);

  /// Value at phase u = x/P (only the fractional part matters).
  double at_phase(double u) const;
  double operator()(double x) const { return at_phase(x / period); }

  bool is_single_sine() const;
};

struct Box {
  long periods = 1;  // domain [0, periods * P]
};
struct HalfLineRight {};  // [0, inf), needs kappa > 0
struct HalfLineLeft {};   // (-inf, 0], needs kappa < 0

using AnsatzDomain = std::variant<Box, HalfLineRight, HalfLineLeft>;

struct AnsatzSpec {
  double kappa = 0.0;
  FourierSeries alpha;
  AnsatzDomain domain = Box{};
  double C = 1.0;
  double E = 0.0;
};

/// DomainError when alpha's period differs from eta*L, a half-line decay
/// rate has the wrong sign, or a box has no periods.
void validate_ansatz(const AnsatzSpec& spec, const ModelParams& params);

/// AnalyticProfile evaluating C exp(-kappa x) alpha(x).  alpha is evaluated
/// from the grid index modulo shift_steps, so samples one shift apart see
/// bit-identical alpha values.
std::shared_ptr<const AnalyticProfile> ansatz_profile(const AnsatzSpec& spec);

/// psi_i = C exp(-kappa x_i) alpha(x_i) with AnsatzExtension(spec).
/// DomainError on an incommensurate grid or one outside the spec domain.
WaveField build_ansatz(const AnsatzSpec& spec, const Grid1D& grid);

/// Inverse square of the box normalization for alpha = sin(2 pi x/(eta L)):
/// C^-2 = (1 - gamma^N)/(4 kappa) * 16 pi^2 / ((ln gamma)^2 + 16 pi^2).
double inverse_norm_squared(double kappa, long periods, const ModelParams& params);

/// C for the sine ansatz on Box(N), gamma = exp(-2 kappa eta L).
/// kappa == 0 uses the limit C^-2 = N eta L / 2.  DomainError for N <= 0.
double normalization_constant(double kappa, long periods,
                              const ModelParams& params);

/// Fully populated spec: sine alpha uses the closed-form normalization
/// (box or half-line), other alpha are normalized by quadrature on `grid`.
/// E comes from the regularized relation.
AnsatzSpec make_normalized_ansatz(double kappa, FourierSeries alpha,
                                  AnsatzDomain domain, const ModelParams& params,
                                  const Grid1D& grid);

enum class Family { Regularized, QDeformed };

/// Ties a decay rate to its energy.  gamma/theta are set for the
/// regularized family, lambda for the q-deformed one.
struct SpectrumPoint {
  double kappa = 0.0;
  std::optional<double> gamma;
  std::optional<double> theta;
  std::optional<double> lambda;
  double E = 0.0;
};

/// Infimum of the spectrum.  `bounded == false` means unbounded below.
struct EnergyBound {
  bool bounded = false;
  double value = 0.0;
  /// Leading small-eta behaviour -E/(2 eta^2), reported when eta < 0.05.
  std::optional<double> small_eta_asymptote;
};

/// E = (E_s/eta^4)(1 - ln theta - 1/theta), theta = 1 + eta(gamma - 1),
/// gamma = exp(-2 kappa eta L).
SpectrumPoint energy_regularized(double kappa, const ModelParams& params);

/// Lower bound over kappa > 0: (E_s/eta^4)(1 - ln(1-eta) - 1/(1-eta)).
/// Unbounded at eta = 1.
EnergyBound energy_bound_regularized(const ModelParams& params);

/// E = (E_s/q) [ lambda^(q-1) (q/(q-1) - lambda) - 1/(q-1) ],
/// lambda = exp(2 kappa L).  q == 1 delegates to the regularized relation
/// at eta = 1 (gamma = 1/lambda).
SpectrumPoint energy_qdeformed(double kappa, const ModelParams& params);

/// Same relation evaluated directly at lambda > 0 (kappa = ln(lambda)/2L).
SpectrumPoint energy_qdeformed_at_lambda(double lambda,
                                         const ModelParams& params);

/// Lower bound over kappa < 0 (lambda in [0, 1)): -E_s/(q(q-1)) for q > 1,
/// unbounded otherwise.
EnergyBound energy_bound_qdeformed(const ModelParams& params);

/// Parity-symmetrized regularized energy: mean of the +L and -L branches,
/// the latter mapping gamma to 1/gamma.
double energy_symmetrized(double kappa, const ModelParams& params);

/// Inverts the family's relation on its normalizable branch (kappa >= 0 for
/// Regularized, kappa <= 0 for QDeformed) by bisection.  RangeError when the
/// target lies outside (bound, 0].
double solve_kappa(double E_target, Family family, const ModelParams& params);

struct LimitRow {
  double parameter = 0.0;  // q or eta
  double lambda = 0.0;     // q table only
  double E_family = 0.0;
  double E_reference = 0.0;
  double deviation = 0.0;
};

struct LimitReport {
  std::vector<LimitRow> rows;
  double max_deviation = 0.0;
};

/// |E_q(lambda) - E_reg(gamma = 1/lambda)| at eta = 1 for
/// q in {1 +/- 1e-3, 1 +/- 1e-6, 1} over `lambda_count` points in (0, 1).
LimitReport limit_consistency_q_to_1(const ModelParams& params,
                                     int lambda_count = 19);

/// |E_reg(kappa; eta) + hbar^2 kappa^2 / 2m| for each eta.
LimitReport limit_consistency_eta_to_0(const ModelParams& params, double kappa,
                                       const std::vector<double>& etas);

}  // namespace nlsnpd
