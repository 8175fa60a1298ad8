#include "nlsnpd/stationary.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "nlsnpd/exact_solutions.hpp"

namespace nlsnpd {

namespace {

const double kLogMax = std::log(1e300);
const double kLogMin = std::log(1e-300);

std::vector<IndexRange> windows_around(const std::vector<char>& node, long halfwidth) {
  std::vector<IndexRange> out;
  const long n = static_cast<long>(node.size());
  for (long i = 0; i < n; ++i) {
    if (!node[static_cast<std::size_t>(i)]) continue;
    const IndexRange w{std::max(0L, i - halfwidth), std::min(n - 1, i + halfwidth)};
    if (!out.empty() && w.first <= out.back().last + 1)
      out.back().last = std::max(out.back().last, w.last);
    else
      out.push_back(w);
  }
  return out;
}

// psi'' * dx^2 at i; one-sided at the edges under EdgeClamp.
Complex second_difference(const WaveField& psi, long i) {
  const long n = psi.size();
  if (std::holds_alternative<EdgeClamp>(psi.extension()) && n >= 4) {
    if (i == 0)
      return 2.0 * psi.at(0) - 5.0 * psi.at(1) + 4.0 * psi.at(2) - psi.at(3);
    if (i == n - 1)
      return 2.0 * psi.at(n - 1) - 5.0 * psi.at(n - 2) + 4.0 * psi.at(n - 3) -
             psi.at(n - 4);
  }
  return psi.at(i + 1) - 2.0 * psi.at(i) + psi.at(i - 1);
}

// Smallest s >= 0 with f(s) < target for f decreasing from f(0) >= target,
// refined by bisection.  Non-finite values count as "below".
template <typename F>
double bisect_decreasing(F&& f, double target, double initial_hi) {
  auto below = [&](double s) {
    const double v = f(s);
    return !std::isfinite(v) || v < target;
  };
  double lo = 0.0;
  double hi = initial_hi;
  int doublings = 0;
  while (!below(hi)) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 1100) throw RangeError("target not reachable");
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (below(mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

class PatchedProfile final : public AnalyticProfile {
 public:
  PatchedProfile(PatchedSpec spec, long origin_index)
      : spec_(spec), origin_(origin_index) {}

  Complex amplitude(const Grid1D& grid, long index) const override {
    const long m = grid.shift_steps();
    long r = (index - origin_) % m;
    if (r < 0) r += m;
    const double s = std::sin(2.0 * std::numbers::pi * static_cast<double>(r) /
                              static_cast<double>(m));
    const double x = grid.x(index);
    const double env = index >= origin_ ? std::exp(-spec_.kappa_plus * x)
                                        : std::exp(spec_.kappa_minus * x);
    return spec_.C_prime * s * env;
  }

 private:
  PatchedSpec spec_;
  long origin_;
};

}  // namespace

ResidualReport stationary_residual(const WaveField& psi, double E,
                                   PotentialKind kind, const ModelParams& params,
                                   const NodeGuard& guard) {
  const Grid1D& grid = psi.grid();
  const long n = grid.size();
  const auto un = static_cast<std::size_t>(n);

  double amax = 0.0;
  Complex ref{1.0, 0.0};
  for (const Complex& v : psi.values())
    if (std::abs(v) > amax) {
      amax = std::abs(v);
      ref = v;
    }
  if (!(amax > 0.0)) throw DomainError("residual of an identically zero field");
  const Complex rotation = std::conj(ref) / amax;
  bool real = true;
  for (const Complex& v : psi.values())
    if (std::abs((v * rotation).imag()) > 1e-13 * amax) {
      real = false;
      break;
    }

  ResidualReport report;
  report.grid = grid;
  report.residual.assign(un, 0.0);
  report.residual_imag.assign(un, 0.0);
  report.E_used = E;
  report.real_profile = real;

  const DensityField p = density(psi);
  const double kin_pref = -params.hbar() * params.hbar() / (2.0 * params.mass());
  const double dx2 = grid.dx() * grid.dx();

  std::vector<char> node(un, 0);
  for (long i = 0; i < n; ++i) {
    const double hi = std::max({p.at(i - 1), p.at(i), p.at(i + 1)});
    if (!(hi > 0.0) || p.at(i) <= guard.floor_rel * hi)
      node[static_cast<std::size_t>(i)] = 1;
  }

  PotentialField term;
  if (real && kind.is_difference_term())
    term = info_term(kind, p, params, guard);
  else if (real)
    term = perturbative_term(p, params, guard);
  else
    term = total_nonlinear_term(kind, psi, params, guard);

  for (long i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    node[idx] = static_cast<char>(node[idx] | term.node_flag[idx]);
    Complex r = term.values[idx] + params.potential(grid.x(i)) - E;
    const bool needs_kinetic = !(real && kind.is_difference_term());
    if (needs_kinetic && !node[idx]) {
      const Complex ratio = second_difference(psi, i) / psi.at(i);
      // A real profile has a real ratio; drop the rounding residue.
      r += kin_pref * (real ? Complex(ratio.real(), 0.0) : ratio) / dx2;
    }
    report.residual[idx] = r.real();
    report.residual_imag[idx] = r.imag();
  }

  report.excluded_windows = windows_around(node, guard.exclusion_halfwidth_steps);
  report.excluded.assign(un, 0);
  for (const IndexRange& w : report.excluded_windows)
    for (long i = w.first; i <= w.last; ++i)
      report.excluded[static_cast<std::size_t>(i)] = 1;
  report.max_abs_outside_guards = report.max_abs_where([](double) { return true; });
  return report;
}

RecursionStep recursion_step(double p_prev, double p_curr, double E,
                             const ModelParams& params) {
  if (!(p_prev > 0.0) || !(p_curr > 0.0))
    throw DomainError("recursion needs positive densities");
  const double exponent = 1.0 - p_prev / p_curr - E / params.energy_scale();
  const double log_next = std::log(p_curr) + exponent;
  if (!(log_next <= kLogMax))
    return {std::numeric_limits<double>::infinity(), StepStatus::Blowup};
  if (log_next < kLogMin) return {0.0, StepStatus::Collapse};
  return {p_curr * std::exp(exponent), StepStatus::Ok};
}

std::string to_string(OrbitClass c) {
  switch (c) {
    case OrbitClass::Bounded: return "bounded";
    case OrbitClass::Decaying: return "decaying";
    case OrbitClass::Blowup: return "blowup";
    case OrbitClass::Collapse: return "collapse";
  }
  return "unknown";
}

RecursionOrbit recursion_orbit(double p0, double p1, double E, long n_max,
                               const ModelParams& params) {
  if (!(p0 > 0.0) || !(p1 > 0.0))
    throw DomainError("recursion needs positive seeds");
  if (n_max < 2) throw DomainError("recursion needs n_max >= 2");
  RecursionOrbit orbit;
  orbit.E = E;
  orbit.p_seq = {p0, p1};
  StepStatus stop = StepStatus::Ok;
  for (long k = 2; k <= n_max; ++k) {
    const std::size_t m = orbit.p_seq.size();
    const RecursionStep step =
        recursion_step(orbit.p_seq[m - 2], orbit.p_seq[m - 1], E, params);
    if (step.status != StepStatus::Ok) {
      stop = step.status;
      break;
    }
    orbit.p_seq.push_back(step.p_next);
  }

  const auto& p = orbit.p_seq;
  const std::size_t m = p.size();
  orbit.tail_ratio = p[m - 1] / p[m - 2];
  bool settled = false;
  if (m >= 11) {
    settled = true;
    for (std::size_t k = m - 10; k < m; ++k) {
      const double r = p[k] / p[k - 1];
      if (std::abs(r / orbit.tail_ratio - 1.0) > 1e-8) settled = false;
    }
  }
  const double r = orbit.tail_ratio;
  if (stop == StepStatus::Blowup)
    orbit.classification = OrbitClass::Blowup;
  else if (stop == StepStatus::Collapse)
    orbit.classification =
        settled && r < 1.0 ? OrbitClass::Decaying : OrbitClass::Collapse;
  else if (settled && r < 1.0 - 1e-12)
    orbit.classification = OrbitClass::Decaying;
  else if (settled && r > 1.0 + 1e-12)
    orbit.classification = OrbitClass::Blowup;
  else
    orbit.classification = OrbitClass::Bounded;
  return orbit;
}

PatchedSpec patch_relation(double kappa_plus, const ModelParams& params) {
  if (!(kappa_plus > 0.0)) throw DomainError("kappa_plus must be positive");
  PatchedSpec spec;
  spec.kappa_plus = kappa_plus;
  spec.E = energy_regularized(kappa_plus, params).E;
  // The left patch grows towards the origin; its relation is E_reg(-kappa).
  spec.kappa_minus = bisect_decreasing(
      [&](double s) {
        try {
          return energy_regularized(-s, params).E;
        } catch (const DomainError&) {
          return -std::numeric_limits<double>::infinity();
        }
      },
      spec.E, 1.0 / params.shift_length());
  return spec;
}

WaveField build_patched(const PatchedSpec& spec, const Grid1D& grid,
                        const ModelParams& params) {
  if (!(spec.kappa_plus > 0.0) || !(spec.kappa_minus > 0.0))
    throw DomainError("patched decay rates must be positive");
  if (std::abs(grid.shift_length() - params.shift_length()) >
      1e-12 * params.shift_length())
    throw DomainError("grid is not commensurate with eta*L");
  const long origin = grid.index_of(0.0);

  PatchedSpec unit = spec;
  unit.C_prime = 1.0;
  PatchedProfile raw(unit, origin);
  double norm = 0.0;
  for (long i = 0; i < grid.size(); ++i) norm += std::norm(raw.amplitude(grid, i));
  norm *= grid.dx();
  if (!(norm > 0.0)) throw DomainError("patched state has zero norm");

  PatchedSpec normalized = spec;
  normalized.C_prime = 1.0 / std::sqrt(norm);
  auto profile = std::make_shared<PatchedProfile>(normalized, origin);
  std::vector<Complex> values(static_cast<std::size_t>(grid.size()));
  for (long i = 0; i < grid.size(); ++i)
    values[static_cast<std::size_t>(i)] = profile->amplitude(grid, i);
  return WaveField(grid, std::move(values), AnsatzExtension{profile, grid});
}

SearchResult search_localized(const PatchedSpec& seed, const Grid1D& grid,
                              PotentialKind kind, const ModelParams& params,
                              const SearchOptions& opts) {
  if (!kind.is_difference_term())
    throw DomainError("search supports difference kinds only");
  const WaveField start = build_patched(seed, grid, params);
  const ThreePointKernel k = make_kernel(kind, params, grid);
  const long n = grid.size();
  const long s = k.shift_steps;
  const long origin = grid.index_of(0.0);
  const long half = std::lround(opts.window_halfwidth_shifts *
                                static_cast<double>(grid.shift_steps()));
  if (origin - half - s < 0 || origin + half + s >= n)
    throw DomainError("grid too short for the search window");

  ResidualReport seed_report =
      stationary_residual(start, seed.E, kind, params, opts.guard);

  SearchResult result{start, seed_report, seed.E, 0, false, {}, {origin - half, origin + half}};

  const DensityField p0 = density(start);
  std::vector<double> p(p0.values().begin(), p0.values().end());
  std::vector<long> dofs;
  std::vector<long> dof_of(static_cast<std::size_t>(n), -1);
  for (long i = origin - half; i <= origin + half; ++i)
    if (p[static_cast<std::size_t>(i)] > 0.0) {
      dof_of[static_cast<std::size_t>(i)] = static_cast<long>(dofs.size());
      dofs.push_back(i);
    }
  std::vector<double> u(dofs.size());
  for (std::size_t d = 0; d < dofs.size(); ++d)
    u[d] = std::log(p[static_cast<std::size_t>(dofs[d])]);

  std::vector<double> v(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = params.potential(grid.x(i));
  const std::vector<char>& excluded = seed_report.excluded;
  const double dx = grid.dx();

  auto dens = [&](const std::vector<double>& pv, long j) {
    return (j >= 0 && j < n) ? pv[static_cast<std::size_t>(j)] : p0.at(j);
  };
  auto residual_at = [&](const std::vector<double>& pv, long i, double E) {
    return k(dens(pv, i), dens(pv, i + s), dens(pv, i - s)) +
           v[static_cast<std::size_t>(i)] - E;
  };
  auto apply = [&](const std::vector<double>& uu) {
    std::vector<double> pv = p;
    for (std::size_t d = 0; d < dofs.size(); ++d)
      pv[static_cast<std::size_t>(dofs[d])] = std::exp(uu[d]);
    return pv;
  };
  auto objective = [&](const std::vector<double>& pv, double E) {
    double sum = 0.0;
    for (long i = 0; i < n; ++i) {
      if (excluded[static_cast<std::size_t>(i)]) continue;
      const double r = residual_at(pv, i, E);
      sum += r * r;
    }
    return 0.5 * sum * dx;
  };

  double E = seed.E;
  std::vector<double> pv = apply(u);
  double J = objective(pv, E);
  result.objective_history.push_back(J);
  double step = opts.initial_step;
  bool moved = false;
  constexpr double h = 1e-5;

  for (int it = 0; it < opts.max_iters; ++it) {
    std::vector<double> grad(dofs.size(), 0.0);
    double grad_E = 0.0;
    for (long i = 0; i < n; ++i) {
      if (excluded[static_cast<std::size_t>(i)]) continue;
      const double r = residual_at(pv, i, E);
      grad_E -= r * dx;
      for (long j : {i, i + s, i - s}) {
        if (j < 0 || j >= n) continue;
        const long d = dof_of[static_cast<std::size_t>(j)];
        if (d < 0) continue;
        const double pj = pv[static_cast<std::size_t>(j)];
        pv[static_cast<std::size_t>(j)] = pj * std::exp(h);
        const double up = residual_at(pv, i, E);
        pv[static_cast<std::size_t>(j)] = pj * std::exp(-h);
        const double down = residual_at(pv, i, E);
        pv[static_cast<std::size_t>(j)] = pj;
        grad[static_cast<std::size_t>(d)] += r * (up - down) / (2.0 * h) * dx;
      }
    }
    if (!opts.optimize_energy) grad_E = 0.0;
    double g2 = grad_E * grad_E;
    for (double g : grad) g2 += g * g;
    result.iterations = it + 1;
    if (g2 <= opts.gradient_tol * opts.gradient_tol || J == 0.0) {
      result.converged = true;
      break;
    }

    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      std::vector<double> trial_u(u);
      for (std::size_t d = 0; d < u.size(); ++d) trial_u[d] -= step * grad[d];
      const double trial_E = E - step * grad_E;
      std::vector<double> trial_p = apply(trial_u);
      const double trial_J = objective(trial_p, trial_E);
      if (std::isfinite(trial_J) && trial_J <= J - 1e-4 * step * g2) {
        u = std::move(trial_u);
        pv = std::move(trial_p);
        E = trial_E;
        J = trial_J;
        accepted = true;
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    moved = true;
    result.objective_history.push_back(J);
  }

  if (moved) {
    std::vector<Complex> values(start.values().begin(), start.values().end());
    for (std::size_t d = 0; d < dofs.size(); ++d) {
      const auto idx = static_cast<std::size_t>(dofs[d]);
      const double sign = values[idx].real() < 0.0 ? -1.0 : 1.0;
      values[idx] = sign * std::sqrt(pv[idx]);
    }
    result.field = start.with_values(std::move(values));
    result.report = stationary_residual(result.field, E, kind, params, opts.guard);
  }
  result.E = E;
  return result;
}

}  // namespace nlsnpd
