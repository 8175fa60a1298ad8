#include "nlsnpd/potentials.hpp"

#include <algorithm>
#include <cmath>

#include "numerics.hpp"

namespace nlsnpd {

namespace {

// Bracket of the regularized term, written in terms of
//   a = eta (p+ - p)/p          (theta+ = 1 + a)
//   b = eta (p/p- - 1)          (last denominator 1 + b)
// so that the O(a^2) value on near-exponential densities is not lost to
// cancellation:  bracket = g(a) + eta (b - a) / ((1+a)(1+b)).
double regularized_bracket(double p, double p_plus, double p_minus, double eta) {
  const double a = eta * ((p_plus - p) / p);
  const double cross = eta * (p / p_minus - p_plus / p);
  return detail::log_excess(a) + eta * cross / ((1.0 + a) * (1.0 + a + cross));
}

double qdeformed_bracket(double p, double p_plus, double p_minus, double q) {
  const double y = p / p_plus;
  const double z = p_minus / p;
  return (q_log(y, q) + std::pow(y, q - 1.0) - std::pow(z, q)) / q;
}

PotentialField make_output(const Grid1D& grid) {
  const auto n = static_cast<std::size_t>(grid.size());
  return PotentialField{grid, std::vector<double>(n, 0.0),
                        std::vector<char>(n, 0)};
}

PotentialField apply_kernel(const ThreePointKernel& k, const DensityField& p,
                            const NodeGuard& guard) {
  PotentialField out = make_output(p.grid());
  const long n = p.size();
  for (long i = 0; i < n; ++i) {
    double c = p.at(i);
    double plus = p.at(i + k.shift_steps);
    double minus = p.at(i - k.shift_steps);
    const double hi = std::max({c, plus, minus});
    const auto idx = static_cast<std::size_t>(i);
    if (!(hi > 0.0)) {
      out.node_flag[idx] = 1;
      continue;
    }
    const double floor = guard.floor_rel * hi;
    if (c <= floor || plus <= floor || minus <= floor) {
      out.node_flag[idx] = 1;
      c = std::max(c, floor);
      plus = std::max(plus, floor);
      minus = std::max(minus, floor);
    }
    out.values[idx] = k(c, plus, minus);
  }
  return out;
}

struct Stencil {
  double second;  // f'' * dx^2
  double first;   // f' * 2 dx
};

// Second-order derivative stencils; one-sided at the edges under EdgeClamp.
template <typename Lookup>
Stencil stencil_at(Lookup&& f, long i, long n, bool one_sided) {
  if (one_sided && i == 0)
    return {2.0 * f(0) - 5.0 * f(1) + 4.0 * f(2) - f(3),
            -3.0 * f(0) + 4.0 * f(1) - f(2)};
  if (one_sided && i == n - 1)
    return {2.0 * f(n - 1) - 5.0 * f(n - 2) + 4.0 * f(n - 3) - f(n - 4),
            3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)};
  return {f(i + 1) - 2.0 * f(i) + f(i - 1), f(i + 1) - f(i - 1)};
}

bool needs_one_sided(const DensityField& p) {
  return std::holds_alternative<EdgeClamp>(p.extension()) && p.size() >= 4;
}

}  // namespace

double q_log(double y, double q) {
  if (q == 1.0) return std::log(y);
  return std::expm1((q - 1.0) * std::log(y)) / (q - 1.0);
}

PotentialKind PotentialKind::symmetrized(PotentialKind inner) {
  if (inner.symmetrized_) throw DomainError("kind is already symmetrized");
  if (inner.base_ == Base::PerturbativeO1)
    throw DomainError("the perturbative term cannot be symmetrized");
  return PotentialKind(inner.base_, true);
}

PotentialKind PotentialKind::parse(const std::string& name) {
  static const std::string prefix = "symmetrized-";
  if (name.rfind(prefix, 0) == 0)
    return symmetrized(parse(name.substr(prefix.size())));
  if (name == "raw") return raw();
  if (name == "regularized") return regularized();
  if (name == "qdeformed") return qdeformed();
  if (name == "perturbative") return perturbative();
  throw DomainError("unknown potential kind '" + name + "'");
}

std::string PotentialKind::name() const {
  std::string base;
  switch (base_) {
    case Base::Raw: base = "raw"; break;
    case Base::Regularized: base = "regularized"; break;
    case Base::QDeformed: base = "qdeformed"; break;
    case Base::PerturbativeO1: base = "perturbative"; break;
  }
  return symmetrized_ ? "symmetrized-" + base : base;
}

bool PotentialField::any_flagged() const {
  return std::any_of(node_flag.begin(), node_flag.end(),
                     [](char f) { return f != 0; });
}

std::vector<long> PotentialField::flagged_indices() const {
  std::vector<long> out;
  for (std::size_t i = 0; i < node_flag.size(); ++i)
    if (node_flag[i]) out.push_back(static_cast<long>(i));
  return out;
}

ThreePointKernel make_kernel(PotentialKind kind, const ModelParams& params,
                             const Grid1D& grid) {
  ThreePointKernel k;
  switch (kind.base()) {
    case PotentialKind::Base::Raw:
      k.shift_steps = grid.steps_for(params.L());
      k.scale = params.energy_scale();
      k.kernel = [](double p, double pp, double pm) {
        return regularized_bracket(p, pp, pm, 1.0);
      };
      break;
    case PotentialKind::Base::Regularized: {
      const double eta = params.eta();
      k.shift_steps = grid.steps_for(params.shift_length());
      k.scale = params.energy_scale() / (eta * eta * eta * eta);
      k.kernel = [eta](double p, double pp, double pm) {
        return regularized_bracket(p, pp, pm, eta);
      };
      break;
    }
    case PotentialKind::Base::QDeformed: {
      const double q = params.q();
      k.shift_steps = grid.steps_for(params.L());
      k.scale = params.energy_scale();
      if (q == 1.0) {
        k.kernel = [](double p, double pp, double pm) {
          return regularized_bracket(p, pp, pm, 1.0);
        };
      } else {
        k.kernel = [q](double p, double pp, double pm) {
          return qdeformed_bracket(p, pp, pm, q);
        };
      }
      break;
    }
    case PotentialKind::Base::PerturbativeO1:
      throw DomainError("the perturbative term is not a difference term");
  }
  if (kind.is_symmetrized()) {
    // -L exchanges the roles of p(x+L) and p(x-L).
    k.kernel = [inner = std::move(k.kernel)](double p, double pp, double pm) {
      return 0.5 * (inner(p, pp, pm) + inner(p, pm, pp));
    };
  }
  return k;
}

DensityField density(const WaveField& psi) {
  std::vector<double> p(psi.values().size());
  std::transform(psi.values().begin(), psi.values().end(), p.begin(),
                 [](Complex v) { return std::norm(v); });
  return DensityField(psi.grid(), std::move(p), psi.extension());
}

PotentialField bohm_potential(const DensityField& p, const ModelParams& params,
                              const NodeGuard& guard) {
  PotentialField out = make_output(p.grid());
  const long n = p.size();
  const double dx = p.grid().dx();
  const double pref = params.hbar() * params.hbar() / (2.0 * params.mass());
  const bool one_sided = needs_one_sided(p);
  auto amp = [&](long j) { return std::sqrt(p.at(j)); };
  for (long i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const double c = p.at(i);
    const double hi = std::max({c, p.at(i - 1), p.at(i + 1)});
    if (!(hi > 0.0)) {
      out.node_flag[idx] = 1;
      continue;
    }
    double s = std::sqrt(c);
    if (c <= guard.floor_rel * hi) {
      out.node_flag[idx] = 1;
      s = std::sqrt(guard.floor_rel * hi);
    }
    const Stencil st = stencil_at(amp, i, n, one_sided);
    out.values[idx] = pref * st.second / (dx * dx) / s;
  }
  return out;
}

PotentialField info_term_raw(const DensityField& p, const ModelParams& params,
                             const NodeGuard& guard) {
  return apply_kernel(make_kernel(PotentialKind::raw(), params, p.grid()), p,
                      guard);
}

PotentialField info_term_regularized(const DensityField& p,
                                     const ModelParams& params,
                                     const NodeGuard& guard) {
  return apply_kernel(
      make_kernel(PotentialKind::regularized(), params, p.grid()), p, guard);
}

PotentialField info_term_qdeformed(const DensityField& p,
                                   const ModelParams& params,
                                   const NodeGuard& guard) {
  if (params.q() == 1.0) return info_term_raw(p, params, guard);
  return apply_kernel(make_kernel(PotentialKind::qdeformed(), params, p.grid()),
                      p, guard);
}

PotentialField symmetrize(PotentialKind kind, const DensityField& p,
                          const ModelParams& params, const NodeGuard& guard) {
  const PotentialKind sym =
      kind.is_symmetrized() ? kind : PotentialKind::symmetrized(kind);
  return apply_kernel(make_kernel(sym, params, p.grid()), p, guard);
}

PotentialField perturbative_term(const DensityField& p,
                                 const ModelParams& params,
                                 const NodeGuard& guard) {
  PotentialField out = make_output(p.grid());
  const long n = p.size();
  const double dx = p.grid().dx();
  const double pref =
      params.hbar() * params.hbar() * params.L() / (4.0 * params.mass());
  const bool one_sided = needs_one_sided(p);
  auto dens = [&](long j) { return p.at(j); };
  for (long i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    double c = p.at(i);
    const double hi = std::max({c, p.at(i - 1), p.at(i + 1)});
    if (!(hi > 0.0)) {
      out.node_flag[idx] = 1;
      continue;
    }
    if (c <= guard.floor_rel * hi) {
      out.node_flag[idx] = 1;
      c = guard.floor_rel * hi;
    }
    const Stencil st = stencil_at(dens, i, n, one_sided);
    const double u = st.first / (2.0 * dx) / c;   // p'/p
    const double w = st.second / (dx * dx) / c;   // p''/p
    out.values[idx] = pref * (-u * u * u / 3.0 + 0.5 * u * w);
  }
  return out;
}

PotentialField info_term(PotentialKind kind, const DensityField& p,
                         const ModelParams& params, const NodeGuard& guard) {
  if (kind.base() == PotentialKind::Base::PerturbativeO1)
    return perturbative_term(p, params, guard);
  return apply_kernel(make_kernel(kind, params, p.grid()), p, guard);
}

PotentialField total_nonlinear_term(PotentialKind kind, const WaveField& psi,
                                    const ModelParams& params,
                                    const NodeGuard& guard) {
  const DensityField p = density(psi);
  if (kind.base() == PotentialKind::Base::PerturbativeO1)
    return perturbative_term(p, params, guard);
  PotentialField out = info_term(kind, p, params, guard);
  const PotentialField bohm = bohm_potential(p, params, guard);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] += bohm.values[i];
    out.node_flag[i] = static_cast<char>(out.node_flag[i] | bohm.node_flag[i]);
  }
  return out;
}

}  // namespace nlsnpd
