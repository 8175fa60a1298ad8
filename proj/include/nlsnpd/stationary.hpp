#pragma once

// Stationary-state checks: pointwise residual maps, the lattice recursion
// obtained by setting the shift to one lattice step, and a residual-descent
// search seeded by a patched two-sided ansatz.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "nlsnpd/core.hpp"
#include "nlsnpd/potentials.hpp"

namespace nlsnpd {

struct IndexRange {
  long first = 0;
  long last = 0;  // inclusive
};

struct ResidualReport {
  Grid1D grid;
  std::vector<double> residual;       // real part, energy units
  std::vector<double> residual_imag;  // zero for real profiles
  std::vector<IndexRange> excluded_windows;
  std::vector<char> excluded;         // per point, 1 inside a window
  double max_abs_outside_guards = 0.0;
  double E_used = 0.0;
  bool real_profile = false;

  /// max |residual| over non-excluded points satisfying pred(x).
  template <typename Pred>
  double max_abs_where(Pred&& pred) const {
    double m = 0.0;
    for (std::size_t i = 0; i < residual.size(); ++i) {
      if (excluded[i] || !pred(grid.x(static_cast<long>(i)))) continue;
      m = std::max(m, std::hypot(residual[i], residual_imag[i]));
    }
    return m;
  }
};

/// Pointwise violation of H psi = E psi divided by psi.
///
/// Profiles that are real up to a global phase use the cancelled form
/// (difference term + V - E): the kinetic and Bohm terms cancel exactly for
/// real amplitudes.  PerturbativeO1 has no Bohm term, so its kinetic term is
/// kept.  Complex profiles use the full form with a finite-difference
/// kinetic term.  Node windows are recorded, never fatal.
ResidualReport stationary_residual(const WaveField& psi, double E,
                                   PotentialKind kind, const ModelParams& params,
                                   const NodeGuard& guard = {});

enum class StepStatus { Ok, Collapse, Blowup };

struct RecursionStep {
  double p_next = 0.0;
  StepStatus status = StepStatus::Ok;
};

/// p_{n+1} = p_n exp(1 - p_{n-1}/p_n - E/E_s).  DomainError unless both
/// inputs are positive.
RecursionStep recursion_step(double p_prev, double p_curr, double E,
                             const ModelParams& params);

enum class OrbitClass { Bounded, Decaying, Blowup, Collapse };

std::string to_string(OrbitClass c);

struct RecursionOrbit {
  std::vector<double> p_seq;
  double E = 0.0;
  OrbitClass classification = OrbitClass::Bounded;
  double tail_ratio = 1.0;  // last p_n / p_{n-1}
};

/// Iterates up to p_{n_max}.  Stops early on overflow (Blowup) or underflow
/// (Collapse, or Decaying if the ratio had settled below one).  A settled
/// ratio means ten consecutive ratios agreeing to 1e-8.
RecursionOrbit recursion_orbit(double p0, double p1, double E, long n_max,
                               const ModelParams& params);

/// Two half-line solutions glued at the origin:
/// psi = C' sin(2 pi x / eta L) [exp(-k+ x) for x >= 0, exp(k- x) for x < 0].
struct PatchedSpec {
  double kappa_plus = 1.0;
  double kappa_minus = 1.0;
  double C_prime = 1.0;
  double E = 0.0;
};

/// Spec whose two sides carry the same regularized energy:
/// E_reg(kappa_plus) == E_reg(-kappa_minus) == E.
PatchedSpec patch_relation(double kappa_plus, const ModelParams& params);

/// Builds the patched state normalized by grid quadrature (spec.C_prime is
/// replaced).  DomainError if the origin is not a grid point or a decay
/// rate is not positive.
WaveField build_patched(const PatchedSpec& spec, const Grid1D& grid,
                        const ModelParams& params);

struct SearchOptions {
  int max_iters = 200;
  bool optimize_energy = true;
  double initial_step = 1.0;
  double gradient_tol = 1e-14;
  /// Half-width of the optimized window, in units of eta*L.
  double window_halfwidth_shifts = 2.0;
  NodeGuard guard;
};

struct SearchResult {
  WaveField field;
  ResidualReport report;
  double E = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_history;  // accepted iterates, starting point first
  IndexRange window;
};

/// Minimizes 1/2 sum r_i^2 dx over log-density values inside the window
/// (and optionally E) by steepest descent with Armijo backtracking.
/// Convergence is not guaranteed; `converged` reports it.  Only difference
/// kinds are supported.
SearchResult search_localized(const PatchedSpec& seed, const Grid1D& grid,
                              PotentialKind kind, const ModelParams& params,
                              const SearchOptions& opts = {});

}  // namespace nlsnpd
