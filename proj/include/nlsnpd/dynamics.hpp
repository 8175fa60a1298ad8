#pragma once

// Time evolution of i hbar psi_t = -(hbar^2/2m) psi_xx + V psi + F(p) psi by
// Strang splitting.  F is real and depends on p = |psi|^2 only, so each
// potential half-step is an exact pointwise phase rotation.

#include <span>
#include <vector>

#include "nlsnpd/core.hpp"
#include "nlsnpd/potentials.hpp"

namespace nlsnpd {

enum class Boundary { PeriodicRing, BoxWalls };

enum class KineticScheme {
  Auto,           // Spectral on a ring (Strang only), else CrankNicolson
  Spectral,       // exact FFT propagator, ring only
  CrankNicolson,  // Cayley transform of the 3-point Laplacian
};

enum class Integrator {
  /// Exact phase half-steps around a linear kinetic step.
  Strang,
  /// Cayley transform of the full H(p_mid) at the step midpoint, solved by
  /// fixed-point iteration.  Unitary; keeps the Bohm term next to the
  /// kinetic term it cancels, so it holds nodal and nonuniform stationary
  /// states for long times where the splitting drifts off.
  ImplicitMidpoint,
};

struct EvolutionConfig {
  double dt = 1e-3;
  long n_steps = 1;
  PotentialKind kind = PotentialKind::regularized();
  long snapshot_every = 1;
  Boundary boundary = Boundary::PeriodicRing;
  KineticScheme kinetic = KineticScheme::Auto;
  /// W in V -> V - iW.  Nonzero values break norm conservation on purpose
  /// and disable the drift check.
  double absorbing_rate = 0.0;
  NodeGuard guard;
  /// Cumulative relative norm drift that raises StabilityError.
  double norm_tolerance = 1e-6;
  /// Largest dt*hbar/(m dx^2) accepted with a Bohm term.  That term is as
  /// stiff as the kinetic step it nearly cancels, and the split scheme loses
  /// the Nyquist modes (silently: the norm is kept) somewhere above 0.6.
  double max_stiffness = 0.5;
  Integrator integrator = Integrator::Strang;
  /// Implicit midpoint only: fixed-point cap and L2 tolerance.
  int max_iterations = 60;
  double iteration_tol = 1e-13;
};

struct Snapshot {
  long step = 0;
  double t = 0.0;
  WaveField psi;
};

/// dt*hbar/(m dx^2) of a config on a grid.
double stiffness(const EvolutionConfig& cfg, const Grid1D& grid,
                 const ModelParams& params);

struct EvolutionResult {
  std::vector<Snapshot> snapshots;
  double max_step_norm_drift = 0.0;  // max |N_k - N_{k-1}| / N_0
  double final_norm_drift = 0.0;     // |N_end / N_0 - 1|
};

/// Snapshots at step 0, every snapshot_every steps, and the final step.
/// On a ring the field uses Periodic lookups; between walls an
/// AnsatzExtension carried by psi0 is kept, anything else becomes Periodic.
/// Throws StabilityError on norm drift or a step above max_stiffness, and
/// DomainError on bad configs.
EvolutionResult evolve(const WaveField& psi0, const EvolutionConfig& cfg,
                       const ModelParams& params);

/// <a|b> = sum conj(a_i) b_i dx.
Complex overlap(const WaveField& a, const WaveField& b);

struct ContinuityReport {
  std::vector<double> times;       // midpoints between snapshots
  std::vector<double> sup_defect;  // sup_x |p_t + j_x|
  double max_defect = 0.0;
};

/// d = p_t + d/dx [ (hbar/m) Im(conj(psi) psi_x) ], centred at the midpoint
/// of each consecutive snapshot pair.  Needs at least two snapshots.
ContinuityReport continuity_defect(std::span<const Snapshot> snapshots,
                                   const ModelParams& params);

}  // namespace nlsnpd
