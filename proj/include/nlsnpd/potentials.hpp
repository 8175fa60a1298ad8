#pragma once

// Pointwise nonlinear terms of the information-theoretic Schrodinger
// equation, evaluated on shift-commensurate grids.

#include <functional>
#include <string>
#include <vector>

#include "nlsnpd/core.hpp"

namespace nlsnpd {

/// Which nonlinear term to use.  Symmetrized wraps one of the three
/// difference terms; PerturbativeO1 is the leading small-L expansion and
/// can't be wrapped.
class PotentialKind {
 public:
  enum class Base { Raw, Regularized, QDeformed, PerturbativeO1 };

  static PotentialKind raw() { return PotentialKind(Base::Raw, false); }
  static PotentialKind regularized() {
    return PotentialKind(Base::Regularized, false);
  }
  static PotentialKind qdeformed() {
    return PotentialKind(Base::QDeformed, false);
  }
  static PotentialKind perturbative() {
    return PotentialKind(Base::PerturbativeO1, false);
  }
  /// DomainError if `inner` is already symmetrized or is PerturbativeO1.
  static PotentialKind symmetrized(PotentialKind inner);

  /// Parses "raw", "regularized", "qdeformed", "perturbative" and
  /// "symmetrized-<inner>".
  static PotentialKind parse(const std::string& name);

  Base base() const { return base_; }
  bool is_symmetrized() const { return symmetrized_; }
  bool is_difference_term() const { return base_ != Base::PerturbativeO1; }
  std::string name() const;

  bool operator==(const PotentialKind&) const = default;

 private:
  PotentialKind(Base base, bool symmetrized)
      : base_(base), symmetrized_(symmetrized) {}

  Base base_;
  bool symmetrized_;
};

/// Numerical treatment of density nodes.
struct NodeGuard {
  double floor_rel = 1e-12;
  long exclusion_halfwidth_steps = 3;
};

/// Real-valued output of a pointwise term.  node_flag[i] marks points where
/// the density floor engaged.
struct PotentialField {
  Grid1D grid;
  std::vector<double> values;
  std::vector<char> node_flag;

  bool any_flagged() const;
  std::vector<long> flagged_indices() const;
};

/// A difference term written as scale * kernel(p, p(x+shift), p(x-shift)).
/// Kernels depend on density ratios only.
struct ThreePointKernel {
  long shift_steps = 1;
  double scale = 1.0;
  std::function<double(double p, double p_plus, double p_minus)> kernel;

  double operator()(double p, double p_plus, double p_minus) const {
    return scale * kernel(p, p_plus, p_minus);
  }
};

/// Kernel for a difference kind (raw, regularized, q-deformed, symmetrized)
/// on `grid`.  DomainError for PerturbativeO1 or incommensurate shifts.
ThreePointKernel make_kernel(PotentialKind kind, const ModelParams& params,
                             const Grid1D& grid);

DensityField density(const WaveField& psi);

/// (hbar^2/2m) (sqrt p)'' / sqrt p by second-order central differences.
PotentialField bohm_potential(const DensityField& p, const ModelParams& params,
                              const NodeGuard& guard = {});

/// E [ ln p/p(x+L) + 1 - p(x-L)/p ].
PotentialField info_term_raw(const DensityField& p, const ModelParams& params,
                             const NodeGuard& guard = {});

/// The eta-regularized term with shifts +/- eta*L.  At eta = 1 it equals
/// info_term_raw bit for bit.
PotentialField info_term_regularized(const DensityField& p,
                                     const ModelParams& params,
                                     const NodeGuard& guard = {});

/// (E/q) [ ln_q(p/p+) + (p/p+)^(q-1) - (p-/p)^q ] with shifts +/- L.
/// q == 1 delegates to info_term_raw.
PotentialField info_term_qdeformed(const DensityField& p,
                                   const ModelParams& params,
                                   const NodeGuard& guard = {});

/// Average of the inner term with +L and with -L.  `kind` is the inner kind;
/// passing an already symmetrized kind is also accepted.
PotentialField symmetrize(PotentialKind kind, const DensityField& p,
                          const ModelParams& params,
                          const NodeGuard& guard = {});

/// (hbar^2 L / 4m) [ -(p')^3/(3p^3) + p'p''/(2p^2) ].
PotentialField perturbative_term(const DensityField& p,
                                 const ModelParams& params,
                                 const NodeGuard& guard = {});

/// The difference part of `kind` (no Bohm term).
PotentialField info_term(PotentialKind kind, const DensityField& p,
                         const ModelParams& params, const NodeGuard& guard = {});

/// Full F(p): difference term plus Bohm potential, or the perturbative
/// term alone for PerturbativeO1.
PotentialField total_nonlinear_term(PotentialKind kind, const WaveField& psi,
                                    const ModelParams& params,
                                    const NodeGuard& guard = {});

/// Deformed logarithm (y^(q-1) - 1)/(q-1); ln y at q == 1.
double q_log(double y, double q);

}  // namespace nlsnpd
