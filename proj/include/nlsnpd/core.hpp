#pragma once

// Model parameters, shift-commensurate grids and sampled fields.
//
// Every nonlinear term in this library couples a point x to x +/- eta*L (or
// x +/- L).  Grids are built so that those shifts are whole index offsets,
// and fields carry an extension policy that resolves lookups falling outside
// the stored range.

#include <complex>
#include <functional>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "nlsnpd/errors.hpp"

namespace nlsnpd {

using Complex = std::complex<double>;

/// Physical constants of the model.  The energy scale is always derived
/// from hbar, mass and L so that energy_scale * L^2 == hbar^2 / (4 mass).
class ModelParams {
 public:
  using Potential = std::function<double(double)>;

  double hbar() const { return hbar_; }
  double mass() const { return mass_; }
  double L() const { return length_; }
  double eta() const { return eta_; }
  double q() const { return q_; }
  double energy_scale() const { return energy_scale_; }

  /// Regularization shift eta*L.
  double shift_length() const { return eta_ * length_; }

  /// External potential at x (zero unless one was installed).
  double potential(double x) const { return v_ext_ ? v_ext_(x) : 0.0; }
  bool has_potential() const { return static_cast<bool>(v_ext_); }

  ModelParams with_length(double L) const;
  ModelParams with_eta(double eta) const;
  ModelParams with_q(double q) const;
  ModelParams with_potential(Potential v) const;

  friend ModelParams make_params(double hbar, double mass, double L, double eta,
                                 double q);

 private:
  ModelParams() = default;
  void validate_and_derive();

  double hbar_ = 1.0;
  double mass_ = 1.0;
  double length_ = 1.0;
  double eta_ = 1.0;
  double q_ = 1.0;
  double energy_scale_ = 0.25;
  Potential v_ext_;
};

/// Validates ranges (all positive, eta <= 1) and derives the energy scale.
/// Throws DomainError.
ModelParams make_params(double hbar, double mass, double L, double eta,
                        double q);

/// Unit system hbar = m = 1.
inline ModelParams make_params(double L, double eta, double q) {
  return make_params(1.0, 1.0, L, eta, q);
}

/// Uniform grid whose spacing divides the regularization shift exactly:
/// dx * shift_steps == eta*L, so p(x +/- eta*L) is an index offset.
class Grid1D {
 public:
  /// dx = shift_length / shift_steps.  Requires n_points >= 2*shift_steps+1.
  static Grid1D make(double x0, double shift_length, long shift_steps,
                     long n_points);

  /// Grid for params.shift_length() starting at x0.
  static Grid1D for_params(const ModelParams& params, double x0,
                           long shift_steps, long n_points);

  double x0() const { return x0_; }
  double dx() const { return dx_; }
  long size() const { return n_points_; }
  long shift_steps() const { return shift_steps_; }
  double shift_length() const { return shift_length_; }
  double x(long index) const { return x0_ + static_cast<double>(index) * dx_; }
  double back() const { return x(n_points_ - 1); }

  /// Number of grid steps covering `length`; DomainError unless it is a
  /// whole multiple of dx.
  long steps_for(double length) const;

  /// Index of the grid point at x, if x lies on the grid.
  long index_of(double x) const;

  bool same_as(const Grid1D& other) const;

 private:
  double x0_ = 0.0;
  double dx_ = 1.0;
  double shift_length_ = 1.0;
  long n_points_ = 0;
  long shift_steps_ = 1;
};

/// Closed-form amplitude used to extend a field beyond its stored range.
class AnalyticProfile {
 public:
  virtual ~AnalyticProfile() = default;

  /// Amplitude at grid index `index` (may lie outside [0, grid.size())).
  virtual Complex amplitude(const Grid1D& grid, long index) const = 0;
};

struct Periodic {};
struct EdgeClamp {};
struct AnsatzExtension {
  std::shared_ptr<const AnalyticProfile> profile;
  Grid1D grid;
};

using ExtensionPolicy = std::variant<Periodic, EdgeClamp, AnsatzExtension>;

class WaveField {
 public:
  WaveField(Grid1D grid, std::vector<Complex> values,
            ExtensionPolicy extension = Periodic{});

  const Grid1D& grid() const { return grid_; }
  std::span<const Complex> values() const { return values_; }
  const ExtensionPolicy& extension() const { return extension_; }
  long size() const { return grid_.size(); }

  /// Value at any index; out-of-range indices resolve through the policy.
  Complex at(long index) const;

  double norm_squared() const;

  WaveField with_values(std::vector<Complex> values) const;
  WaveField with_extension(ExtensionPolicy extension) const;
  WaveField scaled(Complex c) const;

 private:
  Grid1D grid_;
  std::vector<Complex> values_;
  ExtensionPolicy extension_;
};

class DensityField {
 public:
  DensityField(Grid1D grid, std::vector<double> values,
               ExtensionPolicy extension = Periodic{});

  const Grid1D& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  const ExtensionPolicy& extension() const { return extension_; }
  long size() const { return grid_.size(); }

  /// Out-of-range indices under AnsatzExtension return |profile|^2.
  double at(long index) const;

 private:
  Grid1D grid_;
  std::vector<double> values_;
  ExtensionPolicy extension_;
};

/// field.at(index + offset_steps).
Complex shifted_lookup(const WaveField& field, long index, long offset_steps);
double shifted_lookup(const DensityField& field, long index, long offset_steps);

}  // namespace nlsnpd
