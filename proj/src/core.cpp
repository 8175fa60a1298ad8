#include "nlsnpd/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nlsnpd {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

long wrap_index(long index, long n) {
  long r = index % n;
  return r < 0 ? r + n : r;
}

void check_extension_grid(const ExtensionPolicy& extension, const Grid1D& grid) {
  if (const auto* ansatz = std::get_if<AnsatzExtension>(&extension)) {
    if (!ansatz->profile) throw DomainError("AnsatzExtension without a profile");
    if (!ansatz->grid.same_as(grid))
      throw DomainError("AnsatzExtension grid does not match the field grid");
  }
}

}  // namespace

ModelParams make_params(double hbar, double mass, double L, double eta,
                        double q) {
  ModelParams params;
  params.hbar_ = hbar;
  params.mass_ = mass;
  params.length_ = L;
  params.eta_ = eta;
  params.q_ = q;
  params.validate_and_derive();
  return params;
}

void ModelParams::validate_and_derive() {
  if (!positive_finite(hbar_)) throw DomainError("hbar must be positive");
  if (!positive_finite(mass_)) throw DomainError("mass must be positive");
  if (!positive_finite(length_)) throw DomainError("L must be positive");
  if (!positive_finite(eta_) || eta_ > 1.0)
    throw DomainError("eta must lie in (0, 1]");
  if (!positive_finite(q_)) throw DomainError("q must be positive");
  energy_scale_ = hbar_ * hbar_ / (4.0 * mass_ * length_ * length_);
}

ModelParams ModelParams::with_length(double L) const {
  ModelParams out = *this;
  out.length_ = L;
  out.validate_and_derive();
  return out;
}

ModelParams ModelParams::with_eta(double eta) const {
  ModelParams out = *this;
  out.eta_ = eta;
  out.validate_and_derive();
  return out;
}

ModelParams ModelParams::with_q(double q) const {
  ModelParams out = *this;
  out.q_ = q;
  out.validate_and_derive();
  return out;
}

ModelParams ModelParams::with_potential(Potential v) const {
  ModelParams out = *this;
  out.v_ext_ = std::move(v);
  return out;
}

Grid1D Grid1D::make(double x0, double shift_length, long shift_steps,
                    long n_points) {
  if (!std::isfinite(x0)) throw DomainError("grid origin must be finite");
  if (!positive_finite(shift_length))
    throw DomainError("grid shift length must be positive");
  if (shift_steps < 1) throw DomainError("shift_steps must be >= 1");
  if (n_points < 2 * shift_steps + 1)
    throw DomainError("grid needs at least 2*shift_steps+1 points");
  Grid1D grid;
  grid.x0_ = x0;
  grid.shift_length_ = shift_length;
  grid.shift_steps_ = shift_steps;
  grid.dx_ = shift_length / static_cast<double>(shift_steps);
  grid.n_points_ = n_points;
  return grid;
}

Grid1D Grid1D::for_params(const ModelParams& params, double x0,
                          long shift_steps, long n_points) {
  return make(x0, params.shift_length(), shift_steps, n_points);
}

long Grid1D::steps_for(double length) const {
  const double ratio = length / dx_;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
    throw DomainError("length " + std::to_string(length) +
                      " is not a whole number of grid steps");
  return static_cast<long>(rounded);
}

long Grid1D::index_of(double x) const {
  const double ratio = (x - x0_) / dx_;
  const double rounded = std::round(ratio);
  if (rounded < 0.0 || rounded >= static_cast<double>(n_points_) ||
      std::abs(ratio - rounded) > 1e-9)
    throw DomainError("x = " + std::to_string(x) + " is not a grid point");
  return static_cast<long>(rounded);
}

bool Grid1D::same_as(const Grid1D& other) const {
  return n_points_ == other.n_points_ && shift_steps_ == other.shift_steps_ &&
         x0_ == other.x0_ && dx_ == other.dx_;
}

WaveField::WaveField(Grid1D grid, std::vector<Complex> values,
                     ExtensionPolicy extension)
    : grid_(grid), values_(std::move(values)), extension_(std::move(extension)) {
  if (static_cast<long>(values_.size()) != grid_.size())
    throw DomainError("wave field size does not match its grid");
  for (const Complex& v : values_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw DomainError("wave field has non-finite entries");
  check_extension_grid(extension_, grid_);
}

Complex WaveField::at(long index) const {
  const long n = grid_.size();
  if (index >= 0 && index < n) return values_[static_cast<std::size_t>(index)];
  return std::visit(
      [&](const auto& policy) -> Complex {
        using T = std::decay_t<decltype(policy)>;
        if constexpr (std::is_same_v<T, Periodic>) {
          return values_[static_cast<std::size_t>(wrap_index(index, n))];
        } else if constexpr (std::is_same_v<T, EdgeClamp>) {
          return values_[static_cast<std::size_t>(std::clamp(index, 0L, n - 1))];
        } else {
          return policy.profile->amplitude(grid_, index);
        }
      },
      extension_);
}

double WaveField::norm_squared() const {
  double sum = 0.0;
  for (const Complex& v : values_) sum += std::norm(v);
  return sum * grid_.dx();
}

WaveField WaveField::with_values(std::vector<Complex> values) const {
  return WaveField(grid_, std::move(values), extension_);
}

WaveField WaveField::with_extension(ExtensionPolicy extension) const {
  return WaveField(grid_, values_, std::move(extension));
}

namespace {

class ScaledProfile final : public AnalyticProfile {
 public:
  ScaledProfile(std::shared_ptr<const AnalyticProfile> inner, Complex c)
      : inner_(std::move(inner)), c_(c) {}
  Complex amplitude(const Grid1D& grid, long index) const override {
    return c_ * inner_->amplitude(grid, index);
  }

 private:
  std::shared_ptr<const AnalyticProfile> inner_;
  Complex c_;
};

}  // namespace

WaveField WaveField::scaled(Complex c) const {
  std::vector<Complex> out(values_);
  for (Complex& v : out) v *= c;
  ExtensionPolicy ext = extension_;
  if (auto* ansatz = std::get_if<AnsatzExtension>(&ext))
    ansatz->profile = std::make_shared<ScaledProfile>(ansatz->profile, c);
  return WaveField(grid_, std::move(out), std::move(ext));
}

DensityField::DensityField(Grid1D grid, std::vector<double> values,
                           ExtensionPolicy extension)
    : grid_(grid), values_(std::move(values)), extension_(std::move(extension)) {
  if (static_cast<long>(values_.size()) != grid_.size())
    throw DomainError("density field size does not match its grid");
  for (double v : values_)
    if (!std::isfinite(v) || v < 0.0)
      throw DomainError("density must be finite and non-negative");
  check_extension_grid(extension_, grid_);
}

double DensityField::at(long index) const {
  const long n = grid_.size();
  if (index >= 0 && index < n) return values_[static_cast<std::size_t>(index)];
  return std::visit(
      [&](const auto& policy) -> double {
        using T = std::decay_t<decltype(policy)>;
        if constexpr (std::is_same_v<T, Periodic>) {
          return values_[static_cast<std::size_t>(wrap_index(index, n))];
        } else if constexpr (std::is_same_v<T, EdgeClamp>) {
          return values_[static_cast<std::size_t>(std::clamp(index, 0L, n - 1))];
        } else {
          return std::norm(policy.profile->amplitude(grid_, index));
        }
      },
      extension_);
}

Complex shifted_lookup(const WaveField& field, long index, long offset_steps) {
  return field.at(index + offset_steps);
}

double shifted_lookup(const DensityField& field, long index, long offset_steps) {
  return field.at(index + offset_steps);
}

}  // namespace nlsnpd
