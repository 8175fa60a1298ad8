#include "nlsnpd/dynamics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

namespace nlsnpd {

namespace {

// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

class SpectralPropagator {
 public:
  SpectralPropagator(long n, double dx, double dt, const ModelParams& params)
      : n_(n), phase_(static_cast<std::size_t>(n)) {
    buffer_ = fftw_alloc_complex(static_cast<std::size_t>(n));
    {
      std::lock_guard<std::mutex> lock(fftw_planner_mutex());
      forward_ = fftw_plan_dft_1d(static_cast<int>(n), buffer_, buffer_,
                                  FFTW_FORWARD, FFTW_ESTIMATE);
      backward_ = fftw_plan_dft_1d(static_cast<int>(n), buffer_, buffer_,
                                   FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    const double length = dx * static_cast<double>(n);
    const double rate = params.hbar() * dt / (2.0 * params.mass());
    for (long j = 0; j < n; ++j) {
      const long m = j <= n / 2 ? j : j - n;
      const double k = 2.0 * std::numbers::pi * static_cast<double>(m) / length;
      phase_[static_cast<std::size_t>(j)] =
          std::polar(1.0 / static_cast<double>(n), -rate * k * k);
    }
  }

  SpectralPropagator(const SpectralPropagator&) = delete;
  SpectralPropagator& operator=(const SpectralPropagator&) = delete;

  ~SpectralPropagator() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
    fftw_free(buffer_);
  }

  void apply(std::vector<Complex>& psi) {
    auto* data = reinterpret_cast<Complex*>(buffer_);
    std::copy(psi.begin(), psi.end(), data);
    fftw_execute(forward_);
    for (long j = 0; j < n_; ++j) data[j] *= phase_[static_cast<std::size_t>(j)];
    fftw_execute(backward_);
    std::copy(data, data + n_, psi.begin());
  }

 private:
  long n_;
  std::vector<Complex> phase_;
  fftw_complex* buffer_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

// Tridiagonal system with constant off-diagonal `off` and per-row diagonal;
// the ring adds the two corner entries and is solved by Sherman-Morrison.
class Tridiagonal {
 public:
  Tridiagonal(Complex off, std::vector<Complex> diag, bool periodic)
      : off_(off), periodic_(periodic) {
    if (periodic_) {
      gamma_ = -diag.front();
      diag.front() -= gamma_;
      diag.back() -= off_ * off_ / gamma_;
    }
    const std::size_t n = diag.size();
    cprime_.resize(n);
    denom_.resize(n);
    denom_[0] = diag[0];
    cprime_[0] = off_ / denom_[0];
    for (std::size_t i = 1; i < n; ++i) {
      denom_[i] = diag[i] - off_ * cprime_[i - 1];
      cprime_[i] = off_ / denom_[i];
    }
    if (periodic_) {
      std::vector<Complex> u(n, Complex{});
      u.front() = gamma_;
      u.back() = off_;
      z_ = thomas(u);
    }
  }

  std::vector<Complex> solve(const std::vector<Complex>& r) const {
    std::vector<Complex> x = thomas(r);
    if (periodic_) {
      const Complex fact = (x.front() + off_ * x.back() / gamma_) /
                           (1.0 + z_.front() + off_ * z_.back() / gamma_);
      for (std::size_t i = 0; i < x.size(); ++i) x[i] -= fact * z_[i];
    }
    return x;
  }

 private:
  std::vector<Complex> thomas(const std::vector<Complex>& r) const {
    const std::size_t n = r.size();
    std::vector<Complex> y(n);
    y[0] = r[0] / denom_[0];
    for (std::size_t i = 1; i < n; ++i) y[i] = (r[i] - off_ * y[i - 1]) / denom_[i];
    for (std::size_t i = n - 1; i-- > 0;) y[i] -= cprime_[i] * y[i + 1];
    return y;
  }

  Complex off_;
  bool periodic_;
  Complex gamma_;
  std::vector<Complex> cprime_, denom_, z_;
};

// (1 + i tau H) psi' = (1 - i tau H) psi, tau = dt/2hbar, with
// H = -(hbar^2/2m) [1 -2 1]/dx^2 + diag(w).  Walls are zero ghost points.
std::vector<Complex> cayley_step(const std::vector<Complex>& psi,
                                 const std::vector<Complex>& w, double dt,
                                 double dx, bool periodic, const ModelParams& params) {
  const std::size_t n = psi.size();
  const double tau = dt / (2.0 * params.hbar());
  const double kin = params.hbar() * params.hbar() / (2.0 * params.mass() * dx * dx);
  const Complex off(0.0, -tau * kin);
  std::vector<Complex> diag(n);
  std::vector<Complex> rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Complex h = 2.0 * kin + w[i];
    diag[i] = 1.0 + Complex(0.0, tau) * h;
    const Complex left = i > 0 ? psi[i - 1] : periodic ? psi.back() : Complex{};
    const Complex right = i + 1 < n ? psi[i + 1] : periodic ? psi.front() : Complex{};
    rhs[i] = (1.0 - Complex(0.0, tau) * h) * psi[i] - off * (left + right);
  }
  return Tridiagonal(off, std::move(diag), periodic).solve(rhs);
}

class CrankNicolsonPropagator {
 public:
  CrankNicolsonPropagator(long n, double dx, double dt, bool periodic,
                          const ModelParams& params)
      : dx_(dx), dt_(dt), periodic_(periodic), params_(params),
        zero_(static_cast<std::size_t>(n), Complex{}) {}

  void apply(std::vector<Complex>& psi) const {
    psi = cayley_step(psi, zero_, dt_, dx_, periodic_, params_);
  }

 private:
  double dx_, dt_;
  bool periodic_;
  ModelParams params_;
  std::vector<Complex> zero_;
};

}  // namespace

double stiffness(const EvolutionConfig& cfg, const Grid1D& grid,
                 const ModelParams& params) {
  return cfg.dt * params.hbar() / (params.mass() * grid.dx() * grid.dx());
}

EvolutionResult evolve(const WaveField& psi0, const EvolutionConfig& cfg,
                       const ModelParams& params) {
  if (!(cfg.dt > 0.0)) throw DomainError("dt must be positive");
  if (cfg.n_steps < 1) throw DomainError("n_steps must be >= 1");
  if (cfg.snapshot_every < 1 || cfg.snapshot_every > cfg.n_steps)
    throw DomainError("snapshot_every must lie in [1, n_steps]");

  const Grid1D& grid = psi0.grid();
  const long n = grid.size();
  const bool implicit = cfg.integrator == Integrator::ImplicitMidpoint;
  const double sigma = stiffness(cfg, grid, params);
  if (!implicit && cfg.kind.is_difference_term() && sigma > cfg.max_stiffness)
    throw StabilityError("dt*hbar/(m dx^2) = " + std::to_string(sigma) +
                         " exceeds " + std::to_string(cfg.max_stiffness) +
                         "; the Bohm term needs a smaller dt");
  const bool ring = cfg.boundary == Boundary::PeriodicRing;
  KineticScheme scheme = cfg.kinetic;
  if (scheme == KineticScheme::Auto)
    scheme = ring && !implicit ? KineticScheme::Spectral : KineticScheme::CrankNicolson;
  if (scheme == KineticScheme::Spectral && !ring)
    throw DomainError("the spectral propagator needs a periodic ring");
  if (scheme == KineticScheme::Spectral && implicit)
    throw DomainError("the implicit midpoint integrator uses the 3-point Laplacian");

  ExtensionPolicy extension = Periodic{};
  if (!ring && std::holds_alternative<AnsatzExtension>(psi0.extension()))
    extension = psi0.extension();

  std::unique_ptr<SpectralPropagator> spectral;
  std::unique_ptr<CrankNicolsonPropagator> cn;
  if (!implicit) {
    if (scheme == KineticScheme::Spectral)
      spectral = std::make_unique<SpectralPropagator>(n, grid.dx(), cfg.dt, params);
    else
      cn = std::make_unique<CrankNicolsonPropagator>(n, grid.dx(), cfg.dt, ring,
                                                     params);
  }

  std::vector<double> v(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = params.potential(grid.x(i));

  std::vector<Complex> psi(psi0.values().begin(), psi0.values().end());
  auto as_field = [&]() { return WaveField(grid, psi, extension); };
  auto nonlinear_of = [&](const std::vector<Complex>& values) {
    return total_nonlinear_term(cfg.kind, WaveField(grid, values, extension), params,
                                cfg.guard)
        .values;
  };
  const double half = cfg.dt / (2.0 * params.hbar());
  const double damping = std::exp(-cfg.absorbing_rate * half);
  auto phase_step = [&](const std::vector<double>& f) {
    for (std::size_t i = 0; i < psi.size(); ++i)
      psi[i] *= std::polar(damping, -(v[i] + f[i]) * half);
  };
  auto norm_of = [&](const std::vector<Complex>& values) {
    double s = 0.0;
    for (const Complex& z : values) s += std::norm(z);
    return s * grid.dx();
  };

  // Fixed point for psi' = Cayley(H(p_mid)) psi, p_mid = |psi + psi'|^2/4.
  // Each iterate is an exactly unitary map of psi; iteration only makes
  // the midpoint consistent.
  auto midpoint_step = [&]() {
    std::vector<Complex> next = psi;
    std::vector<Complex> mid(psi.size());
    std::vector<Complex> w(psi.size());
    for (int it = 0; it < cfg.max_iterations; ++it) {
      for (std::size_t i = 0; i < psi.size(); ++i) mid[i] = 0.5 * (psi[i] + next[i]);
      const std::vector<double> f = nonlinear_of(mid);
      for (std::size_t i = 0; i < psi.size(); ++i)
        w[i] = Complex(v[i] + f[i], -cfg.absorbing_rate);
      std::vector<Complex> trial = cayley_step(psi, w, cfg.dt, grid.dx(), ring, params);
      double change = 0.0;
      for (std::size_t i = 0; i < psi.size(); ++i) change += std::norm(trial[i] - next[i]);
      next = std::move(trial);
      if (std::sqrt(change * grid.dx()) <= cfg.iteration_tol) {
        psi = std::move(next);
        return;
      }
    }
    throw StabilityError("implicit midpoint iteration did not converge; reduce dt");
  };

  EvolutionResult result;
  result.snapshots.push_back({0, 0.0, as_field()});
  const double n0 = norm_of(psi);
  if (!(n0 > 0.0)) throw DomainError("initial state has zero norm");
  double previous = n0;

  std::vector<double> f;
  if (!implicit) f = nonlinear_of(psi);
  for (long step = 1; step <= cfg.n_steps; ++step) {
    if (implicit) {
      midpoint_step();
    } else {
      phase_step(f);
      if (spectral)
        spectral->apply(psi);
      else
        cn->apply(psi);
      // The following phase rotation leaves p unchanged, so this F also
      // serves the first half of the next step.
      f = nonlinear_of(psi);
      phase_step(f);
    }

    const double current = norm_of(psi);
    result.max_step_norm_drift =
        std::max(result.max_step_norm_drift, std::abs(current - previous) / n0);
    previous = current;
    result.final_norm_drift = std::abs(current / n0 - 1.0);
    if (cfg.absorbing_rate == 0.0 &&
        !(result.final_norm_drift <= cfg.norm_tolerance))
      throw StabilityError("norm drift " + std::to_string(result.final_norm_drift) +
                           " at step " + std::to_string(step));
    if (step % cfg.snapshot_every == 0 || step == cfg.n_steps)
      result.snapshots.push_back(
          {step, static_cast<double>(step) * cfg.dt, as_field()});
  }
  return result;
}

Complex overlap(const WaveField& a, const WaveField& b) {
  if (!a.grid().same_as(b.grid())) throw DomainError("overlap of different grids");
  Complex sum{};
  for (long i = 0; i < a.size(); ++i)
    sum += std::conj(a.values()[static_cast<std::size_t>(i)]) *
           b.values()[static_cast<std::size_t>(i)];
  return sum * a.grid().dx();
}

ContinuityReport continuity_defect(std::span<const Snapshot> snapshots,
                                   const ModelParams& params) {
  if (snapshots.size() < 2) throw DomainError("continuity needs two snapshots");
  const Grid1D& grid = snapshots.front().psi.grid();
  const long n = grid.size();
  const double dx = grid.dx();
  const double pref = params.hbar() / params.mass();

  auto current = [&](const WaveField& psi, long i) {
    const Complex d = (psi.at(i + 1) - psi.at(i - 1)) / (2.0 * dx);
    return pref * (std::conj(psi.at(i)) * d).imag();
  };
  auto divergence = [&](const WaveField& psi, long i) {
    return (current(psi, i + 1) - current(psi, i - 1)) / (2.0 * dx);
  };

  ContinuityReport report;
  for (std::size_t k = 0; k + 1 < snapshots.size(); ++k) {
    const Snapshot& a = snapshots[k];
    const Snapshot& b = snapshots[k + 1];
    if (!a.psi.grid().same_as(grid) || !b.psi.grid().same_as(grid))
      throw DomainError("snapshots on different grids");
    const double dt = b.t - a.t;
    if (!(dt > 0.0)) throw DomainError("snapshots must be time-ordered");
    double sup = 0.0;
    for (long i = 0; i < n; ++i) {
      const double pt = (std::norm(b.psi.at(i)) - std::norm(a.psi.at(i))) / dt;
      const double jx = 0.5 * (divergence(a.psi, i) + divergence(b.psi, i));
      sup = std::max(sup, std::abs(pt + jx));
    }
    report.times.push_back(0.5 * (a.t + b.t));
    report.sup_defect.push_back(sup);
    report.max_defect = std::max(report.max_defect, sup);
  }
  return report;
}

}  // namespace nlsnpd
