#include "doctest.h"

#include <cmath>
#include <random>

#include "nlsnpd/core.hpp"
#include "nlsnpd/exact_solutions.hpp"
#include "nlsnpd/potentials.hpp"

using namespace nlsnpd;

TEST_CASE("energy scale is derived from hbar, mass and L") {
  CHECK(make_params(1, 1, 1, 1, 1).energy_scale() == 0.25);
  CHECK(make_params(1, 1, 0.5, 1, 1).energy_scale() == 1.0);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int i = 0; i < 200; ++i) {
    const double h = u(rng), m = u(rng), L = u(rng);
    const ModelParams p = make_params(h, m, L, 0.5, 1.0);
    CHECK(p.energy_scale() * L * L == doctest::Approx(h * h / (4 * m)).epsilon(1e-15));
    // updates keep the identity
    const ModelParams p2 = p.with_length(2 * L);
    CHECK(p2.energy_scale() * 4 * L * L == doctest::Approx(h * h / (4 * m)).epsilon(1e-15));
  }
}

TEST_CASE("parameter ranges are enforced") {
  CHECK_THROWS_AS(make_params(1, 1, 1, 0, 1), DomainError);
  CHECK_THROWS_AS(make_params(1, 1, 1, 1.5, 1), DomainError);
  CHECK_THROWS_AS(make_params(1, 1, 0, 1, 1), DomainError);
  CHECK_THROWS_AS(make_params(1, 1, 1, 1, 0), DomainError);
  CHECK_THROWS_AS(make_params(0, 1, 1, 1, 1), DomainError);
  CHECK_THROWS_AS(make_params(1, -1, 1, 1, 1), DomainError);
  CHECK_THROWS_AS(make_params(1, 1, 1, 1, std::nan("")), DomainError);
  CHECK_NOTHROW(make_params(1, 1, 1, 1, 1));
  CHECK_THROWS_AS(make_params(1, 1, 1, 1, 1).with_eta(0), DomainError);
  CHECK_THROWS_AS(make_params(1, 1, 1, 1, 1).with_q(-2), DomainError);
}

TEST_CASE("external potential defaults to zero") {
  const ModelParams p = make_params(1, 1, 1);
  CHECK_FALSE(p.has_potential());
  CHECK(p.potential(3.0) == 0.0);
  const ModelParams v = p.with_potential([](double x) { return x * x; });
  CHECK(v.has_potential());
  CHECK(v.potential(3.0) == 9.0);
}

TEST_CASE("grid shift is a whole number of steps") {
  const ModelParams p = make_params(1.0, 0.5, 1.0);
  const Grid1D g = Grid1D::for_params(p, -1.0, 16, 65);
  CHECK(g.dx() * 16 == p.shift_length());
  CHECK(g.shift_steps() == 16);
  CHECK(g.steps_for(0.5) == 16);
  CHECK(g.steps_for(1.0) == 32);
  CHECK_THROWS_AS(g.steps_for(0.3), DomainError);
  CHECK(g.index_of(0.0) == 32);
  CHECK(g.x(32) == 0.0);
  CHECK_THROWS_AS(Grid1D::for_params(p, 0.0, 16, 32), DomainError);
  CHECK_NOTHROW(Grid1D::for_params(p, 0.0, 16, 33));
}

TEST_CASE("periodic lookup wraps") {
  const Grid1D g = Grid1D::make(0.0, 0.25, 2, 8);
  std::vector<double> v(8);
  for (int i = 0; i < 8; ++i) v[i] = i + 1.0;
  const DensityField p(g, v, Periodic{});
  CHECK(shifted_lookup(p, 7, 2) == v[1]);
  CHECK(shifted_lookup(p, 0, -1) == v[7]);
  // +M then -M is the identity
  for (long i = 0; i < 8; ++i) {
    const long j = ((i + 2) % 8 + 8) % 8;
    CHECK(shifted_lookup(p, j, -2) == v[i]);
  }
}

TEST_CASE("edge clamp lookup") {
  const Grid1D g = Grid1D::make(0.0, 0.25, 2, 8);
  std::vector<double> v = {5, 1, 1, 1, 1, 1, 1, 9};
  const DensityField p(g, v, EdgeClamp{});
  CHECK(shifted_lookup(p, 0, -3) == 5.0);
  CHECK(shifted_lookup(p, 7, 2) == 9.0);
  CHECK(shifted_lookup(p, 3, 1) == 1.0);
}

TEST_CASE("ansatz extension evaluates the formula beyond the edges") {
  const ModelParams p = make_params(1.0, 1.0, 1.0);
  const long m = 16;
  const Grid1D g = Grid1D::for_params(p, 0.0, m, 2 * m + 1);
  AnsatzSpec spec;
  spec.kappa = 0.3;
  spec.alpha = FourierSeries::sine(1.0);
  spec.domain = Box{2};
  spec.C = 1.7;
  const WaveField psi = build_ansatz(spec, g);
  const DensityField rho = density(psi);
  const double kTwoPi = 2 * std::acos(-1.0);
  for (long i = 0; i < g.size(); ++i) {
    for (long off : {-m, m}) {
      const double x = g.x(i) + off * g.dx();
      const double a = 1.7 * std::exp(-0.3 * x) * std::sin(kTwoPi * x);
      CHECK(shifted_lookup(psi, i, off).real() == doctest::Approx(a).epsilon(1e-12).scale(1.0));
      CHECK(shifted_lookup(rho, i, off) == doctest::Approx(a * a).epsilon(1e-12).scale(1.0));
    }
  }
  // just past the right edge
  const double xr = g.back() + g.dx() / 1.0 * 3;
  const double ar = 1.7 * std::exp(-0.3 * xr) * std::sin(kTwoPi * xr);
  CHECK(psi.at(g.size() + 2).real() == doctest::Approx(ar).epsilon(1e-12).scale(1.0));
}

TEST_CASE("density is the squared modulus") {
  const Grid1D g = Grid1D::make(0.0, 1.0, 8, 64);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  std::vector<Complex> v(64);
  for (auto& z : v) z = {n(rng), n(rng)};
  const WaveField psi(g, v);
  const DensityField p = density(psi);
  for (long i = 0; i < 64; ++i) {
    CHECK(p.values()[i] >= 0.0);
    CHECK(p.values()[i] == std::norm(v[i]));
  }
  std::vector<Complex> c(64, Complex(1, 1) / std::sqrt(2.0));
  const DensityField pc = density(WaveField(g, c));
  for (double x : pc.values()) CHECK(x == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("fields reject non-finite values and mismatched sizes") {
  const Grid1D g = Grid1D::make(0.0, 1.0, 2, 8);
  std::vector<Complex> v(8, 1.0);
  v[3] = {std::nan(""), 0};
  CHECK_THROWS_AS(WaveField(g, v), DomainError);
  CHECK_THROWS_AS(WaveField(g, std::vector<Complex>(7, 1.0)), DomainError);
  CHECK_THROWS_AS(DensityField(g, std::vector<double>(8, -1.0)), DomainError);
}

TEST_CASE("norm and scaling") {
  const Grid1D g = Grid1D::make(0.0, 1.0, 4, 40);
  const WaveField psi(g, std::vector<Complex>(40, Complex(0, 2)));
  CHECK(psi.norm_squared() == doctest::Approx(4.0 * 40 * 0.25));
  CHECK(psi.scaled(0.5).norm_squared() == doctest::Approx(40 * 0.25));
}
