#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "breatherlab/field.hpp"
#include "breatherlab/grid.hpp"
#include "breatherlab/propagator.hpp"
#include "support/oracles.hpp"

using namespace breatherlab;

namespace {

SpectralPair random_pair(const Grid& g, std::uint64_t seed, long band_limit) {
  std::mt19937_64 rng(seed);
  SpectralPair p;
  p.re_hat = random_hermitian_spectrum(g, band_limit, rng);
  p.im_hat = random_hermitian_spectrum(g, band_limit, rng);
  return p;
}

Real pair_max_dev(const SpectralPair& a, const SpectralPair& b) {
  Real dev = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dev = std::max(dev, std::abs(a.re_hat[k] - b.re_hat[k]));
    dev = std::max(dev, std::abs(a.im_hat[k] - b.im_hat[k]));
  }
  return dev;
}

}  // namespace

TEST_CASE("per-frequency matrix is unimodular", "[propagator]") {
  const Grid g(40.0, 256);
  const Propagator prop(g);
  for (const Real tau : {-1.3, 0.02, 0.7, 2.0}) {
    const auto r = prop.rows(tau);
    Real worst = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
      worst = std::max(worst, std::abs(r->c[k] * r->c[k] - r->a[k] * r->b[k] - 1.0));
    CHECK(worst < 1e-11);
  }
}

TEST_CASE("group law and inverse", "[propagator]") {
  const Grid g(50.0, 256);
  const Propagator prop(g);
  const SpectralPair p = random_pair(g, 31, 40);

  const SpectralPair two_steps = prop.homogeneous_step(prop.homogeneous_step(p, 0.3), 0.45);
  const SpectralPair one_step = prop.homogeneous_step(p, 0.75);
  // Growing kernels: compare relative to the output scale.
  const Real scale = std::max(1.0, pair_hs_norm(g, one_step, 0.0));
  CHECK(pair_max_dev(two_steps, one_step) < 1e-10 * scale);

  const SpectralPair back = prop.homogeneous_step(prop.homogeneous_step(p, 1.1), -1.1);
  CHECK(pair_max_dev(back, p) < 1e-10);

  // tau = 0 is the identity.
  CHECK(pair_max_dev(prop.homogeneous_step(p, 0.0), p) == 0.0);
}

TEST_CASE("propagation preserves realness of the underlying fields", "[propagator]") {
  // Real phi/psi fields have Hermitian spectra; the real matrix rows keep it.
  const Grid g(40.0, 128);
  const Propagator prop(g);
  const SpectralPair p = random_pair(g, 77, 30);
  const SpectralPair out = prop.homogeneous_step(p, 0.6);
  const std::size_t n = g.size();
  Real dev = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    dev = std::max(dev, std::abs(out.re_hat[k] - std::conj(out.re_hat[n - k])));
    dev = std::max(dev, std::abs(out.im_hat[k] - std::conj(out.im_hat[n - k])));
  }
  CHECK(dev < 1e-10);
  CHECK(std::abs(out.re_hat[0].imag()) < 1e-12);
  CHECK(std::abs(out.im_hat[0].imag()) < 1e-12);
}

TEST_CASE("single-mode closed forms across the bands", "[propagator]") {
  const Grid g(2.0 * kPi, 16);  // integer frequencies
  const Propagator prop(g);
  const Real tau = 0.8;

  SECTION("zero frequency: phi constant, psi grows linearly") {
    SpectralPair p = SpectralPair::zero(g.size());
    p.re_hat[0] = Complex{3.0, 0.0};
    const SpectralPair out = prop.homogeneous_step(p, tau);
    CHECK(std::abs(out.re_hat[0] - Complex{3.0, 0.0}) < 1e-14);
    // psi picks up (2 - xi^2) S phi = 2 tau phi.
    CHECK(std::abs(out.im_hat[0] - Complex{2.0 * tau * 3.0, 0.0}) < 1e-13);
  }

  SECTION("unit frequency: hyperbolic rotation") {
    SpectralPair p = SpectralPair::zero(g.size());
    p.re_hat[1] = Complex{1.0, 0.0};
    p.re_hat[g.size() - 1] = Complex{1.0, 0.0};
    const SpectralPair out = prop.homogeneous_step(p, tau);
    // mu = -1: C = cosh, S = sinh; a = xi^2 S = sinh, b = (2 - 1) S = sinh.
    CHECK(std::abs(out.re_hat[1] - Complex{std::cosh(tau), 0.0}) < 1e-12);
    CHECK(std::abs(out.im_hat[1] - Complex{std::sinh(tau), 0.0}) < 1e-12);
  }

  SECTION("high-band frequency oscillates at the dispersion frequency") {
    SpectralPair p = SpectralPair::zero(g.size());
    p.re_hat[2] = Complex{1.0, 0.0};
    p.re_hat[g.size() - 2] = Complex{1.0, 0.0};
    const SpectralPair out = prop.homogeneous_step(p, tau);
    const Real omega = 2.0 * kSqrt2;  // |k| sqrt(k^2 - 2) at k = 2
    CHECK(std::abs(out.re_hat[2] - Complex{std::cos(omega * tau), 0.0}) < 1e-12);
    // psi component: (2 - 4) sin(omega tau)/omega = -2 S.
    const Real expect_psi = -2.0 * std::sin(omega * tau) / omega;
    CHECK(std::abs(out.im_hat[2] - Complex{expect_psi, 0.0}) < 1e-12);
  }

  SECTION("matrix entries match the oscillator oracle per frequency") {
    for (std::size_t k = 0; k < g.size(); ++k) {
      const Real mu = mu_of_xi(g.xi(k));
      const auto [c_ref, unused] = oracles::kernel_ode(mu, tau, 1.0, 0.0);
      (void)unused;
      const auto r = prop.rows(tau);
      CHECK(std::abs(r->c[k] - c_ref) < 1e-10 * std::max(1.0, std::abs(c_ref)));
    }
  }
}

TEST_CASE("constant-source closed forms", "[propagator]") {
  const Grid g(2.0 * kPi, 16);
  const Propagator prop(g);
  const Real tau = 0.5;

  SECTION("zero-frequency constant source") {
    // f = 0, g = g0 at xi = 0: integral = (S g0, (2 IS) g0) = (g0 tau, g0 tau^2).
    SpectralPair fg = SpectralPair::zero(g.size());
    fg.im_hat[0] = Complex{2.0, 0.0};
    const SpectralPair out = prop.duhamel_constant(fg, tau);
    CHECK(std::abs(out.re_hat[0] - Complex{2.0 * tau, 0.0}) < 1e-14);
    CHECK(std::abs(out.im_hat[0] - Complex{2.0 * sq(tau), 0.0}) < 1e-13);
  }

  SECTION("unit-frequency constant source") {
    // f = f0 at |xi| = 1, g = 0: phi gains -xi^2 IS f0 = -(cosh tau - 1) f0.
    SpectralPair fg = SpectralPair::zero(g.size());
    fg.re_hat[1] = Complex{1.5, 0.0};
    fg.re_hat[g.size() - 1] = Complex{1.5, 0.0};
    const SpectralPair out = prop.duhamel_constant(fg, tau);
    CHECK(std::abs(out.re_hat[1] - Complex{-(std::cosh(tau) - 1.0) * 1.5, 0.0}) < 1e-12);
    // psi gains -S f0 = -sinh(tau) f0 (b = S at xi^2 = 1... (2-1) S = S, sign -C f? )
    CHECK(std::abs(out.im_hat[1] - Complex{-std::sinh(tau) * 1.5, 0.0}) < 1e-12);
  }
}

TEST_CASE("quadrature of the inhomogeneous term converges at high order", "[propagator]") {
  // Manufactured smooth source F(sigma) = (cos(2 sigma) f0, sin(3 sigma) g0)
  // on a small grid; reference = 20001-node evaluation. Composite Simpson
  // should gain ~16x per node doubling (order >= 3.8 measured as ~4).
  const Grid g(2.0 * kPi, 16);
  const Propagator prop(g);
  const Real tau = 1.0;
  // Band limit 2 keeps the kernel frequencies <= 2 sqrt(2), so the coarsest
  // node count already resolves the integrand.
  const SpectralPair base = random_pair(g, 5, 2);

  const auto nodes_for = [&](std::size_t count) {
    std::vector<SpectralPair> nodes;
    nodes.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      const Real sigma = tau * static_cast<Real>(i) / static_cast<Real>(count - 1);
      SpectralPair fg = base;
      for (std::size_t k = 0; k < fg.size(); ++k) {
        fg.re_hat[k] *= std::cos(2.0 * sigma);
        fg.im_hat[k] *= std::sin(3.0 * sigma);
      }
      nodes.push_back(std::move(fg));
    }
    return nodes;
  };

  const SpectralPair ref = prop.duhamel_apply(nodes_for(20001), tau);
  Real prev_err = 0.0;
  std::vector<Real> errs;
  for (const std::size_t count : {9UL, 17UL, 33UL, 65UL}) {
    const SpectralPair approx = prop.duhamel_apply(nodes_for(count), tau);
    errs.push_back(pair_max_dev(approx, ref));
  }
  for (std::size_t i = 1; i < errs.size(); ++i) {
    const Real order = std::log2(errs[i - 1] / errs[i]);
    CHECK(order > 3.8);
  }
  (void)prev_err;
}

TEST_CASE("quadrature node-count contract", "[propagator]") {
  const Grid g(2.0 * kPi, 16);
  const Propagator prop(g);
  const std::vector<SpectralPair> one(1, SpectralPair::zero(g.size()));
  CHECK_THROWS_AS(prop.duhamel_apply(one, 0.1), std::invalid_argument);
  const std::vector<SpectralPair> four(4, SpectralPair::zero(g.size()));
  CHECK_THROWS_AS(prop.duhamel_apply(four, 0.1), std::invalid_argument);
  const std::vector<SpectralPair> two(2, SpectralPair::zero(g.size()));
  CHECK_NOTHROW(prop.duhamel_apply(two, 0.1));
  const std::vector<SpectralPair> five(5, SpectralPair::zero(g.size()));
  CHECK_NOTHROW(prop.duhamel_apply(five, 0.1));
}

TEST_CASE("growth bounds hold on random band-limited data", "[propagator]") {
  const Grid g(80.0, 1024);
  const Propagator prop(g);
  for (const Real t : {0.5, 2.0, 10.0}) {
    const GrowthCheckReport rep = verify_corollary_growth(prop, t, 200);
    INFO(rep.to_text());
    CHECK(rep.ok());
  }
}
