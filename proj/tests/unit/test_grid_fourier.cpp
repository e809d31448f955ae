#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "breatherlab/breathers.hpp"
#include "breatherlab/fft.hpp"
#include "breatherlab/field.hpp"
#include "breatherlab/grid.hpp"
#include "support/oracles.hpp"

using namespace breatherlab;

TEST_CASE("grid validates its parameters", "[grid]") {
  CHECK_THROWS_AS(Grid(0.0, 64), std::invalid_argument);
  CHECK_THROWS_AS(Grid(-1.0, 64), std::invalid_argument);
  CHECK_THROWS_AS(Grid(10.0, 63), std::invalid_argument);
  CHECK_THROWS_AS(Grid(10.0, 0), std::invalid_argument);
}

TEST_CASE("grid coordinates and mode map", "[grid]") {
  const Grid g(40.0, 128);
  CHECK(g.dx() == Catch::Approx(40.0 / 128.0));
  CHECK(g.x(0) == Catch::Approx(-20.0));
  CHECK(g.x(64) == Catch::Approx(0.0).margin(1e-14));
  CHECK(g.dxi() == Catch::Approx(2.0 * kPi / 40.0));
  CHECK(g.mode(0) == 0);
  CHECK(g.mode(1) == 1);
  CHECK(g.mode(64) == -64);  // Nyquist slot takes the negative label
  CHECK(g.mode(65) == -63);
  CHECK(g.mode(127) == -1);
  CHECK(g.xi(127) == Catch::Approx(-g.dxi()));
}

TEST_CASE("single Fourier mode transforms to coefficient L", "[grid]") {
  const Grid g(40.0, 256);
  for (const long j : {0L, 1L, 5L, -7L, 100L}) {
    const Real xi = g.dxi() * static_cast<Real>(j);
    std::vector<Complex> w(g.size());
    for (std::size_t m = 0; m < g.size(); ++m) w[m] = std::exp(kI * xi * g.x(m));
    const std::vector<Complex> what = forward_transform(g, w);
    const std::size_t slot = static_cast<std::size_t>((j % static_cast<long>(g.size()) +
                                                       static_cast<long>(g.size())) %
                                                      static_cast<long>(g.size()));
    CHECK(std::abs(what[slot] - Complex{40.0, 0.0}) < 1e-9);
    Real rest = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
      if (k != slot) rest = std::max(rest, std::abs(what[k]));
    CHECK(rest < 1e-9);
  }
}

TEST_CASE("transform matches the analytic sech pair", "[grid]") {
  // f(x) = sech(x) has continuum transform pi sech(pi xi / 2); on a long box
  // the discrete coefficients agree to near machine precision.
  const Grid g(80.0, 2048);
  std::vector<Complex> f(g.size());
  for (std::size_t m = 0; m < g.size(); ++m) f[m] = 1.0 / std::cosh(g.x(m));
  const std::vector<Complex> fhat = forward_transform(g, f);
  for (const long j : {0L, 3L, 10L, 25L, -40L}) {
    const std::size_t slot = static_cast<std::size_t>((j + static_cast<long>(g.size())) %
                                                      static_cast<long>(g.size()));
    const Real xi = g.dxi() * static_cast<Real>(j);
    const Real expected = kPi / std::cosh(kPi * xi / 2.0);
    CHECK(std::abs(fhat[slot] - Complex{expected, 0.0}) < 1e-10 * std::max(1.0, expected));
  }
}

TEST_CASE("roundtrip and Parseval", "[grid]") {
  const Grid g(60.0, 512);
  std::mt19937_64 rng(42);
  std::normal_distribution<Real> dist(0.0, 1.0);
  std::vector<Complex> w(g.size());
  for (auto& v : w) v = Complex{dist(rng), dist(rng)};

  const std::vector<Complex> back = backward_transform(g, forward_transform(g, w));
  Real max_dev = 0.0;
  for (std::size_t m = 0; m < g.size(); ++m) max_dev = std::max(max_dev, std::abs(back[m] - w[m]));
  CHECK(max_dev < 1e-12);

  const std::vector<Complex> what = forward_transform(g, w);
  Real grid_l2sq = 0.0;
  for (const auto& v : w) grid_l2sq += std::norm(v);
  grid_l2sq *= g.dx();
  Real spec_l2sq = 0.0;
  for (const auto& v : what) spec_l2sq += std::norm(v);
  spec_l2sq /= g.length();
  CHECK(grid_l2sq == Catch::Approx(spec_l2sq).epsilon(1e-10));
  CHECK(l2_norm(g, w) == Catch::Approx(std::sqrt(grid_l2sq)).epsilon(1e-12));
}

TEST_CASE("Sobolev norms are monotone in s and reject negative s", "[grid]") {
  const Grid g(40.0, 256);
  std::mt19937_64 rng(7);
  const std::vector<Complex> w = random_field(g, 40, 1.0, 1.0, rng);
  const Real h0 = hs_norm(g, w, 0.0);
  const Real h1 = hs_norm(g, w, 1.0);
  const Real h2 = hs_norm(g, w, 2.0);
  CHECK(h0 <= h1);
  CHECK(h1 <= h2);
  CHECK(h1 == Catch::Approx(1.0).epsilon(1e-10));  // random_field normalizes in H^1
  CHECK_THROWS_AS(hs_norm(g, w, -0.5), std::invalid_argument);
}

TEST_CASE("low band membership", "[grid]") {
  // L = 80, N = 2048: |xi_j| <= sqrt(2) <=> |j| <= 18, hence 37 slots.
  const Grid g(80.0, 2048);
  std::size_t low = 0;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (g.in_low_band(k)) ++low;
  CHECK(low == 37);

  // L = 2 pi, N = 8: integer frequencies; only j in {0, +-1} are low.
  const Grid tiny(2.0 * kPi, 8);
  for (std::size_t k = 0; k < tiny.size(); ++k) {
    const bool expect = std::abs(tiny.mode(k)) <= 1;
    CHECK(tiny.in_low_band(k) == expect);
  }
}

TEST_CASE("band masks partition the slots", "[grid]") {
  const Grid g(50.0, 256);
  const BandMasks masks = band_masks(g);
  std::vector<int> hits(g.size(), 0);
  for (std::size_t k : masks.low) ++hits[k];
  for (std::size_t k : masks.high) ++hits[k];
  for (std::size_t k = 0; k < g.size(); ++k) CHECK(hits[k] == 1);
}

TEST_CASE("dealias keep set follows the one-third rule", "[grid]") {
  const Grid g(80.0, 2048);
  CHECK(g.dealias_keep(682));
  CHECK_FALSE(g.dealias_keep(683));
  CHECK_FALSE(g.dealias_keep(1024));  // Nyquist always dropped
  CHECK(g.dealias_keep(g.size() - 682));
  CHECK_FALSE(g.dealias_keep(g.size() - 683));
}

TEST_CASE("spectral quantities are stable under grid refinement", "[grid]") {
  // A fixed smooth profile must give the same norms and coefficients on any
  // sufficiently fine grid.
  const Grid coarse(40.0, 256);
  const Grid fine(40.0, 512);
  const auto sample = [](const Grid& g) {
    std::vector<Complex> w(g.size());
    for (std::size_t m = 0; m < g.size(); ++m) {
      const Real x = g.x(m);
      w[m] = std::exp(-x * x / 8.0) * Complex{std::cos(x), 0.3 * std::sin(2.0 * x)};
    }
    return w;
  };
  const std::vector<Complex> wc = sample(coarse), wf = sample(fine);
  CHECK(hs_norm(coarse, wc, 1.0) == Catch::Approx(hs_norm(fine, wf, 1.0)).epsilon(1e-10));
  CHECK(l2_norm(coarse, wc) == Catch::Approx(l2_norm(fine, wf)).epsilon(1e-10));

  const std::vector<Complex> hc = forward_transform(coarse, wc);
  const std::vector<Complex> hf = forward_transform(fine, wf);
  for (const long j : {0L, 1L, 4L, -9L}) {
    const auto slot = [&](const Grid& g) {
      return static_cast<std::size_t>((j + static_cast<long>(g.size())) %
                                      static_cast<long>(g.size()));
    };
    CHECK(std::abs(hc[slot(coarse)] - hf[slot(fine)]) < 1e-10);
  }
}

TEST_CASE("Hermitian split and merge invert each other", "[grid]") {
  const Grid g(30.0, 128);
  std::mt19937_64 rng(11);
  std::normal_distribution<Real> dist(0.0, 1.0);
  std::vector<Complex> w(g.size());
  for (auto& v : w) v = Complex{dist(rng), dist(rng)};
  const std::vector<Complex> what = forward_transform(g, w);

  const SpectralPair p = split_spectrum(what);
  const std::vector<Complex> merged = merge_spectrum(p);
  Real dev = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) dev = std::max(dev, std::abs(merged[k] - what[k]));
  CHECK(dev < 1e-12);

  // The split parts carry the real/imaginary fields: their pairwise norm
  // reproduces the full Sobolev norm (cross terms cancel by symmetry).
  CHECK(pair_hs_norm(g, p, 1.5) == Catch::Approx(hs_norm_spectral(g, what, 1.5)).epsilon(1e-12));

  const SpectralPair q = decompose(g, w);
  const std::vector<Complex> wr = reconstruct(g, q);
  dev = 0.0;
  for (std::size_t m = 0; m < g.size(); ++m) dev = std::max(dev, std::abs(wr[m] - w[m]));
  CHECK(dev < 1e-12);
}

TEST_CASE("box quadrature matches closed forms for the rational profile", "[grid]") {
  // |Q(0,.)|^2 integrates to 4 sqrt(2) pi on the line; the box value differs
  // only by the O(A^-3) tail.
  const Grid g(200.0, 4096);
  const BreatherSpec q{.kind = BreatherKind::peregrine};
  const std::vector<Complex> w = sample_offset(q, g, 0.0);
  const Real box = sq(l2_norm(g, w));
  const Real exact = 4.0 * kSqrt2 * kPi;
  CHECK(std::abs(box - exact) < 2e-5);

  // The real part integrates on the box to the arctan antiderivative value.
  const Real A = 100.0;
  const Real box_re = integrate(g, w).real();
  const Real closed = -(8.0 / kSqrt2) * std::atan(kSqrt2 * A);
  CHECK(box_re == Catch::Approx(closed).margin(1e-8));

  // Oracle self-check: the real-line quadrature reproduces both closed forms.
  const double oracle_l2 = oracles::integrate_real_line(
      [](double x) { return std::norm(-4.0 / (1.0 + 2.0 * x * x)); });
  CHECK(oracle_l2 == Catch::Approx(exact).epsilon(1e-12));
  const double oracle_re = oracles::integrate_real_line(
      [](double x) { return -4.0 / (1.0 + 2.0 * x * x); });
  CHECK(oracle_re == Catch::Approx(-2.0 * kSqrt2 * kPi).epsilon(1e-12));
}
