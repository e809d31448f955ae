#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "breatherlab/types.hpp"

namespace breatherlab {

/// ODE coefficient mu(xi) = xi^2 (xi^2 - 2) of the per-frequency oscillator
/// y'' + mu y = 0. mu <= 0 exactly on the low band |xi| <= sqrt(2), with
/// minimum -1 at |xi| = 1 (the fastest growing mode).
inline Real mu_of_xi(Real xi) {
  const Real x2 = sq(xi);
  return x2 * (x2 - 2.0);
}

/// Exponential growth rate of a low-band mode, |k| sqrt(2 - k^2) = sqrt(-mu);
/// zero outside the band.
inline Real growth_rate(Real k) {
  const Real k2 = sq(k);
  return k2 < 2.0 ? std::abs(k) * std::sqrt(2.0 - k2) : 0.0;
}

/// Oscillation frequency of a high-band mode, |k| sqrt(k^2 - 2) = sqrt(mu);
/// zero inside the band.
inline Real oscillation_frequency(Real k) {
  const Real k2 = sq(k);
  return k2 > 2.0 ? std::abs(k) * std::sqrt(k2 - 2.0) : 0.0;
}

/// Fundamental solutions of y'' + mu y = 0:
///   C(mu,t) = cos(sqrt(mu) t)            for mu >= 0, cosh(sqrt(-mu) t) else;
///   S(mu,t) = sin(sqrt(mu) t)/sqrt(mu)   for mu > 0,  sinh(sqrt(-mu) t)/sqrt(-mu) else,
///   S(0,t)  = t;
///   IS(mu,t) = Int_0^t S(mu,s) ds = (1 - C(mu,t))/mu, IS(0,t) = t^2/2.
/// Both branches are one analytic function of z = mu t^2; for |z| < 1e-6 all
/// three are evaluated by their power series (4 terms, truncation below
/// 1e-24) to avoid cancellation near mu = 0 and near the band edge.
struct Kernels {
  Real C;
  Real S;
  Real IS;
};

inline Kernels kernels(Real mu, Real t) {
  const Real z = mu * sq(t);
  Kernels k;
  if (std::abs(z) < 1e-6) {
    k.C = 1.0 + z * (-1.0 / 2.0 + z * (1.0 / 24.0 + z * (-1.0 / 720.0)));
    k.S = t * (1.0 + z * (-1.0 / 6.0 + z * (1.0 / 120.0 + z * (-1.0 / 5040.0))));
    k.IS = sq(t) * (1.0 / 2.0 + z * (-1.0 / 24.0 + z * (1.0 / 720.0 + z * (-1.0 / 40320.0))));
  } else if (mu > 0.0) {
    const Real r = std::sqrt(mu);
    k.C = std::cos(r * t);
    k.S = std::sin(r * t) / r;
    // Half-angle form of (1 - cos)/mu: no cancellation for small r t.
    k.IS = 2.0 * sq(std::sin(0.5 * r * t)) / mu;
  } else {
    const Real r = std::sqrt(-mu);
    k.C = std::cosh(r * t);
    k.S = std::sinh(r * t) / r;
    k.IS = 2.0 * sq(std::sinh(0.5 * r * t)) / (-mu);
  }
  return k;
}

inline Real kernel_C(Real mu, Real t) { return kernels(mu, t).C; }
inline Real kernel_S(Real mu, Real t) { return kernels(mu, t).S; }
inline Real kernel_IS(Real mu, Real t) { return kernels(mu, t).IS; }

/// Explicit constant for the high-band kernel bounds
/// |xi^2 S|, |(2 - xi^2) S| <= K max(1, t). The sharp supremum of
/// |xi^2 S| / max(1,t) over |xi| > sqrt(2), t > 0 is 2.045125..., attained at
/// t = 1, xi = 1.50602 (so K = 2 does NOT suffice: xi = 1.5, t = 1 gives
/// 2.25 sin(0.75)/0.75 = 2.0449). K = 2.05 covers the supremum with margin.
inline constexpr Real kHighBandK = 2.05;

/// One verified bound: max observed ratio (measured/bound) and where it
/// occurred. ok means no sample exceeded 1 beyond roundoff slack.
struct BoundRow {
  std::string name;
  Real max_ratio = 0.0;
  Real argmax_xi = 0.0;
  Real argmax_t = 0.0;
  bool ok = true;
  // First violating sample, if any.
  bool violated = false;
  Real first_bad_xi = 0.0;
  Real first_bad_t = 0.0;
};

struct BoundReport {
  std::vector<BoundRow> rows;

  bool ok() const {
    for (const auto& r : rows)
      if (!r.ok) return false;
    return true;
  }

  /// One row per bound: name, max ratio, argmax xi, argmax t.
  std::string to_text() const {
    std::string out;
    char buf[160];
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof buf, "%-24s max_ratio=%.12g argmax_xi=%.6g argmax_t=%.6g %s\n",
                    r.name.c_str(), r.max_ratio, r.argmax_xi, r.argmax_t,
                    r.ok ? "ok" : "VIOLATED");
      out += buf;
      if (r.violated) {
        std::snprintf(buf, sizeof buf, "    first violation at xi=%.12g t=%.12g\n",
                      r.first_bad_xi, r.first_bad_t);
        out += buf;
      }
    }
    return out;
  }
};

/// Kernel evaluators used by the bound verifiers; injectable so a defective
/// implementation (e.g. one without the series guard) is detectable by test.
struct KernelFns {
  Real (*C)(Real, Real) = kernel_C;
  Real (*S)(Real, Real) = kernel_S;
};

namespace detail {

inline void bound_update(BoundRow& row, Real value, Real bound, Real xi, Real t, Real slack) {
  const Real ratio = value / bound;
  if (std::isfinite(ratio) && ratio > row.max_ratio) {
    row.max_ratio = ratio;
    row.argmax_xi = xi;
    row.argmax_t = t;
  }
  // A non-finite kernel value is itself a violation (e.g. 0/0 at the band
  // edge when the small-argument series is missing).
  const bool holds = std::isfinite(value) && value <= bound * (1.0 + slack);
  if (!holds && !row.violated) {
    row.violated = true;
    row.ok = false;
    row.first_bad_xi = xi;
    row.first_bad_t = t;
  }
}

}  // namespace detail

/// Checks the low-band kernel bounds on a dense sample of |xi| <= sqrt(2),
/// t in (0, t_max]:
///   C <= cosh t,  S <= sinh t,  xi^2 S <= 2 sinh t,  (2 - xi^2) S <= 2 sinh t.
/// The S <= sinh t bound saturates at |xi| = 1; ratios may touch 1 to
/// roundoff, so a 1e-9 slack is applied before declaring a violation.
inline BoundReport verify_low_band_bounds(Real t_max, std::size_t samples,
                                          KernelFns fns = KernelFns{}) {
  const Real slack = 1e-9;
  BoundReport rep;
  rep.rows = {BoundRow{.name = "C_le_cosh_t"},
              BoundRow{.name = "S_le_sinh_t"},
              BoundRow{.name = "xi2_S_le_2sinh_t"},
              BoundRow{.name = "gap_S_le_2sinh_t"}};
  for (std::size_t i = 0; i <= samples; ++i) {
    const Real xi = kSqrt2 * static_cast<Real>(i) / static_cast<Real>(samples);
    // The band edge maps to exactly zero curvature; squaring in floating
    // point would land at ~1e-16 and miss the removable singularity that the
    // series branch exists for, so pin it.
    const Real mu = (i == samples) ? 0.0 : mu_of_xi(xi);
    for (std::size_t j = 1; j <= samples; ++j) {
      const Real t = t_max * static_cast<Real>(j) / static_cast<Real>(samples);
      const Real C = fns.C(mu, t);
      const Real S = fns.S(mu, t);
      const Real cosh_t = std::cosh(t);
      const Real sinh_t = std::sinh(t);
      detail::bound_update(rep.rows[0], C, cosh_t, xi, t, slack);
      detail::bound_update(rep.rows[1], S, sinh_t, xi, t, slack);
      detail::bound_update(rep.rows[2], sq(xi) * S, 2.0 * sinh_t, xi, t, slack);
      detail::bound_update(rep.rows[3], (2.0 - sq(xi)) * S, 2.0 * sinh_t, xi, t, slack);
    }
  }
  return rep;
}

/// Checks the high-band kernel bounds on random samples of |xi| > sqrt(2),
/// t in [0, t_max]:
///   |C| <= 1,  |xi^2 S| <= K max(1,t),  |(2 - xi^2) S| <= K max(1,t).
/// Sampling concentrates half the draws near the band edge (where the
/// supremum lives) and spreads the rest up to xi_max.
inline BoundReport verify_high_band_bounds(Real t_max, std::size_t samples, Real K = kHighBandK,
                                           Real xi_max = 64.0, std::uint64_t seed = 0x5eedu,
                                           KernelFns fns = KernelFns{}) {
  const Real slack = 1e-9;
  BoundReport rep;
  rep.rows = {BoundRow{.name = "abs_C_le_1"},
              BoundRow{.name = "abs_xi2_S_le_Kmax1t"},
              BoundRow{.name = "abs_gap_S_le_Kmax1t"}};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<Real> u01(0.0, 1.0);
  for (std::size_t i = 0; i < samples; ++i) {
    const Real u = u01(rng);
    const Real xi = (i % 2 == 0) ? kSqrt2 + u * (xi_max - kSqrt2)   // full range
                                 : kSqrt2 + u * u * 2.0;            // band-edge heavy
    const Real t = t_max * u01(rng);
    const Real mu = mu_of_xi(xi);
    const Real C = fns.C(mu, t);
    const Real S = fns.S(mu, t);
    const Real cap = K * std::max(1.0, t);
    detail::bound_update(rep.rows[0], std::abs(C), 1.0, xi, t, slack);
    detail::bound_update(rep.rows[1], std::abs(sq(xi) * S), cap, xi, t, slack);
    detail::bound_update(rep.rows[2], std::abs((2.0 - sq(xi)) * S), cap, xi, t, slack);
  }
  return rep;
}

}  // namespace breatherlab
