#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "breatherlab/fft.hpp"
#include "breatherlab/field.hpp"
#include "breatherlab/grid.hpp"
#include "breatherlab/types.hpp"

namespace breatherlab {

/// Exact solutions riding on the plane-wave background. Every kind is written
/// as u(t,x) = e^{it} (1 + W(t,x)); W is the offset field the solver evolves.
enum class BreatherKind {
  stokes,        // u = e^{it}, W = 0
  plane_wave,    // sqrt(c) exp(i c t + i v x / 2 - i v^2 t / 4 + i gamma)
  peregrine,     // rational, space-time localized, peak amplitude 3
  kuznetsov_ma,  // a > 1/2: time-periodic, exponentially localized in x
  akhmediev,     // 0 < a < 1/2: space-periodic, localized in time
};

inline const char* to_string(BreatherKind k) {
  switch (k) {
    case BreatherKind::stokes: return "stokes";
    case BreatherKind::plane_wave: return "plane_wave";
    case BreatherKind::peregrine: return "peregrine";
    case BreatherKind::kuznetsov_ma: return "kuznetsov_ma";
    case BreatherKind::akhmediev: return "akhmediev";
  }
  return "?";
}

/// Kuznetsov-Ma parameters: alpha = sqrt(8a(2a-1)), beta = sqrt(2(2a-1)).
/// alpha/(sqrt(2) beta) = sqrt(2a) > 1 keeps the denominator away from zero.
inline Real km_alpha(Real a) { return std::sqrt(8.0 * a * (2.0 * a - 1.0)); }
inline Real km_beta(Real a) { return std::sqrt(2.0 * (2.0 * a - 1.0)); }
inline Real km_period(Real a) { return 2.0 * kPi / km_alpha(a); }

/// Akhmediev parameters: beta = sqrt(8a(1-2a)), alpha = sqrt(2(1-2a)).
inline Real akhmediev_alpha(Real a) { return std::sqrt(2.0 * (1.0 - 2.0 * a)); }
inline Real akhmediev_beta(Real a) { return std::sqrt(8.0 * a * (1.0 - 2.0 * a)); }
inline Real akhmediev_x_period(Real a) { return 2.0 * kPi / akhmediev_alpha(a); }

/// ||Q(t)||_{L^2}^2 = 4 sqrt(2) pi / sqrt(1 + 4 t^2): the Peregrine offset
/// decays to zero in every H^s while the profile at t = 0 is O(1) (the
/// instability mechanism).
inline Real peregrine_l2_squared(Real t) { return 4.0 * kSqrt2 * kPi / std::sqrt(1.0 + 4.0 * sq(t)); }

/// Mass functional Int(|w|^2 + 2 Re w) of the KM offset: 4 beta.
inline Real km_mass(Real a) { return 4.0 * km_beta(a); }

/// Offset energy functional Int|dx w|^2 - (1/2) Int(|w|^2 + 2 Re w)^2 of the
/// KM offset: -(4/3) beta^3. (This functional is exactly twice the
/// u-variable energy (1/2)Int|dx u|^2 - (1/4)Int(|u|^2-1)^2.)
inline Real km_energy(Real a) { return -(4.0 / 3.0) * std::pow(km_beta(a), 3); }

struct BreatherSpec {
  BreatherKind kind = BreatherKind::stokes;
  Real a = 1.0;        // kuznetsov_ma: a > 1/2; akhmediev: 0 < a < 1/2
  Real c = 1.0;        // plane_wave scaling, c > 0
  Real v = 0.0;        // plane_wave velocity
  Real gamma = 0.0;    // plane_wave phase
  Real x0 = 0.0;       // spatial shift: evaluated at x - x0
  Real t0 = 0.0;       // temporal shift: evaluated at t - t0

  void validate() const {
    switch (kind) {
      case BreatherKind::kuznetsov_ma:
        if (!(a > 0.5)) throw std::invalid_argument("kuznetsov_ma requires a > 1/2");
        break;
      case BreatherKind::akhmediev:
        if (!(a > 0.0 && a < 0.5)) throw std::invalid_argument("akhmediev requires 0 < a < 1/2");
        break;
      case BreatherKind::plane_wave:
        if (!(c > 0.0)) throw std::invalid_argument("plane_wave requires c > 0");
        break;
      default:
        break;
    }
  }
};

namespace detail {

/// Offset formulas in breather-internal coordinates (no shifts).
inline Complex offset_formula(const BreatherSpec& spec, Real t, Real x) {
  switch (spec.kind) {
    case BreatherKind::stokes:
      return Complex{0.0, 0.0};
    case BreatherKind::plane_wave: {
      // W = u e^{-it} - 1 for u = sqrt(c) exp(i c t + i v x/2 - i v^2 t/4 + i gamma).
      const Real phase = (spec.c - 1.0) * t + 0.5 * spec.v * x - 0.25 * sq(spec.v) * t + spec.gamma;
      return std::sqrt(spec.c) * std::exp(kI * phase) - 1.0;
    }
    case BreatherKind::peregrine:
      return -4.0 * (1.0 + 2.0 * kI * t) / (1.0 + 4.0 * sq(t) + 2.0 * sq(x));
    case BreatherKind::kuznetsov_ma: {
      const Real al = km_alpha(spec.a);
      const Real be = km_beta(spec.a);
      const Complex num = sq(be) * std::cos(al * t) + kI * al * std::sin(al * t);
      const Real den = al * std::cosh(be * x) - kSqrt2 * be * std::cos(al * t);
      return -kSqrt2 * be * num / den;
    }
    case BreatherKind::akhmediev: {
      const Real al = akhmediev_alpha(spec.a);
      const Real be = akhmediev_beta(spec.a);
      const Complex num = sq(al) * std::cosh(be * t) + kI * be * std::sinh(be * t);
      const Real den = std::sqrt(2.0 * spec.a) * std::cos(al * x) - std::cosh(be * t);
      return num / den;
    }
  }
  return Complex{0.0, 0.0};
}

}  // namespace detail

/// Offset value W(t,x) with the requested shifts (x0, t0) applied. The
/// shifted offset still solves the offset equation: the shifted full solution
/// differs from a translate of the original by a constant phase, which is an
/// invariance.
inline Complex breather_offset(const BreatherSpec& spec, Real t, Real x) {
  spec.validate();
  return detail::offset_formula(spec, t - spec.t0, x - spec.x0);
}

/// Full solution value u(t,x) = e^{it} (1 + W(t,x)).
inline Complex breather_value(const BreatherSpec& spec, Real t, Real x) {
  return std::exp(kI * t) * (1.0 + breather_offset(spec, t, x));
}

/// Offset sampled on the grid at fixed time (the solver's initial-datum
/// generator). Akhmediev offsets are rejected unless L is an integer multiple
/// of the x-period 2 pi / alpha, so periodization is exact.
inline std::vector<Complex> sample_offset(const BreatherSpec& spec, const Grid& g, Real t) {
  spec.validate();
  if (spec.kind == BreatherKind::akhmediev) {
    const Real periods = g.length() / akhmediev_x_period(spec.a);
    if (std::abs(periods - std::round(periods)) > 1e-9 * periods) {
      throw std::invalid_argument(
          "akhmediev: domain length must be an integer multiple of the x-period " +
          std::to_string(akhmediev_x_period(spec.a)));
    }
  }
  std::vector<Complex> w(g.size());
  for (std::size_t m = 0; m < g.size(); ++m) w[m] = breather_offset(spec, t, g.x(m));
  return w;
}

/// Max-norm of i du/dt + d2u/dx2 + |u|^2 u over the window |x - x0| <= window_fraction * L,
/// with du/dt by centered finite difference (step h_t, independent of the
/// formulas under test) and d2u/dx2 spectral. Small residual certifies the
/// implemented formula actually solves the equation; the window excludes the
/// periodization seam that algebraic tails produce at the domain edge.
inline Real breather_residual(const BreatherSpec& spec, const Grid& g, Real t, Real h_t = 1e-5,
                              Real window_fraction = 0.25) {
  const std::size_t n = g.size();
  std::vector<Complex> u0(n), up(n), um(n);
  for (std::size_t m = 0; m < n; ++m) {
    u0[m] = breather_value(spec, t, g.x(m));
    up[m] = breather_value(spec, t + h_t, g.x(m));
    um[m] = breather_value(spec, t - h_t, g.x(m));
  }
  std::vector<Complex> uxx(u0);
  forward_transform_inplace(g, uxx);
  for (std::size_t k = 0; k < n; ++k) uxx[k] *= -sq(g.xi(k));
  backward_transform_inplace(g, uxx);

  const Real half_window = window_fraction * g.length();
  Real worst = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    if (std::abs(g.x(m) - spec.x0) > half_window) continue;
    const Complex ut = (up[m] - um[m]) / (2.0 * h_t);
    const Complex res = kI * ut + uxx[m] + std::norm(u0[m]) * u0[m];
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

/// Both breather families degenerate to the Peregrine breather as a -> 1/2.
/// Measures sup |W_a - Q| over a compact (t,x) lattice for a parameter
/// sequence approaching 1/2 and checks the distances shrink.
struct LimitCheckRow {
  Real a = 0.0;
  Real sup_distance = 0.0;
};

struct LimitCheckReport {
  std::vector<LimitCheckRow> rows;
  bool decreasing = true;  // beyond the first term
};

inline LimitCheckReport peregrine_limit_check(BreatherKind kind, std::span<const Real> a_seq,
                                              Real window = 1.0, std::size_t lattice = 41) {
  if (kind != BreatherKind::kuznetsov_ma && kind != BreatherKind::akhmediev)
    throw std::invalid_argument("peregrine_limit_check: kind must be kuznetsov_ma or akhmediev");
  LimitCheckReport rep;
  const BreatherSpec peregrine{.kind = BreatherKind::peregrine};
  for (Real a : a_seq) {
    BreatherSpec spec;
    spec.kind = kind;
    spec.a = a;
    Real sup = 0.0;
    for (std::size_t i = 0; i < lattice; ++i) {
      const Real t = -window + 2.0 * window * static_cast<Real>(i) / static_cast<Real>(lattice - 1);
      for (std::size_t j = 0; j < lattice; ++j) {
        const Real x = -window + 2.0 * window * static_cast<Real>(j) / static_cast<Real>(lattice - 1);
        sup = std::max(sup, std::abs(breather_offset(spec, t, x) - breather_offset(peregrine, t, x)));
      }
    }
    rep.rows.push_back({a, sup});
  }
  for (std::size_t i = 2; i < rep.rows.size(); ++i) {
    if (rep.rows[i].sup_distance > rep.rows[i - 1].sup_distance) rep.decreasing = false;
  }
  return rep;
}

}  // namespace breatherlab
