#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "breatherlab/fft.hpp"
#include "breatherlab/field.hpp"
#include "breatherlab/grid.hpp"
#include "breatherlab/types.hpp"

namespace breatherlab {

/// Scalar functionals of one snapshot. mass/energy/momentum are the conserved
/// functionals of the offset equation:
///   mass_w     = Int |w|^2 + 2 Re w        (equals Int |u|^2 - 1 of the full field)
///   energy_w   = Int |dx w|^2 - (1/2) Int (|w|^2 + 2 Re w)^2
///                (twice the full-field energy (1/2)Int|dx u|^2 - (1/4)Int(|u|^2-1)^2)
///   momentum_w = Im Int conj(w) dx w
/// err_vs_exact and shift_x0 are populated only when a reference solution is
/// supplied (relative shift-minimized H^s distance and its minimizer).
struct DiagnosticsRecord {
  Real t = 0.0;
  Real mass_w = 0.0;
  Real energy_w = 0.0;
  Real momentum_w = 0.0;
  Real hs_norm = 0.0;
  Real linf = 0.0;
  Real zero_mode_re = 0.0;  // Int Re w
  Real zero_mode_im = 0.0;  // Int Im w
  Real err_vs_exact = std::numeric_limits<Real>::quiet_NaN();
  Real shift_x0 = std::numeric_limits<Real>::quiet_NaN();
};

/// d/dx as a Fourier multiplier. The unpaired Nyquist mode is zeroed: its
/// i xi coefficient has no conjugate partner and would break realness.
inline std::vector<Complex> spectral_derivative(const Grid& g, std::span<const Complex> what) {
  std::vector<Complex> d(what.begin(), what.end());
  for (std::size_t k = 0; k < d.size(); ++k) {
    d[k] = (k == g.size() / 2) ? Complex{0.0, 0.0} : kI * g.xi(k) * d[k];
  }
  return d;
}

/// Shift-minimized H^s distance: minimizes ||w - ref(. - x0)||_{H^s} over the
/// continuous shift x0. The correlation
///   C(x0) = sum_k (1 + xi_k^2)^s what_k conj(ref_hat_k) e^{i xi_k x0}
/// is evaluated at all grid shifts by one inverse DFT, the best grid shift is
/// refined by parabolic interpolation and two Newton steps, and the distance
/// follows from ||w||^2 + ||ref||^2 - (2/L) Re C(x0*).
struct ShiftDistance {
  Real distance = 0.0;
  Real shift = 0.0;
};

inline ShiftDistance hs_distance_min_shift(const Grid& g, std::span<const Complex> w,
                                           std::span<const Complex> ref, Real s) {
  if (w.size() != g.size() || ref.size() != g.size())
    throw std::invalid_argument("hs_distance_min_shift: size mismatch");
  const std::size_t n = g.size();
  std::vector<Complex> what(w.begin(), w.end());
  std::vector<Complex> rhat(ref.begin(), ref.end());
  forward_transform_inplace(g, what);
  forward_transform_inplace(g, rhat);

  Real w2 = 0.0, r2 = 0.0;
  std::vector<Complex> gamma(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Real m = std::pow(1.0 + sq(g.xi(k)), s);
    w2 += m * std::norm(what[k]);
    r2 += m * std::norm(rhat[k]);
    gamma[k] = m * what[k] * std::conj(rhat[k]);
  }

  // C at the grid shifts x_m (seam phase makes the IDFT land on x_m).
  std::vector<Complex> corr(gamma);
  for (std::size_t k = 0; k < n; ++k)
    if (k % 2 == 1) corr[k] = -corr[k];
  detail::idft_inplace(corr);

  std::size_t best = 0;
  for (std::size_t m = 1; m < n; ++m)
    if (corr[m].real() > corr[best].real()) best = m;

  // Parabolic refinement on the periodic neighbors.
  const Real cm = corr[(best + n - 1) % n].real();
  const Real c0 = corr[best].real();
  const Real cp = corr[(best + 1) % n].real();
  Real delta = 0.0;
  const Real denom = cm - 2.0 * c0 + cp;
  if (denom != 0.0) delta = 0.5 * (cm - cp) / denom;
  Real x0 = g.x(best) + delta * g.dx();

  auto corr_derivs = [&](Real shift, Real& d1, Real& d2) {
    d1 = 0.0;
    d2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const Real xi = g.xi(k);
      const Complex e = gamma[k] * std::exp(kI * xi * shift);
      d1 += -xi * e.imag();  // Re(i xi e)
      d2 += -sq(xi) * e.real();
    }
  };
  for (int iter = 0; iter < 2; ++iter) {
    Real d1, d2;
    corr_derivs(x0, d1, d2);
    if (d2 < 0.0) x0 -= d1 / d2;
  }

  Real corr_at = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    corr_at += (gamma[k] * std::exp(kI * g.xi(k) * x0)).real();

  ShiftDistance out;
  out.distance = std::sqrt(std::max(0.0, (w2 + r2 - 2.0 * corr_at) / g.length()));
  // Report the shift in the principal cell.
  Real L = g.length();
  out.shift = x0 - L * std::floor(x0 / L + 0.5);
  return out;
}

/// All functionals of one snapshot; pass the exact reference samples (same
/// grid, same time) to populate the error columns.
inline DiagnosticsRecord compute_record(const Grid& g, std::span<const Complex> w, Real t, Real s,
                                        std::span<const Complex> reference = {}) {
  DiagnosticsRecord rec;
  rec.t = t;

  std::vector<Complex> what(w.begin(), w.end());
  forward_transform_inplace(g, what);
  std::vector<Complex> wx = spectral_derivative(g, what);
  backward_transform_inplace(g, wx);

  Real mass = 0.0, quartic = 0.0, grad2 = 0.0, mom = 0.0, linf = 0.0;
  for (std::size_t m = 0; m < g.size(); ++m) {
    const Real density = std::norm(w[m]) + 2.0 * w[m].real();
    mass += density;
    quartic += sq(density);
    grad2 += std::norm(wx[m]);
    mom += (std::conj(w[m]) * wx[m]).imag();
    linf = std::max(linf, std::abs(w[m]));
  }
  const Real dx = g.dx();
  rec.mass_w = mass * dx;
  rec.energy_w = grad2 * dx - 0.5 * quartic * dx;
  rec.momentum_w = mom * dx;
  rec.hs_norm = hs_norm_spectral(g, what, s);
  rec.linf = linf;
  rec.zero_mode_re = what[0].real();  // what[0] = Int w
  rec.zero_mode_im = what[0].imag();

  if (!reference.empty()) {
    const ShiftDistance sd = hs_distance_min_shift(g, w, reference, s);
    const Real ref_norm = hs_norm(g, reference, s);
    rec.err_vs_exact = ref_norm > 0.0 ? sd.distance / ref_norm : sd.distance;
    rec.shift_x0 = sd.shift;
  }
  return rec;
}

inline constexpr const char* kCsvHeader =
    "t,mass_w,energy_w,momentum_w,hs_norm,linf,zero_mode_re,zero_mode_im,err_vs_exact,shift_x0";

/// One CSV row, %.17g throughout (value-preserving and platform-stable;
/// absent optional fields print as nan).
inline std::string format_csv_row(const DiagnosticsRecord& r) {
  char buf[400];
  std::snprintf(buf, sizeof buf,
                "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", r.t, r.mass_w,
                r.energy_w, r.momentum_w, r.hs_norm, r.linf, r.zero_mode_re, r.zero_mode_im,
                r.err_vs_exact, r.shift_x0);
  return buf;
}

inline void write_csv(std::ostream& os, std::span<const DiagnosticsRecord> records) {
  os << kCsvHeader << '\n';
  for (const auto& r : records) os << format_csv_row(r) << '\n';
}

/// Least-squares slope of log(amplitude) vs t restricted to the window
/// amp_lo <= amplitude <= amp_hi (the linear-growth regime; below lies
/// roundoff, above lies nonlinear saturation).
inline Real fit_growth_rate(std::span<const Real> times, std::span<const Real> amplitudes,
                            Real amp_lo = 1e-7, Real amp_hi = 1e-4) {
  if (times.size() != amplitudes.size()) throw std::invalid_argument("fit_growth_rate: size mismatch");
  Real sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const Real a = amplitudes[i];
    if (!(a >= amp_lo && a <= amp_hi)) continue;
    const Real x = times[i], y = std::log(a);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 5) throw std::invalid_argument("fit_growth_rate: fewer than 5 samples in the amplitude window");
  const Real nn = static_cast<Real>(n);
  const Real det = nn * sxx - sx * sx;
  if (det == 0.0) throw std::invalid_argument("fit_growth_rate: degenerate window");
  return (nn * sxy - sx * sy) / det;
}

/// Oscillation frequency from regularly sampled signed values: averages the
/// spacing of linearly interpolated zero crossings (= half periods).
inline Real fit_oscillation_frequency(std::span<const Real> times, std::span<const Real> values) {
  if (times.size() != values.size()) throw std::invalid_argument("fit_oscillation_frequency: size mismatch");
  std::vector<Real> crossings;
  for (std::size_t i = 1; i < times.size(); ++i) {
    const Real a = values[i - 1], b = values[i];
    if (a == 0.0 || (a < 0.0) == (b < 0.0)) continue;
    const Real frac = a / (a - b);
    crossings.push_back(times[i - 1] + frac * (times[i] - times[i - 1]));
  }
  if (crossings.size() < 2)
    throw std::invalid_argument("fit_oscillation_frequency: need at least 2 zero crossings");
  const Real span = crossings.back() - crossings.front();
  const Real half_period = span / static_cast<Real>(crossings.size() - 1);
  return kPi / half_period;
}

}  // namespace breatherlab
