#pragma once

// Test-side numerical oracles, deliberately independent of the library code:
// double-exponential quadrature for real-line integrals and a Runge-Kutta
// integrator for the kernel ODE y'' + mu y = 0. Frozen here so library
// regressions cannot silently move the expected values.

#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>

namespace oracles {

/// Integral of f over the whole real line by double-exponential substitution
/// x = sinh((pi/2) sinh u). Accurate to ~1e-13 for smooth integrands with
/// polynomial or exponential decay.
inline double integrate_real_line(const std::function<double(double)>& f, double u_max = 3.6,
                                  std::size_t per_side = 2400) {
  const double h = u_max / static_cast<double>(per_side);
  const double c = 1.5707963267948966;  // pi / 2
  double acc = 0.0;
  for (std::size_t i = 0; i <= 2 * per_side; ++i) {
    const double u = -u_max + h * static_cast<double>(i);
    const double su = std::sinh(u);
    const double x = std::sinh(c * su);
    const double w = c * std::cosh(u) * std::cosh(c * su);
    const double fx = f(x);
    if (std::isfinite(fx) && std::isfinite(w)) acc += fx * w;
  }
  return acc * h;
}

/// Finite-interval integral via composite Simpson with n (even) panels.
inline double integrate_interval(const std::function<double(double)>& f, double a, double b,
                                 std::size_t n = 4096) {
  if (n % 2 != 0) ++n;
  const double h = (b - a) / static_cast<double>(n);
  double acc = f(a) + f(b);
  for (std::size_t i = 1; i < n; ++i) acc += f(a + h * static_cast<double>(i)) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

/// Solves y'' = -mu y from (y0, v0) at time 0 to time t with classic RK4.
/// Returns (y(t), y'(t)). Step count scales with the oscillation/growth rate
/// so the oracle stays ~1e-12 accurate for the ranges used in tests.
inline std::pair<double, double> kernel_ode(double mu, double t, double y0, double v0) {
  const double rate = 1.0 + std::sqrt(std::abs(mu));
  const auto steps = static_cast<std::size_t>(std::ceil(std::abs(t) * rate * 400.0)) + 1;
  const double h = t / static_cast<double>(steps);
  double y = y0, v = v0;
  for (std::size_t i = 0; i < steps; ++i) {
    const double k1y = v, k1v = -mu * y;
    const double k2y = v + 0.5 * h * k1v, k2v = -mu * (y + 0.5 * h * k1y);
    const double k3y = v + 0.5 * h * k2v, k3v = -mu * (y + 0.5 * h * k2y);
    const double k4y = v + h * k3v, k4v = -mu * (y + h * k3y);
    y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  }
  return {y, v};
}

}  // namespace oracles
