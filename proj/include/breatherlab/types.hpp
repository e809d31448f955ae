#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>

namespace breatherlab {

using Real = double;
using Complex = std::complex<double>;

inline constexpr Real kPi = std::numbers::pi_v<Real>;
inline constexpr Real kSqrt2 = std::numbers::sqrt2_v<Real>;
inline constexpr Complex kI{0.0, 1.0};

inline constexpr Real sq(Real v) { return v * v; }

}  // namespace breatherlab
