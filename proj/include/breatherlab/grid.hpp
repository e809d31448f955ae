#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "breatherlab/types.hpp"

namespace breatherlab {

/// Uniform periodic grid on [-L/2, L/2) together with its discrete frequency set.
///
/// Physical nodes are x_m = -L/2 + m*dx for m = 0..N-1 with dx = L/N. Spectral
/// arrays use FFT storage order: slot k holds the signed mode j = k for k < N/2
/// and j = k - N otherwise, i.e. frequencies xi_j = 2*pi*j/L with
/// j in {-N/2, ..., N/2 - 1}. The single unpaired index is the Nyquist mode
/// j = -N/2.
///
/// The frequency axis splits at |xi| = sqrt(2): modes with |xi| <= sqrt(2)
/// ("low band") have exponentially growing linearized kernels, the rest
/// ("high band") oscillate.
class Grid {
 public:
  Grid(Real length, std::size_t points) : L_(length), N_(points) {
    if (!(L_ > 0.0)) throw std::invalid_argument("Grid: length must be positive");
    if (N_ < 2 || N_ % 2 != 0) throw std::invalid_argument("Grid: points must be a positive even integer");
  }

  Real length() const { return L_; }
  std::size_t size() const { return N_; }
  Real dx() const { return L_ / static_cast<Real>(N_); }
  /// Spacing of the discrete frequency set, 2*pi/L.
  Real dxi() const { return 2.0 * kPi / L_; }

  /// Physical node x_m = -L/2 + m*dx.
  Real x(std::size_t m) const { return -0.5 * L_ + dx() * static_cast<Real>(m); }

  /// Signed integer mode j stored in spectral slot k.
  long mode(std::size_t k) const {
    return k < N_ / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(N_);
  }

  /// Continuous frequency xi_j = 2*pi*j/L stored in spectral slot k.
  Real xi(std::size_t k) const { return dxi() * static_cast<Real>(mode(k)); }

  /// True for modulationally unstable modes, |xi_k| <= sqrt(2).
  bool in_low_band(std::size_t k) const { return std::abs(xi(k)) <= kSqrt2; }

  /// 2/3-rule dealiasing predicate: keep modes with |j| <= N/3. The Nyquist
  /// mode j = -N/2 is always dropped, which also keeps spectra of real
  /// fields exactly Hermitian after nonlinear evaluations.
  bool dealias_keep(std::size_t k) const {
    long j = mode(k);
    return 3 * std::abs(j) <= static_cast<long>(N_);
  }

  bool operator==(const Grid& o) const { return L_ == o.L_ && N_ == o.N_; }
  bool operator!=(const Grid& o) const { return !(*this == o); }

 private:
  Real L_;
  std::size_t N_;
};

/// Disjoint, exhaustive partition of the spectral slots at |xi| = sqrt(2).
struct BandMasks {
  std::vector<std::size_t> low;   // |xi| <= sqrt(2)
  std::vector<std::size_t> high;  // |xi| >  sqrt(2)
};

inline BandMasks band_masks(const Grid& g) {
  BandMasks m;
  for (std::size_t k = 0; k < g.size(); ++k) {
    (g.in_low_band(k) ? m.low : m.high).push_back(k);
  }
  return m;
}

}  // namespace breatherlab
