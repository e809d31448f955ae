#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "breatherlab/fft.hpp"
#include "breatherlab/grid.hpp"
#include "breatherlab/types.hpp"

namespace breatherlab {

/// Periodic rectangle quadrature, dx * sum(samples); spectrally accurate for
/// smooth periodic integrands.
inline Complex integrate(const Grid& g, std::span<const Complex> samples) {
  Complex acc{0.0, 0.0};
  for (const Complex& v : samples) acc += v;
  return acc * g.dx();
}

inline Real linf_norm(std::span<const Complex> samples) {
  Real m = 0.0;
  for (const Complex& v : samples) m = std::max(m, std::abs(v));
  return m;
}

/// L2 norm from physical samples, sqrt(dx * sum |w|^2).
inline Real l2_norm(const Grid& g, std::span<const Complex> samples) {
  Real acc = 0.0;
  for (const Complex& v : samples) acc += std::norm(v);
  return std::sqrt(acc * g.dx());
}

/// Sobolev H^s norm from continuum-normalized spectral coefficients:
///   ( (1/L) sum_k (1 + xi_k^2)^s |what_k|^2 )^{1/2}.
/// s = 0 coincides with the L2 norm (Parseval).
inline Real hs_norm_spectral(const Grid& g, std::span<const Complex> what, Real s) {
  if (s < 0.0) throw std::invalid_argument("hs_norm: s must be nonnegative");
  Real acc = 0.0;
  for (std::size_t k = 0; k < what.size(); ++k) {
    acc += std::pow(1.0 + sq(g.xi(k)), s) * std::norm(what[k]);
  }
  return std::sqrt(acc / g.length());
}

/// H^s norm from physical samples (one forward transform).
inline Real hs_norm(const Grid& g, std::span<const Complex> samples, Real s) {
  std::vector<Complex> what(samples.begin(), samples.end());
  forward_transform_inplace(g, what);
  return hs_norm_spectral(g, what, s);
}

/// Spectra of the real and imaginary parts of a complex field. This is the
/// state representation of the linearized propagator (re_hat, im_hat) =
/// (phi_hat, psi_hat) for w = phi + i psi, and doubles as the source pair
/// (f_hat, g_hat) for G = f + i g. Both components are Hermitian spectra.
struct SpectralPair {
  std::vector<Complex> re_hat;
  std::vector<Complex> im_hat;

  std::size_t size() const { return re_hat.size(); }

  static SpectralPair zero(std::size_t n) {
    SpectralPair p;
    p.re_hat.assign(n, Complex{0.0, 0.0});
    p.im_hat.assign(n, Complex{0.0, 0.0});
    return p;
  }
};

/// Split the spectrum of a complex field into the spectra of its real and
/// imaginary parts using the Hermitian symmetry of the conjugate:
///   F[Re w]_k = (F[w]_k + conj(F[w]_{N-k})) / 2,
///   F[Im w]_k = (F[w]_k - conj(F[w]_{N-k})) / (2i).
/// Costs O(N) and saves a transform versus transforming Re w and Im w
/// separately. The (-1)^k seam phase is real, so it commutes with the split.
inline SpectralPair split_spectrum(std::span<const Complex> what) {
  const std::size_t n = what.size();
  SpectralPair p;
  p.re_hat.resize(n);
  p.im_hat.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Complex a = what[k];
    const Complex b = std::conj(what[(n - k) % n]);
    p.re_hat[k] = 0.5 * (a + b);
    p.im_hat[k] = (a - b) / Complex{0.0, 2.0};
  }
  return p;
}

/// Inverse of split_spectrum: F[w] = F[Re w] + i F[Im w] by linearity.
inline std::vector<Complex> merge_spectrum(const SpectralPair& p) {
  std::vector<Complex> what(p.size());
  for (std::size_t k = 0; k < what.size(); ++k) what[k] = p.re_hat[k] + kI * p.im_hat[k];
  return what;
}

/// Physical complex field -> (phi_hat, psi_hat).
inline SpectralPair decompose(const Grid& g, std::span<const Complex> w) {
  std::vector<Complex> what(w.begin(), w.end());
  forward_transform_inplace(g, what);
  return split_spectrum(what);
}

/// (phi_hat, psi_hat) -> physical complex field.
inline std::vector<Complex> reconstruct(const Grid& g, const SpectralPair& p) {
  std::vector<Complex> w = merge_spectrum(p);
  backward_transform_inplace(g, w);
  return w;
}

/// H^s norm of w = phi + i psi from its component spectra. The cross terms
/// cancel by Hermitian symmetry, so |what|^2 sums to |phi_hat|^2 + |psi_hat|^2
/// under any even spectral weight.
inline Real pair_hs_norm(const Grid& g, const SpectralPair& p, Real s) {
  if (s < 0.0) throw std::invalid_argument("hs_norm: s must be nonnegative");
  Real acc = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    acc += std::pow(1.0 + sq(g.xi(k)), s) * (std::norm(p.re_hat[k]) + std::norm(p.im_hat[k]));
  }
  return std::sqrt(acc / g.length());
}

/// L2 norm of the difference of two pairs (convergence metric of the
/// fixed-point iteration).
inline Real pair_l2_distance(const Grid& g, const SpectralPair& a, const SpectralPair& b) {
  Real acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    acc += std::norm(a.re_hat[k] - b.re_hat[k]) + std::norm(a.im_hat[k] - b.im_hat[k]);
  }
  return std::sqrt(acc / g.length());
}

/// Random Hermitian spectrum (the transform of a real field), band-limited to
/// |j| <= band_limit, zero mean. Used by property checks and probes.
inline std::vector<Complex> random_hermitian_spectrum(const Grid& g, long band_limit,
                                                      std::mt19937_64& rng) {
  std::normal_distribution<Real> gauss(0.0, 1.0);
  std::vector<Complex> spec(g.size(), Complex{0.0, 0.0});
  for (std::size_t k = 1; k < g.size() / 2; ++k) {
    if (std::abs(g.mode(k)) > band_limit) continue;
    const Complex z{gauss(rng), gauss(rng)};
    spec[k] = z;
    spec[g.size() - k] = std::conj(z);
  }
  return spec;
}

/// Random smooth band-limited complex field scaled to H^s norm target_norm.
inline std::vector<Complex> random_field(const Grid& g, long band_limit, Real target_norm, Real s,
                                         std::mt19937_64& rng) {
  SpectralPair p;
  p.re_hat = random_hermitian_spectrum(g, band_limit, rng);
  p.im_hat = random_hermitian_spectrum(g, band_limit, rng);
  std::vector<Complex> w = reconstruct(g, p);
  const Real n = hs_norm(g, w, s);
  if (n > 0.0) {
    const Real scale = target_norm / n;
    for (Complex& v : w) v *= scale;
  }
  return w;
}

}  // namespace breatherlab
