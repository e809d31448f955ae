#pragma once

#include <fftw3.h>

#include <cstddef>
#include <mutex>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "breatherlab/grid.hpp"
#include "breatherlab/types.hpp"

namespace breatherlab {

namespace detail {

// FFTW plan pair for one transform size. Plans are created with
// FFTW_ESTIMATE (deterministic, no measurement noise in plan choice) and
// FFTW_UNALIGNED so one plan serves every properly sized buffer via the
// new-array execute interface. Plan creation is serialized (FFTW planning is
// not thread safe); execution on distinct buffers is.
struct FftwPlans {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

inline FftwPlans fftw_plans_for(std::size_t n) {
  static std::mutex mtx;
  static std::unordered_map<std::size_t, FftwPlans> cache;

  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  std::vector<Complex> probe(n);
  auto* p = reinterpret_cast<fftw_complex*>(probe.data());
  FftwPlans plans;
  plans.fwd = fftw_plan_dft_1d(static_cast<int>(n), p, p, FFTW_FORWARD,
                               FFTW_ESTIMATE | FFTW_UNALIGNED);
  plans.bwd = fftw_plan_dft_1d(static_cast<int>(n), p, p, FFTW_BACKWARD,
                               FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!plans.fwd || !plans.bwd) throw std::runtime_error("fftw plan creation failed");
  cache.emplace(n, plans);
  return plans;
}

// Unnormalized in-place DFT: out_k = sum_m in_m e^{-2 pi i k m / N}.
inline void dft_inplace(std::vector<Complex>& v) {
  auto* p = reinterpret_cast<fftw_complex*>(v.data());
  fftw_execute_dft(fftw_plans_for(v.size()).fwd, p, p);
}

// Unnormalized in-place inverse DFT: out_m = sum_k in_k e^{+2 pi i k m / N}.
inline void idft_inplace(std::vector<Complex>& v) {
  auto* p = reinterpret_cast<fftw_complex*>(v.data());
  fftw_execute_dft(fftw_plans_for(v.size()).bwd, p, p);
}

}  // namespace detail

/// In-place forward transform to continuum normalization:
///   what_k = dx * (-1)^k * DFT_k[w]  ~=  Int w(x) e^{-i xi_k x} dx.
///
/// The (-1)^k factor accounts for the grid starting at x = -L/2 rather than 0
/// (signs of j and k agree mod 2 for even N). A pure mode e^{i xi_j x} lands
/// in slot j with coefficient exactly L.
inline void forward_transform_inplace(const Grid& g, std::vector<Complex>& w) {
  if (w.size() != g.size()) throw std::invalid_argument("forward_transform: size mismatch");
  detail::dft_inplace(w);
  const Real dx = g.dx();
  for (std::size_t k = 0; k < w.size(); ++k) w[k] *= (k % 2 == 0 ? dx : -dx);
}

/// In-place inverse of forward_transform_inplace:
///   w_m = (1/L) * IDFT_m[(-1)^k what_k].
inline void backward_transform_inplace(const Grid& g, std::vector<Complex>& what) {
  if (what.size() != g.size()) throw std::invalid_argument("backward_transform: size mismatch");
  const Real inv = 1.0 / g.length();
  for (std::size_t k = 0; k < what.size(); ++k) what[k] *= (k % 2 == 0 ? inv : -inv);
  detail::idft_inplace(what);
}

inline std::vector<Complex> forward_transform(const Grid& g, std::vector<Complex> w) {
  forward_transform_inplace(g, w);
  return w;
}

inline std::vector<Complex> backward_transform(const Grid& g, std::vector<Complex> what) {
  backward_transform_inplace(g, what);
  return what;
}

}  // namespace breatherlab
