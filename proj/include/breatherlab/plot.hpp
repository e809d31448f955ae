#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "breatherlab/checkpoint.hpp"
#include "breatherlab/grid.hpp"
#include "breatherlab/symbols.hpp"
#include "breatherlab/types.hpp"

namespace breatherlab {

/// 8-bit RGB raster written as binary PPM (P6). All drawing is integer
/// arithmetic on rounded coordinates, so identical inputs give identical
/// bytes.
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

  Image(std::size_t w, std::size_t h, std::uint8_t fill = 255)
      : width(w), height(h), rgb(3 * w * h, fill) {}

  void set(long x, long y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    if (x < 0 || y < 0 || x >= static_cast<long>(width) || y >= static_cast<long>(height)) return;
    const std::size_t at = 3 * (static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x));
    rgb[at] = r;
    rgb[at + 1] = g;
    rgb[at + 2] = b;
  }

  /// Bresenham segment.
  void line(long x0, long y0, long x1, long y1, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    const long dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    const long dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    long err = dx + dy;
    while (true) {
      set(x0, y0, r, g, b);
      if (x0 == x1 && y0 == y1) break;
      const long e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x0 += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y0 += sy;
      }
    }
  }

  void marker(long x, long y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    for (long d = -2; d <= 2; ++d) {
      set(x + d, y, r, g, b);
      set(x, y + d, r, g, b);
    }
  }
};

inline void write_ppm(const Image& img, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open image file " + path);
  os << "P6\n" << img.width << " " << img.height << "\n255\n";
  os.write(reinterpret_cast<const char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
  if (!os) throw std::runtime_error("failed writing image file " + path);
}

namespace detail {

/// Dark-blue -> cyan -> yellow -> white ramp on [0, 1].
inline void colormap(Real v, std::uint8_t& r, std::uint8_t& g, std::uint8_t& b) {
  v = std::clamp(v, 0.0, 1.0);
  const auto lerp = [](Real a, Real c, Real f) { return a + (c - a) * f; };
  Real rr, gg, bb;
  if (v < 1.0 / 3.0) {
    const Real f = 3.0 * v;
    rr = lerp(13, 32, f);
    gg = lerp(8, 148, f);
    bb = lerp(84, 196, f);
  } else if (v < 2.0 / 3.0) {
    const Real f = 3.0 * v - 1.0;
    rr = lerp(32, 253, f);
    gg = lerp(148, 231, f);
    bb = lerp(196, 55, f);
  } else {
    const Real f = 3.0 * v - 2.0;
    rr = lerp(253, 255, f);
    gg = lerp(231, 255, f);
    bb = lerp(55, 240, f);
  }
  r = static_cast<std::uint8_t>(std::lround(rr));
  g = static_cast<std::uint8_t>(std::lround(gg));
  b = static_cast<std::uint8_t>(std::lround(bb));
}

}  // namespace detail

/// Parsed CSV: header names plus numeric columns (non-numeric cells = NaN).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<Real>> columns;  // per header entry
  std::size_t rows = 0;

  long column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<long>(i);
    return -1;
  }
};

inline CsvTable read_csv_table(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open CSV file " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty CSV file " + path);
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) table.header.push_back(cell);
  }
  if (table.header.empty()) throw std::runtime_error("CSV header missing in " + path);
  table.columns.assign(table.header.size(), {});
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ls, cell, ',') && col < table.header.size()) {
      char* end = nullptr;
      const Real v = std::strtod(cell.c_str(), &end);
      table.columns[col].push_back(end != cell.c_str() && *end == '\0'
                                       ? v
                                       : std::numeric_limits<Real>::quiet_NaN());
      ++col;
    }
    while (col < table.header.size()) {
      table.columns[col].push_back(std::numeric_limits<Real>::quiet_NaN());
      ++col;
    }
    ++table.rows;
  }
  return table;
}

struct HeatmapInfo {
  Real max_abs_u = 0.0;
  Real t_at_max = 0.0;
  Real x_at_max = 0.0;
};

/// |u| = |1 + w| over the (t, x) plane from a frame stream. The maximum and
/// its location are found on the full data before any downsampling.
inline HeatmapInfo render_heatmap(const FrameSet& frames, const std::string& path) {
  if (frames.frames.empty()) throw std::runtime_error("frame set is empty; nothing to plot");
  const Grid g = frames.grid();

  HeatmapInfo info;
  for (std::size_t fi = 0; fi < frames.frames.size(); ++fi) {
    const auto& w = frames.frames[fi];
    for (std::size_t m = 0; m < w.size(); ++m) {
      const Real a = std::abs(Complex{1.0, 0.0} + w[m]);
      if (a > info.max_abs_u) {
        info.max_abs_u = a;
        info.t_at_max = frames.times[fi];
        info.x_at_max = g.x(m);
      }
    }
  }
  const Real vmax = info.max_abs_u > 0.0 ? info.max_abs_u : 1.0;

  const std::size_t width = std::max<std::size_t>(2, std::min<std::size_t>(frames.frames.size(), 1024));
  const std::size_t height = std::max<std::size_t>(2, std::min<std::size_t>(g.size(), 512));
  Image img(width, height);
  for (std::size_t px = 0; px < width; ++px) {
    const std::size_t fi = px * frames.frames.size() / width;
    const auto& w = frames.frames[fi];
    for (std::size_t py = 0; py < height; ++py) {
      const std::size_t m = py * g.size() / height;
      const Real a = std::abs(Complex{1.0, 0.0} + w[m]);
      std::uint8_t r, gg, b;
      detail::colormap(a / vmax, r, gg, b);
      // Row 0 at the top = largest x, so the vertical axis reads upward.
      img.set(static_cast<long>(px), static_cast<long>(height - 1 - py), r, gg, b);
    }
  }
  write_ppm(img, path);
  return info;
}

namespace detail {

struct Axes {
  long x0, y0, x1, y1;  // pixel rectangle of the data area
  Real umin, umax, vmin, vmax;

  long px(Real u) const {
    if (!(umax > umin)) return x0;
    return x0 + static_cast<long>(std::lround((u - umin) / (umax - umin) * static_cast<Real>(x1 - x0)));
  }
  long py(Real v) const {
    if (!(vmax > vmin)) return y1;
    return y1 - static_cast<long>(std::lround((v - vmin) / (vmax - vmin) * static_cast<Real>(y1 - y0)));
  }
};

inline void draw_frame(Image& img, const Axes& ax) {
  img.line(ax.x0, ax.y0, ax.x1, ax.y0, 0, 0, 0);
  img.line(ax.x0, ax.y1, ax.x1, ax.y1, 0, 0, 0);
  img.line(ax.x0, ax.y0, ax.x0, ax.y1, 0, 0, 0);
  img.line(ax.x1, ax.y0, ax.x1, ax.y1, 0, 0, 0);
}

inline void polyline(Image& img, const Axes& ax, const std::vector<Real>& u,
                     const std::vector<Real>& v, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  bool have_prev = false;
  long px0 = 0, py0 = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!std::isfinite(u[i]) || !std::isfinite(v[i])) {
      have_prev = false;
      continue;
    }
    const long x = ax.px(u[i]), y = ax.py(v[i]);
    if (have_prev) img.line(px0, py0, x, y, r, g, b);
    px0 = x;
    py0 = y;
    have_prev = true;
  }
}

inline void finite_minmax(const std::vector<Real>& v, Real& lo, Real& hi) {
  for (Real x : v) {
    if (!std::isfinite(x)) continue;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
}

}  // namespace detail

/// Norm traces from a trajectory CSV: H^s norm, sup norm, and (when present)
/// the error against the exact reference, over time.
inline void render_traces(const CsvTable& csv, const std::string& path) {
  if (csv.rows == 0) throw std::runtime_error("CSV has no data rows; nothing to plot");
  const long tc = csv.column("t");
  const long hc = csv.column("hs_norm");
  const long lc = csv.column("linf");
  if (tc < 0 || hc < 0 || lc < 0)
    throw std::runtime_error("CSV schema mismatch: need t, hs_norm, linf columns");
  const long ec = csv.column("err_vs_exact");

  const auto& t = csv.columns[static_cast<std::size_t>(tc)];
  Real lo = std::numeric_limits<Real>::infinity(), hi = -lo;
  detail::finite_minmax(csv.columns[static_cast<std::size_t>(hc)], lo, hi);
  detail::finite_minmax(csv.columns[static_cast<std::size_t>(lc)], lo, hi);
  if (ec >= 0) detail::finite_minmax(csv.columns[static_cast<std::size_t>(ec)], lo, hi);
  if (!(hi >= lo)) throw std::runtime_error("CSV columns hold no finite values");
  if (hi == lo) hi = lo + 1.0;

  Image img(900, 600);
  detail::Axes ax{60, 20, 880, 580, t.front(), t.back(), lo, hi};
  if (!(ax.umax > ax.umin)) ax.umax = ax.umin + 1.0;
  detail::draw_frame(img, ax);
  detail::polyline(img, ax, t, csv.columns[static_cast<std::size_t>(hc)], 30, 60, 200);
  detail::polyline(img, ax, t, csv.columns[static_cast<std::size_t>(lc)], 200, 60, 30);
  if (ec >= 0) detail::polyline(img, ax, t, csv.columns[static_cast<std::size_t>(ec)], 20, 140, 60);
  write_ppm(img, path);
}

/// Growth-scan overlay: fitted rates/frequencies as markers on top of the
/// dispersion law |k| sqrt(|2 - k^2|), drawn for both bands.
inline void render_growth_overlay(const CsvTable& csv, const std::string& path) {
  if (csv.rows == 0) throw std::runtime_error("CSV has no data rows; nothing to plot");
  const long kc = csv.column("k");
  const long fc = csv.column("fitted");
  const long thc = csv.column("theory");
  if (kc < 0 || fc < 0 || thc < 0)
    throw std::runtime_error("CSV schema mismatch: need k, fitted, theory columns");

  const auto& ks = csv.columns[static_cast<std::size_t>(kc)];
  const auto& fitted = csv.columns[static_cast<std::size_t>(fc)];
  Real kmax = 0.0, vmax = 1.0;
  for (Real k : ks)
    if (std::isfinite(k)) kmax = std::max(kmax, k);
  for (Real v : fitted)
    if (std::isfinite(v)) vmax = std::max(vmax, v);
  kmax = std::max(kmax * 1.08, 1.0);
  vmax *= 1.1;

  Image img(900, 600);
  detail::Axes ax{60, 20, 880, 580, 0.0, kmax, 0.0, vmax};
  detail::draw_frame(img, ax);

  // Theory curves: growth on |k| < sqrt(2) (blue), oscillation beyond (red).
  std::vector<Real> ku, vu;
  for (int i = 0; i <= 600; ++i) {
    const Real k = kmax * static_cast<Real>(i) / 600.0;
    ku.push_back(k);
    vu.push_back(k < kSqrt2 ? growth_rate(k) : std::numeric_limits<Real>::quiet_NaN());
  }
  detail::polyline(img, ax, ku, vu, 30, 60, 200);
  for (int i = 0; i <= 600; ++i) {
    const Real k = kmax * static_cast<Real>(i) / 600.0;
    vu[static_cast<std::size_t>(i)] =
        k > kSqrt2 ? oscillation_frequency(k) : std::numeric_limits<Real>::quiet_NaN();
  }
  detail::polyline(img, ax, ku, vu, 200, 60, 30);

  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (!std::isfinite(ks[i]) || !std::isfinite(fitted[i])) continue;
    img.marker(ax.px(ks[i]), ax.py(fitted[i]), 0, 0, 0);
  }
  write_ppm(img, path);
}

/// Dispatch for the plot subcommand. kind: heatmap | trace | growth.
/// Input problems throw before the output file is created.
inline HeatmapInfo render_plot(const std::string& kind, const std::string& input,
                               const std::string& output) {
  if (kind == "heatmap") {
    return render_heatmap(read_frames(input), output);
  }
  if (kind == "trace") {
    render_traces(read_csv_table(input), output);
    return {};
  }
  if (kind == "growth") {
    render_growth_overlay(read_csv_table(input), output);
    return {};
  }
  throw std::invalid_argument("unknown plot kind: " + kind + " (expected heatmap | trace | growth)");
}

}  // namespace breatherlab
