#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "breatherlab/grid.hpp"
#include "breatherlab/types.hpp"

namespace breatherlab {

/// Binary state snapshot. Layout (all little-endian):
///   magic "BLABCKPT" | version u32 | scheme char[16] (NUL padded) |
///   L f64 | N u64 | t f64 | s f64 | N * (Re f64, Im f64)
/// Floats are stored by bit pattern, so round trips are bit-exact.
inline constexpr char kCheckpointMagic[8] = {'B', 'L', 'A', 'B', 'C', 'K', 'P', 'T'};
inline constexpr char kFramesMagic[8] = {'B', 'L', 'A', 'B', 'F', 'R', 'M', 'S'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 4);
}

inline void put_u64(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 8);
}

inline void put_f64(std::ostream& os, Real v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }

inline std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

inline std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

inline Real get_f64(std::istream& is) { return std::bit_cast<Real>(get_u64(is)); }

}  // namespace detail

struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  std::string scheme;
  Real L = 0.0;
  std::uint64_t N = 0;
  Real t = 0.0;
  Real s = 1.0;
  std::vector<Complex> w;

  Grid grid() const { return Grid(L, static_cast<std::size_t>(N)); }
};

inline void write_checkpoint(const std::string& path, const Grid& g, Real t, Real s,
                             const std::string& scheme, const std::vector<Complex>& w) {
  if (w.size() != g.size()) throw std::invalid_argument("write_checkpoint: size mismatch");
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("write_checkpoint: cannot open " + path);
  os.write(kCheckpointMagic, 8);
  detail::put_u32(os, kCheckpointVersion);
  char scheme_buf[16] = {};
  std::strncpy(scheme_buf, scheme.c_str(), sizeof scheme_buf - 1);
  os.write(scheme_buf, sizeof scheme_buf);
  detail::put_f64(os, g.length());
  detail::put_u64(os, g.size());
  detail::put_f64(os, t);
  detail::put_f64(os, s);
  for (const Complex& v : w) {
    detail::put_f64(os, v.real());
    detail::put_f64(os, v.imag());
  }
  if (!os) throw std::runtime_error("write_checkpoint: write failed for " + path);
}

inline Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_checkpoint: cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw std::runtime_error("read_checkpoint: bad magic in " + path);
  Checkpoint ck;
  ck.version = detail::get_u32(is);
  if (ck.version != kCheckpointVersion)
    throw std::runtime_error("read_checkpoint: unsupported version " + std::to_string(ck.version));
  char scheme_buf[17] = {};
  is.read(scheme_buf, 16);
  ck.scheme = scheme_buf;
  ck.L = detail::get_f64(is);
  ck.N = detail::get_u64(is);
  ck.t = detail::get_f64(is);
  ck.s = detail::get_f64(is);
  if (!is || ck.N == 0 || ck.N % 2 != 0 || !(ck.L > 0.0))
    throw std::runtime_error("read_checkpoint: corrupt header in " + path);
  ck.w.resize(static_cast<std::size_t>(ck.N));
  for (auto& v : ck.w) {
    const Real re = detail::get_f64(is);
    const Real im = detail::get_f64(is);
    v = Complex{re, im};
  }
  if (!is) throw std::runtime_error("read_checkpoint: truncated data in " + path);
  return ck;
}

/// Streamed sequence of physical-space frames sharing one grid; the heat-map
/// renderer consumes this. Layout: magic | version u32 | L f64 | N u64, then
/// per frame t f64 + N * (Re, Im) f64.
class FrameWriter {
 public:
  FrameWriter(const std::string& path, const Grid& g) : os_(path, std::ios::binary | std::ios::trunc), n_(g.size()) {
    if (!os_) throw std::runtime_error("FrameWriter: cannot open " + path);
    os_.write(kFramesMagic, 8);
    detail::put_u32(os_, kCheckpointVersion);
    detail::put_f64(os_, g.length());
    detail::put_u64(os_, g.size());
  }

  void append(Real t, const std::vector<Complex>& w) {
    if (w.size() != n_) throw std::invalid_argument("FrameWriter: size mismatch");
    detail::put_f64(os_, t);
    for (const Complex& v : w) {
      detail::put_f64(os_, v.real());
      detail::put_f64(os_, v.imag());
    }
    if (!os_) throw std::runtime_error("FrameWriter: write failed");
  }

 private:
  std::ofstream os_;
  std::size_t n_;
};

struct FrameSet {
  Real L = 0.0;
  std::uint64_t N = 0;
  std::vector<Real> times;
  std::vector<std::vector<Complex>> frames;

  Grid grid() const { return Grid(L, static_cast<std::size_t>(N)); }
};

inline FrameSet read_frames(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_frames: cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kFramesMagic, 8) != 0)
    throw std::runtime_error("read_frames: bad magic in " + path);
  const std::uint32_t version = detail::get_u32(is);
  if (version != kCheckpointVersion)
    throw std::runtime_error("read_frames: unsupported version " + std::to_string(version));
  FrameSet fs;
  fs.L = detail::get_f64(is);
  fs.N = detail::get_u64(is);
  if (!is || fs.N == 0 || !(fs.L > 0.0)) throw std::runtime_error("read_frames: corrupt header in " + path);
  while (true) {
    const Real t = detail::get_f64(is);
    if (!is) break;  // clean EOF boundary
    std::vector<Complex> w(static_cast<std::size_t>(fs.N));
    for (auto& v : w) {
      const Real re = detail::get_f64(is);
      const Real im = detail::get_f64(is);
      v = Complex{re, im};
    }
    if (!is) throw std::runtime_error("read_frames: truncated frame in " + path);
    fs.times.push_back(t);
    fs.frames.push_back(std::move(w));
  }
  return fs;
}

}  // namespace breatherlab
