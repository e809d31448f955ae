#pragma once

#include <cstddef>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "breatherlab/breathers.hpp"
#include "breatherlab/checkpoint.hpp"
#include "breatherlab/grid.hpp"
#include "breatherlab/solver.hpp"
#include "breatherlab/symbols.hpp"
#include "breatherlab/types.hpp"

namespace breatherlab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat key = value configuration with dotted keys ("solver.dt = 1e-3"),
/// '#' comments, one entry per line. Every file carries schema_version = 1.
/// Reads are tracked so unknown (never consumed) keys can be rejected, which
/// catches typos like "solver.dtt".
class Config {
 public:
  static Config from_string(const std::string& text, const std::string& origin = "<string>") {
    Config cfg;
    cfg.origin_ = origin;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string value = trim(trimmed.substr(eq + 1));
      if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
      if (cfg.values_.count(key))
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
      cfg.values_.emplace(key, value);
    }
    return cfg;
  }

  static Config from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return from_string(ss.str(), path);
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(origin_ + ": missing required key '" + key + "'");
    used_.insert(key);
    return it->second;
  }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
  }

  Real get_real(const std::string& key) const { return parse_real(key, get_string(key)); }
  Real get_real(const std::string& key, Real fallback) const {
    return has(key) ? get_real(key) : fallback;
  }

  long long get_int(const std::string& key) const {
    const std::string v = get_string(key);
    char* end = nullptr;
    const long long out = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
      throw ConfigError(origin_ + ": key '" + key + "' is not an integer: '" + v + "'");
    return out;
  }
  long long get_int(const std::string& key, long long fallback) const {
    return has(key) ? get_int(key) : fallback;
  }

  bool get_bool(const std::string& key) const {
    const std::string v = get_string(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(origin_ + ": key '" + key + "' is not a boolean: '" + v + "'");
  }
  bool get_bool(const std::string& key, bool fallback) const {
    return has(key) ? get_bool(key) : fallback;
  }

  std::vector<Real> get_real_list(const std::string& key) const {
    const std::string v = get_string(key);
    std::vector<Real> out;
    std::string item;
    std::istringstream is(v);
    while (std::getline(is, item, ',')) {
      const std::string tv = trim(item);
      if (tv.empty()) continue;
      out.push_back(parse_real(key, tv));
    }
    if (out.empty()) throw ConfigError(origin_ + ": key '" + key + "' holds an empty list");
    return out;
  }

  /// Fails when any key was never consumed by a getter: unknown keys are
  /// config errors rather than silent no-ops.
  void require_all_consumed() const {
    std::string leftover;
    for (const auto& [key, value] : values_) {
      if (!used_.count(key)) leftover += (leftover.empty() ? "" : ", ") + key;
    }
    if (!leftover.empty()) throw ConfigError(origin_ + ": unknown config keys: " + leftover);
  }

  const std::string& origin() const { return origin_; }

 private:
  static std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
  }

  Real parse_real(const std::string& key, const std::string& v) const {
    char* end = nullptr;
    const Real out = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
      throw ConfigError(origin_ + ": key '" + key + "' is not a number: '" + v + "'");
    return out;
  }

  std::string origin_;
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

/// Initial-datum specification: a breather offset, a single Fourier mode, a
/// checkpoint file, or a sum of such terms.
struct InitSpec {
  std::string kind = "stokes";
  BreatherSpec breather;       // breather kinds
  Real k = 1.0;                // single_mode frequency (must be 2 pi j / L)
  Real amplitude = 1e-8;       // single_mode L-infinity amplitude
  bool aligned = true;         // single_mode: align with the growing eigenvector
  std::string path;            // checkpoint file
  std::vector<InitSpec> terms; // superposition components
};

struct OutputOptions {
  bool write_fields = false;      // frames.bin stream of snapshots
  bool write_checkpoint = true;   // final state checkpoint
  std::string reference = "auto"; // auto | none: compare against the exact offset
};

struct ExperimentConfig {
  Real L = 80.0;
  std::size_t N = 2048;
  SolverOptions solver;
  Real t_start = 0.0;
  Real t_end = 1.0;
  InitSpec init;
  OutputOptions output;

  Grid grid() const { return Grid(L, N); }
};

namespace detail {

inline BreatherKind breather_kind_from_string(const std::string& kind) {
  if (kind == "stokes") return BreatherKind::stokes;
  if (kind == "plane_wave") return BreatherKind::plane_wave;
  if (kind == "peregrine") return BreatherKind::peregrine;
  if (kind == "kuznetsov_ma") return BreatherKind::kuznetsov_ma;
  if (kind == "akhmediev") return BreatherKind::akhmediev;
  throw ConfigError("unknown breather kind: " + kind);
}

inline bool is_breather_kind(const std::string& kind) {
  return kind == "stokes" || kind == "plane_wave" || kind == "peregrine" ||
         kind == "kuznetsov_ma" || kind == "akhmediev";
}

inline InitSpec parse_init_spec(const Config& cfg, const std::string& prefix, bool allow_compound) {
  InitSpec init;
  init.kind = cfg.get_string(prefix + "kind", "stokes");
  if (is_breather_kind(init.kind)) {
    init.breather.kind = breather_kind_from_string(init.kind);
    init.breather.a = cfg.get_real(prefix + "a", init.breather.a);
    init.breather.c = cfg.get_real(prefix + "c", init.breather.c);
    init.breather.v = cfg.get_real(prefix + "v", init.breather.v);
    init.breather.gamma = cfg.get_real(prefix + "gamma", init.breather.gamma);
    init.breather.x0 = cfg.get_real(prefix + "x0", 0.0);
    init.breather.t0 = cfg.get_real(prefix + "t0", 0.0);
    try {
      init.breather.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string(e.what()) + " (key prefix '" + prefix + "')");
    }
  } else if (init.kind == "single_mode") {
    init.k = cfg.get_real(prefix + "k");
    init.amplitude = cfg.get_real(prefix + "amplitude", 1e-8);
    init.aligned = cfg.get_bool(prefix + "aligned", true);
  } else if (init.kind == "checkpoint") {
    if (!allow_compound) throw ConfigError("checkpoint init not allowed inside a superposition");
    init.path = cfg.get_string(prefix + "path");
  } else if (init.kind == "superposition") {
    if (!allow_compound) throw ConfigError("nested superposition is not allowed");
    const long long terms = cfg.get_int(prefix + "terms");
    if (terms < 1 || terms > 16) throw ConfigError("superposition needs 1..16 terms");
    for (long long i = 1; i <= terms; ++i) {
      init.terms.push_back(
          parse_init_spec(cfg, prefix + "term" + std::to_string(i) + ".", false));
    }
  } else {
    throw ConfigError("unknown init kind: " + init.kind);
  }
  return init;
}

}  // namespace detail

/// Enforces the mandatory schema_version key (always 1 for this format).
inline void require_schema_version(const Config& cfg) {
  const long long schema = cfg.get_int("schema_version");
  if (schema != 1) throw ConfigError("unsupported schema_version " + std::to_string(schema));
}

inline SolverOptions parse_solver_options(const Config& cfg) {
  SolverOptions opt;
  try {
    opt.scheme = scheme_from_string(cfg.get_string("solver.scheme", "picard_duhamel"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  opt.dt = cfg.get_real("solver.dt", opt.dt);
  opt.s = cfg.get_real("solver.s", opt.s);
  opt.picard_tol = cfg.get_real("solver.picard_tol", opt.picard_tol);
  opt.picard_max_iters =
      static_cast<int>(cfg.get_int("solver.picard_max_iters", opt.picard_max_iters));
  opt.blowup_threshold = cfg.get_real("solver.blowup_threshold", opt.blowup_threshold);
  opt.snapshot_dt = cfg.get_real("solver.snapshot_dt", opt.snapshot_dt);
  opt.linear_only = cfg.get_bool("solver.linear", false);
  opt.project_mean = cfg.get_bool("solver.project_mean", false);
  try {
    opt.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return opt;
}

inline Grid parse_grid(const Config& cfg, Real default_L = 80.0, long long default_N = 2048) {
  const Real L = cfg.get_real("grid.L", default_L);
  const long long n = cfg.get_int("grid.N", default_N);
  if (n < 2 || n % 2 != 0) throw ConfigError("grid.N must be a positive even integer");
  if (!(L > 0.0)) throw ConfigError("grid.L must be positive");
  return Grid(L, static_cast<std::size_t>(n));
}

/// Consumes the shared experiment keys (grid.*, solver.*, time.*, init.*,
/// output.*) plus the mandatory schema_version. Experiment-specific sections
/// are consumed by the individual commands before require_all_consumed runs.
inline ExperimentConfig parse_experiment_config(const Config& cfg) {
  require_schema_version(cfg);

  ExperimentConfig ec;
  const Grid g = parse_grid(cfg, ec.L, static_cast<long long>(ec.N));
  ec.L = g.length();
  ec.N = g.size();

  ec.solver = parse_solver_options(cfg);

  ec.t_start = cfg.get_real("time.start", 0.0);
  ec.t_end = cfg.get_real("time.end", 1.0);

  ec.init = detail::parse_init_spec(cfg, "init.", true);

  ec.output.write_fields = cfg.get_bool("output.fields", false);
  ec.output.write_checkpoint = cfg.get_bool("output.checkpoint", true);
  ec.output.reference = cfg.get_string("output.reference", "auto");
  if (ec.output.reference != "auto" && ec.output.reference != "none")
    throw ConfigError("output.reference must be auto or none");
  return ec;
}

/// Nearest representable grid frequency to k (k must equal 2 pi j / L).
inline Real nearest_grid_frequency(const Grid& g, Real k) {
  const Real j = std::round(k / g.dxi());
  return g.dxi() * j;
}

/// Initial offset samples for an InitSpec at the given start time.
inline std::vector<Complex> build_initial_offset(const Grid& g, const InitSpec& init, Real t_start) {
  if (detail::is_breather_kind(init.kind)) {
    return sample_offset(init.breather, g, t_start);
  }
  if (init.kind == "single_mode") {
    const Real snapped = nearest_grid_frequency(g, init.k);
    if (std::abs(snapped - init.k) > 1e-9 * std::max(1.0, std::abs(init.k))) {
      std::ostringstream msg;
      msg << "single_mode k = " << init.k << " is not representable on L = " << g.length()
          << "; nearest representable k = " << snapped;
      throw ConfigError(msg.str());
    }
    std::vector<Complex> w(g.size());
    const Real lambda = growth_rate(init.k);
    // Aligned data follows the growing eigenvector (phi, psi) ~ (k^2, lambda)
    // of the low-band mode, so the amplitude series is a clean exponential
    // from t = 0. Unaligned (or high-band) data excites phi only.
    Complex dir{1.0, 0.0};
    if (init.aligned && lambda > 0.0) {
      dir = Complex{sq(init.k), lambda};
      dir /= std::abs(dir);
    }
    for (std::size_t m = 0; m < g.size(); ++m) {
      w[m] = init.amplitude * dir * std::cos(init.k * g.x(m));
    }
    return w;
  }
  if (init.kind == "checkpoint") {
    const Checkpoint ck = read_checkpoint(init.path);
    if (ck.L != g.length() || ck.N != g.size())
      throw ConfigError("checkpoint grid (L=" + std::to_string(ck.L) + ", N=" +
                        std::to_string(ck.N) + ") does not match configured grid");
    return ck.w;
  }
  if (init.kind == "superposition") {
    std::vector<Complex> w(g.size(), Complex{0.0, 0.0});
    for (const InitSpec& term : init.terms) {
      const std::vector<Complex> part = build_initial_offset(g, term, t_start);
      for (std::size_t m = 0; m < g.size(); ++m) w[m] += part[m];
    }
    return w;
  }
  throw ConfigError("unknown init kind: " + init.kind);
}

/// The exact reference offset for error columns, when the init spec is a
/// single breather and output.reference is auto.
inline bool has_exact_reference(const ExperimentConfig& ec) {
  return ec.output.reference == "auto" && detail::is_breather_kind(ec.init.kind);
}

inline std::vector<Complex> reference_offset(const ExperimentConfig& ec, const Grid& g, Real t) {
  return sample_offset(ec.init.breather, g, t);
}

}  // namespace breatherlab
