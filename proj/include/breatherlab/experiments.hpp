#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "breatherlab/breathers.hpp"
#include "breatherlab/checkpoint.hpp"
#include "breatherlab/config.hpp"
#include "breatherlab/diagnostics.hpp"
#include "breatherlab/field.hpp"
#include "breatherlab/grid.hpp"
#include "breatherlab/nonlinearity.hpp"
#include "breatherlab/propagator.hpp"
#include "breatherlab/solver.hpp"
#include "breatherlab/symbols.hpp"
#include "breatherlab/types.hpp"

namespace breatherlab {

// Exit-code contract shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 1;  // check-invariants found a failing property
inline constexpr int kExitBlowup = 2;
inline constexpr int kExitConfig = 3;
inline constexpr int kExitPicard = 4;

/// Options shared by all subcommands (set from CLI flags).
struct GlobalOptions {
  std::string out_dir = ".";
  int workers = 0;  // 0 = resolve from BREATHERLAB_WORKERS, then hardware
  std::uint64_t seed = 0x5eedu;
  bool force_linear = false;       // --linear: drop the source term
  bool force_project_mean = false; // --project-mean: pin the spatial mean of Re w
};

inline int resolve_worker_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("BREATHERLAB_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Runs fn(0..n-1) on a bounded pool. Each index must write only its own
/// result slot, so the merged output is identical for any worker count. The
/// first exception is rethrown after all threads join.
template <typename Fn>
inline void parallel_for_indexed(std::size_t n, int workers, const Fn& fn) {
  if (n == 0) return;
  const int nw = std::max(1, std::min(workers, static_cast<int>(n)));
  if (nw == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nw));
  for (int t = 0; t < nw; ++t) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace detail {

inline std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

inline void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
}

inline std::ofstream open_out_file(const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open output file " + path);
  return os;
}

inline std::string fmt(const char* format, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, a);
  return buf;
}

inline void apply_overrides(SolverOptions& opt, const GlobalOptions& g) {
  if (g.force_linear) opt.linear_only = true;
  if (g.force_project_mean) opt.project_mean = true;
}

inline int exit_code_for(RunStatus status) {
  switch (status) {
    case RunStatus::completed: return kExitOk;
    case RunStatus::blowup_detected: return kExitBlowup;
    case RunStatus::picard_divergence: return kExitPicard;
  }
  return kExitOk;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// simulate: one trajectory -> trajectory.csv (+ frames.bin, checkpoint.bin)
// ---------------------------------------------------------------------------

inline int cmd_simulate(const Config& cfg, const GlobalOptions& opts, std::ostream& log) {
  ExperimentConfig ec = parse_experiment_config(cfg);
  detail::apply_overrides(ec.solver, opts);
  cfg.require_all_consumed();
  detail::ensure_out_dir(opts.out_dir);

  const Grid g = ec.grid();
  const std::vector<Complex> w0 = build_initial_offset(g, ec.init, ec.t_start);
  const SpectralPair p0 = decompose(g, w0);
  const bool with_reference = has_exact_reference(ec);

  std::vector<DiagnosticsRecord> records;
  std::unique_ptr<FrameWriter> frames;
  if (ec.output.write_fields)
    frames = std::make_unique<FrameWriter>(detail::join_path(opts.out_dir, "frames.bin"), g);

  const SnapshotSink sink = [&](Real t, const SpectralPair& state, const StepStats&) {
    const std::vector<Complex> w = reconstruct(g, state);
    std::vector<Complex> ref;
    if (with_reference) ref = reference_offset(ec, g, t);
    records.push_back(compute_record(g, w, t, ec.solver.s, ref));
    if (frames) frames->append(t, w);
  };

  const RunResult res = run(g, ec.solver, p0, ec.t_start, ec.t_end, sink);

  const std::string csv_path = detail::join_path(opts.out_dir, "trajectory.csv");
  auto csv = detail::open_out_file(csv_path);
  write_csv(csv, records);

  if (ec.output.write_checkpoint) {
    write_checkpoint(detail::join_path(opts.out_dir, "checkpoint.bin"), g, res.t_final,
                     ec.solver.s, to_string(ec.solver.scheme), reconstruct(g, res.state));
  }

  log << "simulate: " << to_string(res.status) << " at t = " << res.t_final << " after "
      << res.total_steps << " steps (max picard iters " << res.max_picard_iters
      << ", max residual " << detail::fmt("%.3g", res.max_picard_residual) << ")\n";
  if (!res.message.empty()) log << "  " << res.message << "\n";
  log << "  wrote " << csv_path << "\n";
  return detail::exit_code_for(res.status);
}

// ---------------------------------------------------------------------------
// growth-scan: per-mode linearized rates/frequencies vs the dispersion law
// ---------------------------------------------------------------------------

struct ScanRow {
  Real k = 0.0;
  std::string kind;  // "growth" | "oscillation"
  Real fitted = 0.0;
  Real theory = 0.0;
  Real abs_error = 0.0;
};

/// Fits one mode of a linear (or weakly nonlinear) run. Growth rates come
/// from the log-amplitude slope inside the window [1e-7, 1e-4] (field units);
/// oscillation frequencies from zero crossings of the cosine quadrature.
inline ScanRow scan_single_mode(const Grid& g, SolverOptions opt, Real k, Real amplitude,
                                Real horizon) {
  InitSpec init;
  init.kind = "single_mode";
  init.k = k;
  init.amplitude = amplitude;
  init.aligned = true;
  const SpectralPair p0 = decompose(g, build_initial_offset(g, init, 0.0));

  const long j = std::lround(k / g.dxi());
  const std::size_t slot = static_cast<std::size_t>(j) % g.size();
  const Real mode_scale = 2.0 / g.length();  // |w_hat_j| -> cosine amplitude

  std::vector<Real> times, amps, values;
  const SnapshotSink sink = [&](Real t, const SpectralPair& state, const StepStats&) {
    const Complex phi = state.re_hat[slot];
    times.push_back(t);
    amps.push_back(std::abs(phi) * mode_scale);
    values.push_back(phi.real());
  };
  const RunResult res = run(g, opt, p0, 0.0, horizon, sink);
  if (res.status != RunStatus::completed)
    throw std::runtime_error(std::string("growth-scan run failed: ") + to_string(res.status));

  ScanRow row;
  row.k = k;
  if (std::abs(k) < kSqrt2) {
    row.kind = "growth";
    row.theory = growth_rate(k);
    row.fitted = fit_growth_rate(times, amps);
  } else {
    row.kind = "oscillation";
    row.theory = oscillation_frequency(k);
    row.fitted = fit_oscillation_frequency(times, values);
  }
  row.abs_error = std::abs(row.fitted - row.theory);
  return row;
}

inline int cmd_growth_scan(const Config& cfg, const GlobalOptions& opts, std::ostream& log) {
  require_schema_version(cfg);
  const Grid g = parse_grid(cfg, 20.0 * kPi, 256);
  SolverOptions opt = parse_solver_options(cfg);
  if (!cfg.has("solver.linear")) opt.linear_only = true;  // scans default to the linear flow
  detail::apply_overrides(opt, opts);

  const std::vector<Real> k_list = cfg.get_real_list("scan.k_list");
  const Real amplitude = cfg.get_real("scan.amplitude", 1e-8);
  const Real horizon_override = cfg.get_real("scan.horizon", 0.0);
  cfg.require_all_consumed();
  detail::ensure_out_dir(opts.out_dir);

  // Reject non-representable modes up front, suggesting the closest one.
  for (Real k : k_list) {
    const Real snapped = nearest_grid_frequency(g, k);
    if (std::abs(snapped - k) > 1e-9 * std::max(1.0, std::abs(k))) {
      std::ostringstream msg;
      msg << "scan.k_list entry " << k << " is not representable on L = " << g.length()
          << "; nearest representable k = " << snapped;
      throw ConfigError(msg.str());
    }
  }

  std::vector<ScanRow> rows(k_list.size());
  const int workers = resolve_worker_count(opts.workers);
  parallel_for_indexed(k_list.size(), workers, [&](std::size_t i) {
    const Real k = k_list[i];
    Real horizon = horizon_override;
    if (horizon <= 0.0) {
      if (std::abs(k) < kSqrt2) {
        // Time for the amplitude to traverse the fit window plus margin.
        const Real lambda = growth_rate(k);
        horizon = (std::log(1e-4) - std::log(amplitude)) / lambda + 2.0 / lambda;
      } else {
        // Enough periods for a stable zero-crossing frequency estimate.
        horizon = std::max(10.0, 6.0 * 2.0 * kPi / oscillation_frequency(k));
      }
    }
    rows[i] = scan_single_mode(g, opt, k, amplitude, horizon);
  });

  const std::string csv_path = detail::join_path(opts.out_dir, "scan.csv");
  auto csv = detail::open_out_file(csv_path);
  csv << "k,kind,fitted,theory,abs_error\n";
  char buf[256];
  Real worst = 0.0;
  for (const ScanRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%s,%.17g,%.17g,%.17g\n", r.k, r.kind.c_str(), r.fitted,
                  r.theory, r.abs_error);
    csv << buf;
    worst = std::max(worst, r.abs_error);
    std::snprintf(buf, sizeof buf, "  k=%-8.4g %-12s fitted=%.10g theory=%.10g |err|=%.3g\n", r.k,
                  r.kind.c_str(), r.fitted, r.theory, r.abs_error);
    log << buf;
  }
  log << "growth-scan: " << rows.size() << " modes, max |err| = " << detail::fmt("%.3g", worst)
      << ", wrote " << csv_path << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// peregrine-instability: small data at t = -T arriving at the fixed profile
// ---------------------------------------------------------------------------

struct PeregrineLegReport {
  Real T = 0.0;
  std::string mode;  // "full" | "window"
  Real grid_L = 0.0;
  std::size_t grid_N = 0;
  Real init_l2 = 0.0;         // measured ||Q(-T)|| on the sampling box
  Real init_l2_theory = 0.0;  // closed form on the real line
  Real init_hs = 0.0;
  Real arrival_l2 = 0.0;         // ||w(0)|| after integration
  Real arrival_l2_theory = 0.0;  // ||Q(0)|| closed form (the fixed profile)
  Real dist_q0_hs = 0.0;         // shift-minimized H^s distance to Q(0)
  Real dist_zero_hs = 0.0;       // H^s distance to the zero offset (Stokes)
};

/// One leg of the arrival experiment. Full mode integrates [-T, 0] outright.
/// Window mode measures the initial norm by quadrature of the exact profile
/// on a long sampling box (the trajectory Q(t) is exact, so only the final
/// approach needs time stepping) and integrates [-window, 0].
inline PeregrineLegReport peregrine_leg(Real T, bool full, const SolverOptions& opt, Real s,
                                        Real dx_target, Real window_span, Real window_L) {
  BreatherSpec q;
  q.kind = BreatherKind::peregrine;

  PeregrineLegReport leg;
  leg.T = T;
  leg.mode = full ? "full" : "window";
  leg.init_l2_theory = std::sqrt(peregrine_l2_squared(-T));
  leg.arrival_l2_theory = std::sqrt(peregrine_l2_squared(0.0));

  // Box length for measuring ||Q(-T)||: the tail of |Q(t,x)|^2 ~ 1/x^4 makes
  // the truncated mass deficit ~ (T/A)^3 for half-box A >> T, so L = 16 T
  // keeps the norm within ~0.2%. Round up to a power-of-two multiple of dx.
  const auto box_for = [&](Real min_L) {
    std::size_t n = 2;
    while (static_cast<Real>(n) * dx_target < min_L) n *= 2;
    return Grid(static_cast<Real>(n) * dx_target, n);
  };

  const Grid sample_grid = box_for(std::max(16.0 * T, window_L));
  {
    const std::vector<Complex> w0 = sample_offset(q, sample_grid, -T);
    leg.init_l2 = l2_norm(sample_grid, w0);
    leg.init_hs = hs_norm(sample_grid, w0, s);
  }

  const Real t_begin = full ? -T : -window_span;
  const Grid g = full ? box_for(256.0 * T) : Grid(window_L, static_cast<std::size_t>(
                                                                std::llround(window_L / dx_target)));
  leg.grid_L = g.length();
  leg.grid_N = g.size();

  const SpectralPair p0 = decompose(g, sample_offset(q, g, t_begin));
  const RunResult res = run(g, opt, p0, t_begin, 0.0);
  if (res.status != RunStatus::completed)
    throw std::runtime_error(std::string("peregrine leg failed: ") + to_string(res.status));

  const std::vector<Complex> w_final = reconstruct(g, res.state);
  const std::vector<Complex> q0 = sample_offset(q, g, 0.0);
  leg.arrival_l2 = l2_norm(g, w_final);
  leg.dist_q0_hs = hs_distance_min_shift(g, w_final, q0, s).distance;
  leg.dist_zero_hs = hs_norm(g, w_final, s);
  return leg;
}

inline int cmd_peregrine_instability(const Config& cfg, const GlobalOptions& opts,
                                     std::ostream& log) {
  require_schema_version(cfg);
  SolverOptions opt = parse_solver_options(cfg);
  detail::apply_overrides(opt, opts);

  std::vector<Real> T_list{10.0, 50.0, 200.0};
  if (cfg.has("peregrine.T_list")) T_list = cfg.get_real_list("peregrine.T_list");
  const Real full_T_max = cfg.get_real("peregrine.full_T_max", 12.0);
  const Real window_span = cfg.get_real("peregrine.window_span", 3.0);
  const Real window_L = cfg.get_real("peregrine.window_L", 640.0);
  const Real dx_target = cfg.get_real("peregrine.dx", 80.0 / 2048.0);
  cfg.require_all_consumed();
  detail::ensure_out_dir(opts.out_dir);

  for (Real T : T_list)
    if (!(T > 0.0)) throw ConfigError("peregrine.T_list entries must be positive");

  std::vector<PeregrineLegReport> legs(T_list.size());
  const int workers = resolve_worker_count(opts.workers);
  parallel_for_indexed(T_list.size(), workers, [&](std::size_t i) {
    const Real T = T_list[i];
    legs[i] = peregrine_leg(T, T <= full_T_max, opt, opt.s, dx_target, window_span, window_L);
  });

  const std::string csv_path = detail::join_path(opts.out_dir, "peregrine.csv");
  auto csv = detail::open_out_file(csv_path);
  csv << "T,mode,grid_L,grid_N,init_l2,init_l2_theory,init_hs,arrival_l2,arrival_l2_theory,"
         "dist_q0_hs,dist_zero_hs\n";
  char buf[512];
  for (const PeregrineLegReport& r : legs) {
    std::snprintf(buf, sizeof buf, "%.17g,%s,%.17g,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  r.T, r.mode.c_str(), r.grid_L, r.grid_N, r.init_l2, r.init_l2_theory, r.init_hs,
                  r.arrival_l2, r.arrival_l2_theory, r.dist_q0_hs, r.dist_zero_hs);
    csv << buf;
    std::snprintf(buf, sizeof buf,
                  "  T=%-6.4g %-6s init |w|_L2 = %.6g (theory %.6g)  arrival |w|_L2 = %.6g "
                  "(fixed profile %.6g)  dist to Q(0) = %.3g\n",
                  r.T, r.mode.c_str(), r.init_l2, r.init_l2_theory, r.arrival_l2,
                  r.arrival_l2_theory, r.dist_q0_hs);
    log << buf;
  }
  log << "peregrine-instability: initial data shrinks like (1+4T^2)^(-1/4) while the arrival "
         "profile stays O(1); wrote "
      << csv_path << "\n";
  log << "  (T > " << full_T_max
      << " legs verify the initial norm by quadrature of the exact profile and integrate only "
         "the final window [-"
      << window_span << ", 0] - documented shortcut.)\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// km-instability: periodic orbit vs the same orbit plus a far small intruder
// ---------------------------------------------------------------------------

inline int cmd_km_instability(const Config& cfg, const GlobalOptions& opts, std::ostream& log) {
  require_schema_version(cfg);
  const Grid g = parse_grid(cfg);
  SolverOptions opt = parse_solver_options(cfg);
  detail::apply_overrides(opt, opts);

  const Real a = cfg.get_real("km.a", 1.0);
  const Real periods = cfg.get_real("km.periods", 1.0);
  const Real pert_internal_t = cfg.get_real("km.perturbation_internal_time", -20.0);
  const Real pert_x0 = cfg.get_real("km.perturbation_x0", g.length() / 4.0);
  const bool with_perturbation = cfg.get_bool("km.perturb", true);
  cfg.require_all_consumed();
  detail::ensure_out_dir(opts.out_dir);

  BreatherSpec km;
  km.kind = BreatherKind::kuznetsov_ma;
  km.a = a;
  try {
    km.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const Real horizon = periods * km_period(a);

  BreatherSpec intruder;
  intruder.kind = BreatherKind::peregrine;
  intruder.x0 = pert_x0;
  intruder.t0 = -pert_internal_t;  // at solver time 0 the intruder sits at its internal time

  const std::vector<Complex> km0 = sample_offset(km, g, 0.0);
  std::vector<Complex> pert0 = km0;
  if (with_perturbation) {
    const std::vector<Complex> q0 = sample_offset(intruder, g, 0.0);
    for (std::size_t m = 0; m < g.size(); ++m) pert0[m] += q0[m];
  }

  // Base run first, storing snapshots; then the perturbed run, diffing
  // against the stored states at the same snapshot instants.
  std::vector<Real> times;
  std::vector<SpectralPair> base_states;
  const RunResult base = run(g, opt, decompose(g, km0), 0.0, horizon,
                             [&](Real t, const SpectralPair& state, const StepStats&) {
                               times.push_back(t);
                               base_states.push_back(state);
                             });
  if (base.status != RunStatus::completed) {
    log << "km-instability: base run " << to_string(base.status) << "\n";
    return detail::exit_code_for(base.status);
  }

  std::size_t cursor = 0;
  std::vector<Real> separation(times.size(), 0.0);
  const RunResult pert = run(g, opt, decompose(g, pert0), 0.0, horizon,
                             [&](Real t, const SpectralPair& state, const StepStats&) {
                               if (cursor < times.size() && std::abs(times[cursor] - t) < 1e-12) {
                                 SpectralPair diff = state;
                                 for (std::size_t k = 0; k < diff.size(); ++k) {
                                   diff.re_hat[k] -= base_states[cursor].re_hat[k];
                                   diff.im_hat[k] -= base_states[cursor].im_hat[k];
                                 }
                                 separation[cursor] = pair_hs_norm(g, diff, opt.s);
                                 ++cursor;
                               }
                             });
  if (pert.status != RunStatus::completed) {
    log << "km-instability: perturbed run " << to_string(pert.status) << "\n";
    return detail::exit_code_for(pert.status);
  }

  // Control: the unperturbed orbit returns to its start after each period.
  const std::vector<Complex> km_final = reconstruct(g, base.state);
  std::vector<Complex> km_return_diff = km_final;
  for (std::size_t m = 0; m < g.size(); ++m) km_return_diff[m] -= km0[m];
  const Real return_err = l2_norm(g, km_return_diff);

  const Real sep0 = separation.empty() ? 0.0 : separation.front();
  const Real sep_final = separation.empty() ? 0.0 : separation.back();
  Real sep_max = 0.0;
  for (Real v : separation) sep_max = std::max(sep_max, v);

  const std::string csv_path = detail::join_path(opts.out_dir, "separation.csv");
  auto csv = detail::open_out_file(csv_path);
  csv << "t,separation_hs,ratio_vs_initial\n";
  char buf[256];
  for (std::size_t i = 0; i < times.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", times[i], separation[i],
                  sep0 > 0.0 ? separation[i] / sep0 : 0.0);
    csv << buf;
  }

  log << "km-instability (finite-box approximation of the separation mechanism):\n";
  std::snprintf(buf, sizeof buf,
                "  a=%.6g horizon=%.6g (one period = %.6g), intruder at x0=%.6g internal t=%.6g\n",
                a, horizon, km_period(a), pert_x0, pert_internal_t);
  log << buf;
  std::snprintf(buf, sizeof buf,
                "  separation H^s: initial %.6g -> final %.6g (ratio %.6g, max %.6g)\n", sep0,
                sep_final, sep0 > 0.0 ? sep_final / sep0 : 0.0, sep_max);
  log << buf;
  std::snprintf(buf, sizeof buf, "  control: base orbit return-to-start L2 error = %.3g\n",
                return_err);
  log << buf;
  log << "  wrote " << csv_path << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// check-invariants: the full property suite, exit nonzero on any violation
// ---------------------------------------------------------------------------

inline int cmd_check_invariants(const Config& cfg, const GlobalOptions& opts, std::ostream& log) {
  require_schema_version(cfg);
  const Grid g = parse_grid(cfg, 80.0, 1024);
  const auto samples = static_cast<std::size_t>(cfg.get_int("invariants.samples", 100000));
  const Real t_max = cfg.get_real("invariants.t_max", 10.0);
  const auto trials = static_cast<std::size_t>(cfg.get_int("invariants.trials", 200));
  cfg.require_all_consumed();
  (void)opts;

  bool all_ok = true;
  const auto verdict = [&](bool ok, const std::string& name, const std::string& detail) {
    all_ok = all_ok && ok;
    log << (ok ? "  ok      " : "  VIOLATED") << "  " << name;
    if (!detail.empty()) log << "  (" << detail << ")";
    log << "\n";
  };

  log << "check-invariants on L = " << g.length() << ", N = " << g.size() << "\n";

  // 1. Wronskian of the kernel pair. Sampled where cosh^2 stays ~< 1e4 so an
  //    absolute 1e-12 comparison is meaningful in double precision.
  {
    std::mt19937_64 rng(0x5eedu);
    std::uniform_real_distribution<Real> xi_dist(0.0, 6.0), t_dist(0.0, 3.0);
    Real worst = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
      const Real mu = mu_of_xi(xi_dist(rng));
      const Real t = t_dist(rng);
      const Kernels k = kernels(mu, t);
      worst = std::max(worst, std::abs(sq(k.C) + mu * sq(k.S) - 1.0));
    }
    verdict(worst <= 1e-12, "kernel Wronskian C^2 + mu S^2 = 1",
            "max |dev| = " + detail::fmt("%.3g", worst));
  }

  // 2. Series/closed-form consistency across the small-argument switchover.
  {
    Real worst = 0.0;
    for (int i = 0; i <= 400; ++i) {
      const Real z = std::pow(10.0, -8.0 + 6.0 * i / 400.0);  // |mu| t^2 in [1e-8, 1e-2]
      const Real t = 0.5;
      for (const Real sgn : {-1.0, 1.0}) {
        const Real mu = sgn * z / sq(t);
        const Kernels k = kernels(mu, t);
        const Real C_ref = mu >= 0.0 ? std::cos(std::sqrt(mu) * t) : std::cosh(std::sqrt(-mu) * t);
        const Real S_ref = mu >= 0.0 ? std::sin(std::sqrt(mu) * t) / std::sqrt(mu)
                                     : std::sinh(std::sqrt(-mu) * t) / std::sqrt(-mu);
        worst = std::max({worst, std::abs(k.C - C_ref), std::abs(k.S - S_ref)});
      }
    }
    verdict(worst <= 1e-12, "series matches closed form near mu t^2 = 0",
            "max |dev| = " + detail::fmt("%.3g", worst));
  }

  // 3. Appendix-style kernel bounds, both bands.
  {
    const std::size_t per_axis = std::max<std::size_t>(64, static_cast<std::size_t>(
                                                               std::sqrt(static_cast<Real>(samples))));
    const BoundReport low = verify_low_band_bounds(t_max, per_axis);
    log << low.to_text();
    verdict(low.ok(), "low-band kernel bounds", "");
    const BoundReport high = verify_high_band_bounds(t_max, samples);
    log << high.to_text();
    verdict(high.ok(), "high-band kernel bounds", "");
  }

  // 4. Propagator growth bounds on random band-limited data.
  {
    Propagator prop(g);
    bool ok = true;
    std::string detail_text;
    for (const Real t : {0.5, 2.0, t_max}) {
      const GrowthCheckReport rep = verify_corollary_growth(prop, t, trials);
      log << rep.to_text();
      ok = ok && rep.ok();
    }
    verdict(ok, "propagator growth bounds", detail_text);
  }

  // 5. Source identities and size estimates.
  {
    std::mt19937_64 rng(0x51deu);
    Real worst = 0.0;
    for (std::size_t i = 0; i < 32; ++i) {
      const std::vector<Complex> w = random_field(g, static_cast<long>(g.size() / 6), 0.7, 1.0, rng);
      for (const Complex& v : w) {
        const Complex d = evaluate_G_pointwise(v) - evaluate_G_product_form(v);
        worst = std::max(worst, std::abs(d) / std::max(1.0, std::abs(evaluate_G_pointwise(v))));
      }
    }
    verdict(worst <= 1e-14, "two source expressions agree", "max rel dev = " + detail::fmt("%.3g", worst));

    std::vector<Complex> w_unit = random_field(g, static_cast<long>(g.size() / 6), 1.0, 1.0, rng);
    const std::vector<Real> ladder{1e-2, 3e-3, 1e-3, 3e-4, 1e-4};
    const QuadraticOrderReport q = quadratic_order_check(g, w_unit, ladder, 1.0);
    verdict(q.converged && std::abs(q.slope - 2.0) <= 0.02, "source is quadratic at the origin",
            "log-log slope = " + detail::fmt("%.5g", q.slope));

    const LipschitzReport lip = lipschitz_check(g, 0.5, 64, 1.0);
    verdict(lip.max_ratio <= 1.5, "source Lipschitz quotient bounded",
            "max normalized ratio = " + detail::fmt("%.4g", lip.max_ratio));
  }

  // 6. Quadrature consistency of the inhomogeneous term: composite-Simpson
  //    evaluation of the constant-source integral matches its closed form.
  //    The source is band-limited to |xi| <= 2 so the kernel oscillation
  //    sqrt(mu) tau stays resolvable by the node count used here; higher
  //    frequencies test only the quadrature resolution, not its correctness.
  {
    Propagator prop(g);
    std::mt19937_64 rng(0xd0eu);
    const long band = std::max(1L, static_cast<long>(std::floor(2.0 / g.dxi())));
    const std::vector<Complex> w = random_field(g, band, 0.5, 1.0, rng);
    SourceEvaluator source(g);
    SpectralPair fg = SpectralPair::zero(g.size());
    source(decompose(g, w), fg);
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (std::abs(g.xi(k)) > 2.0) {
        fg.re_hat[k] = Complex{0.0, 0.0};
        fg.im_hat[k] = Complex{0.0, 0.0};
      }
    }
    const Real tau = 0.4;
    const std::vector<SpectralPair> nodes(41, fg);
    const SpectralPair a = prop.duhamel_apply(nodes, tau);
    const SpectralPair b = prop.duhamel_constant(fg, tau);
    Real num = 0.0;
    SpectralPair diff = a;
    for (std::size_t k = 0; k < diff.size(); ++k) {
      diff.re_hat[k] -= b.re_hat[k];
      diff.im_hat[k] -= b.im_hat[k];
    }
    num = pair_hs_norm(g, diff, 0.0);
    const Real den = std::max(1e-30, pair_hs_norm(g, b, 0.0));
    verdict(num / den <= 1e-8, "quadrature matches closed-form constant-source integral",
            "rel dev = " + detail::fmt("%.3g", num / den));
  }

  // 7. Fixed-point contraction probe at small radius and step.
  {
    const Real factor = picard_contraction_factor(g, 0.1, 0.1, 16, 1.0);
    verdict(factor < 1.0, "step map contracts at (M, T) = (0.1, 0.1)",
            "measured factor = " + detail::fmt("%.4g", factor));
  }

  log << (all_ok ? "check-invariants: all properties hold\n"
                 : "check-invariants: VIOLATIONS found\n");
  return all_ok ? kExitOk : kExitViolation;
}

// ---------------------------------------------------------------------------
// breather-eval: closed-form catalog values vs quadrature on the grid
// ---------------------------------------------------------------------------

inline int cmd_breather_eval(const Config& cfg, const GlobalOptions& opts, std::ostream& log) {
  require_schema_version(cfg);
  const Grid g = parse_grid(cfg);
  const Real s = cfg.get_real("solver.s", 1.0);
  InitSpec init = detail::parse_init_spec(cfg, "init.", false);
  if (!detail::is_breather_kind(init.kind))
    throw ConfigError("breather-eval needs a breather init.kind");

  std::vector<Real> times{0.0};
  if (cfg.has("eval.times")) times = cfg.get_real_list("eval.times");
  const bool with_residual = cfg.get_bool("eval.residual", true);
  cfg.require_all_consumed();
  detail::ensure_out_dir(opts.out_dir);

  const std::string csv_path = detail::join_path(opts.out_dir, "breather.csv");
  auto csv = detail::open_out_file(csv_path);
  csv << "t,l2_norm,hs_norm,mass_w,energy_w,momentum_w,peak_abs_u,residual\n";
  char buf[512];
  for (const Real t : times) {
    const std::vector<Complex> w = sample_offset(init.breather, g, t);
    const DiagnosticsRecord rec = compute_record(g, w, t, s);
    Real peak = 0.0;
    for (std::size_t m = 0; m < g.size(); ++m)
      peak = std::max(peak, std::abs(Complex{1.0, 0.0} + w[m]));
    const Real residual = with_residual ? breather_residual(init.breather, g, t) : 0.0;
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", t,
                  l2_norm(g, w), rec.hs_norm, rec.mass_w, rec.energy_w, rec.momentum_w, peak,
                  residual);
    csv << buf;
    std::snprintf(buf, sizeof buf,
                  "  t=%-8.4g |w|_L2=%.8g H^s=%.8g mass=%.8g energy=%.8g peak|u|=%.6g resid=%.3g\n",
                  t, l2_norm(g, w), rec.hs_norm, rec.mass_w, rec.energy_w, peak, residual);
    log << buf;
  }

  log << "breather-eval: " << to_string(init.breather.kind) << " on L = " << g.length()
      << ", N = " << g.size() << "\n";
  if (init.breather.kind == BreatherKind::peregrine)
    log << "  closed form: |Q(0)|_L2^2 = " << detail::fmt("%.10g", peregrine_l2_squared(0.0))
        << "\n";
  if (init.breather.kind == BreatherKind::kuznetsov_ma)
    log << "  closed form: mass = " << detail::fmt("%.10g", km_mass(init.breather.a))
        << ", offset energy = " << detail::fmt("%.10g", km_energy(init.breather.a))
        << ", period = " << detail::fmt("%.10g", km_period(init.breather.a)) << "\n";
  log << "  wrote " << csv_path << "\n";
  return kExitOk;
}

}  // namespace breatherlab
