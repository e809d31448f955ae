// breatherlab command-line front end.
//
// Subcommands: simulate, growth-scan, peregrine-instability, km-instability,
// check-invariants, breather-eval, plot. Exit codes: 0 success, 1 failed
// property check, 2 blow-up detected, 3 invalid configuration, 4 Picard
// divergence.

#include <cstdio>
#include <exception>
#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "breatherlab/config.hpp"
#include "breatherlab/experiments.hpp"
#include "breatherlab/plot.hpp"

namespace bl = breatherlab;

namespace {

using CommandFn = std::function<int(const bl::Config&, const bl::GlobalOptions&, std::ostream&)>;

struct CliState {
  std::string config_path;
  bl::GlobalOptions global;
  CommandFn command;
  // plot has its own inputs and no config file
  std::string plot_kind;
  std::string plot_input;
  std::string plot_output = "plot.ppm";
  bool is_plot = false;
};

void add_common_flags(CLI::App* sub, CliState& st, bool config_required) {
  auto* opt = sub->add_option("--config", st.config_path, "configuration file (key = value lines)");
  if (config_required) opt->required();
  sub->add_option("--out", st.global.out_dir, "output directory (created if absent)");
  sub->add_option("--workers", st.global.workers,
                  "worker threads for sweeps (default: BREATHERLAB_WORKERS, then hardware)");
  sub->add_option("--seed", st.global.seed, "seed for randomized checks");
  sub->add_flag("--linear", st.global.force_linear, "drop the source term (linear flow)");
  sub->add_flag("--project-mean", st.global.force_project_mean,
                "pin the spatial mean of Re w at every step");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral simulator for plane-wave-background NLS offsets"};
  app.require_subcommand(1);
  CliState st;

  struct SubSpec {
    const char* name;
    const char* help;
    CommandFn fn;
    bool config_required;
  };
  const SubSpec subs[] = {
      {"simulate", "integrate one configured trajectory", bl::cmd_simulate, true},
      {"growth-scan", "fit per-mode growth/oscillation against the dispersion law",
       bl::cmd_growth_scan, true},
      {"peregrine-instability", "small data at t = -T arriving at the fixed profile",
       bl::cmd_peregrine_instability, true},
      {"km-instability", "periodic orbit vs orbit plus a far small intruder",
       bl::cmd_km_instability, true},
      {"check-invariants", "run the property suite; exit nonzero on violation",
       bl::cmd_check_invariants, false},
      {"breather-eval", "closed-form catalog values vs quadrature", bl::cmd_breather_eval, true},
  };
  for (const SubSpec& spec : subs) {
    CLI::App* sub = app.add_subcommand(spec.name, spec.help);
    add_common_flags(sub, st, spec.config_required);
    sub->callback([&st, fn = spec.fn] { st.command = fn; });
  }

  CLI::App* plot = app.add_subcommand("plot", "render a PPM figure from run outputs");
  plot->add_option("--kind", st.plot_kind, "heatmap | trace | growth")->required();
  plot->add_option("--input", st.plot_input, "frames.bin (heatmap) or CSV (trace, growth)")
      ->required();
  plot->add_option("--output", st.plot_output, "output image path");
  plot->callback([&st] { st.is_plot = true; });

  CLI11_PARSE(app, argc, argv);

  try {
    if (st.is_plot) {
      const bl::HeatmapInfo info = bl::render_plot(st.plot_kind, st.plot_input, st.plot_output);
      std::printf("plot: wrote %s\n", st.plot_output.c_str());
      if (st.plot_kind == "heatmap")
        std::printf("  max |u| = %.6g at t = %.6g, x = %.6g\n", info.max_abs_u, info.t_at_max,
                    info.x_at_max);
      return bl::kExitOk;
    }
    const bl::Config cfg = st.config_path.empty()
                               ? bl::Config::from_string("schema_version = 1", "<default>")
                               : bl::Config::from_file(st.config_path);
    return st.command(cfg, st.global, std::cout);
  } catch (const bl::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return bl::kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return bl::kExitConfig;
  } catch (const bl::PicardDivergenceError& e) {
    std::fprintf(stderr, "picard divergence: %s\n", e.what());
    return bl::kExitPicard;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
