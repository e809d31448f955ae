#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef BL_CLI_PATH
#error "BL_CLI_PATH must point at the command-line binary"
#endif

namespace {

namespace fs = std::filesystem;

struct CliOutcome {
  int code = -1;
  std::string text;
};

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("bl_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream os(p);
  os << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

CliOutcome run_cli(const std::string& args, const fs::path& capture_dir) {
  const fs::path out = capture_dir / "combined_output.txt";
  const std::string cmd =
      std::string(BL_CLI_PATH) + " " + args + " > " + out.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  CliOutcome oc;
  if (WIFEXITED(raw)) oc.code = WEXITSTATUS(raw);
  oc.text = read_file(out);
  return oc;
}

const std::string kShortRun =
    "schema_version = 1\n"
    "grid.L = 40\n"
    "grid.N = 128\n"
    "init.kind = kuznetsov_ma\n"
    "init.a = 1.0\n"
    "time.start = 0\n"
    "time.end = 0.1\n"
    "solver.dt = 0.005\n"
    "solver.snapshot_dt = 0.02\n";

}  // namespace

TEST_CASE("simulate completes and writes byte-stable outputs", "[cli]") {
  const fs::path a = fresh_dir("sim_a");
  const fs::path b = fresh_dir("sim_b");
  write_file(a / "run.cfg", kShortRun);

  const CliOutcome ra =
      run_cli("simulate --config " + (a / "run.cfg").string() + " --out " + a.string(), a);
  INFO(ra.text);
  CHECK(ra.code == 0);
  REQUIRE(fs::exists(a / "trajectory.csv"));
  CHECK(fs::exists(a / "checkpoint.bin"));
  const std::string csv_a = read_file(a / "trajectory.csv");
  CHECK(csv_a.rfind("t,mass_w,energy_w,momentum_w,hs_norm,linf,", 0) == 0);

  write_file(b / "run.cfg", kShortRun);
  const CliOutcome rb =
      run_cli("simulate --config " + (b / "run.cfg").string() + " --out " + b.string(), b);
  CHECK(rb.code == 0);
  CHECK(read_file(b / "trajectory.csv") == csv_a);
}

TEST_CASE("configuration problems exit with the dedicated code", "[cli]") {
  const fs::path d = fresh_dir("cfg_err");

  SECTION("missing file") {
    const CliOutcome r =
        run_cli("simulate --config " + (d / "nope.cfg").string() + " --out " + d.string(), d);
    CHECK(r.code == 3);
  }

  SECTION("unknown key") {
    write_file(d / "bad.cfg", kShortRun + "typo.key = 1\n");
    const CliOutcome r =
        run_cli("simulate --config " + (d / "bad.cfg").string() + " --out " + d.string(), d);
    CHECK(r.code == 3);
    CHECK(r.text.find("typo.key") != std::string::npos);
  }

  SECTION("unsupported schema version") {
    write_file(d / "schema.cfg", "schema_version = 2\n");
    const CliOutcome r =
        run_cli("simulate --config " + (d / "schema.cfg").string() + " --out " + d.string(), d);
    CHECK(r.code == 3);
  }

  SECTION("off-grid perturbation frequency") {
    write_file(d / "mode.cfg",
               "schema_version = 1\n"
               "init.kind = single_mode\n"
               "init.k = 0.333\n"
               "time.end = 0.1\n");
    const CliOutcome r =
        run_cli("simulate --config " + (d / "mode.cfg").string() + " --out " + d.string(), d);
    CHECK(r.code == 3);
    CHECK(r.text.find("nearest") != std::string::npos);
  }
}

TEST_CASE("blow-up detection exits 2", "[cli]") {
  const fs::path d = fresh_dir("blowup");
  write_file(d / "run.cfg",
             "schema_version = 1\n"
             "grid.N = 512\n"
             "init.kind = peregrine\n"
             "time.start = 0\n"
             "time.end = 1\n"
             "solver.dt = 0.001\n"
             "solver.blowup_threshold = 3\n");
  const CliOutcome r =
      run_cli("simulate --config " + (d / "run.cfg").string() + " --out " + d.string(), d);
  INFO(r.text);
  CHECK(r.code == 2);
}

TEST_CASE("fixed-point divergence exits 4", "[cli]") {
  const fs::path d = fresh_dir("diverge");
  write_file(d / "run.cfg",
             "schema_version = 1\n"
             "grid.L = 40\n"
             "grid.N = 256\n"
             "init.kind = kuznetsov_ma\n"
             "time.end = 4\n"
             "solver.dt = 2\n");
  const CliOutcome r =
      run_cli("simulate --config " + (d / "run.cfg").string() + " --out " + d.string(), d);
  INFO(r.text);
  CHECK(r.code == 4);
}

TEST_CASE("growth scan is worker-count independent", "[cli]") {
  const std::string cfg =
      "schema_version = 1\n"
      "scan.k_list = 0.5,1.0\n"
      "solver.dt = 0.025\n"
      "solver.snapshot_dt = 0.05\n";
  const fs::path a = fresh_dir("scan_w1");
  const fs::path b = fresh_dir("scan_w4");
  write_file(a / "scan.cfg", cfg);
  write_file(b / "scan.cfg", cfg);

  const CliOutcome ra = run_cli(
      "growth-scan --config " + (a / "scan.cfg").string() + " --out " + a.string() + " --workers 1",
      a);
  INFO(ra.text);
  CHECK(ra.code == 0);
  const CliOutcome rb = run_cli(
      "growth-scan --config " + (b / "scan.cfg").string() + " --out " + b.string() + " --workers 4",
      b);
  CHECK(rb.code == 0);

  const std::string csv = read_file(a / "scan.csv");
  CHECK(csv.rfind("k,kind,fitted,theory,abs_error", 0) == 0);
  CHECK(csv == read_file(b / "scan.csv"));
}

TEST_CASE("growth scan rejects off-grid frequencies", "[cli]") {
  const fs::path d = fresh_dir("scan_reject");
  write_file(d / "scan.cfg",
             "schema_version = 1\n"
             "scan.k_list = 0.5,0.333\n");
  const CliOutcome r =
      run_cli("growth-scan --config " + (d / "scan.cfg").string() + " --out " + d.string(), d);
  CHECK(r.code == 3);
  CHECK(r.text.find("representable") != std::string::npos);
}

TEST_CASE("plots are rendered from the CSV artifacts", "[cli]") {
  const fs::path d = fresh_dir("plot");
  write_file(d / "run.cfg", kShortRun);
  REQUIRE(run_cli("simulate --config " + (d / "run.cfg").string() + " --out " + d.string(), d)
              .code == 0);

  const CliOutcome pr = run_cli("plot --kind trace --input " + (d / "trajectory.csv").string() +
                                    " --output " + (d / "trace.ppm").string(),
                                d);
  INFO(pr.text);
  CHECK(pr.code == 0);
  REQUIRE(fs::exists(d / "trace.ppm"));
  CHECK(read_file(d / "trace.ppm").rfind("P6", 0) == 0);

  SECTION("failures do not leave a partial output file") {
    const CliOutcome bad = run_cli("plot --kind trace --input " + (d / "missing.csv").string() +
                                       " --output " + (d / "never.ppm").string(),
                                   d);
    CHECK(bad.code != 0);
    CHECK(!fs::exists(d / "never.ppm"));
  }

  SECTION("unknown plot kinds are configuration errors") {
    const CliOutcome bad = run_cli("plot --kind bogus --input " + (d / "trajectory.csv").string() +
                                       " --output " + (d / "never2.ppm").string(),
                                   d);
    CHECK(bad.code == 3);
    CHECK(!fs::exists(d / "never2.ppm"));
  }
}

TEST_CASE("invariant audit passes with reduced sampling", "[cli]") {
  const fs::path d = fresh_dir("invariants");
  write_file(d / "inv.cfg",
             "schema_version = 1\n"
             "invariants.samples = 20000\n"
             "invariants.t_max = 5\n"
             "invariants.trials = 50\n");
  const CliOutcome r =
      run_cli("check-invariants --config " + (d / "inv.cfg").string() + " --out " + d.string(), d);
  INFO(r.text);
  CHECK(r.code == 0);
  CHECK(r.text.find("VIOLATED") == std::string::npos);
  CHECK(r.text.find("ok") != std::string::npos);
}

TEST_CASE("profile evaluation writes the functional table", "[cli]") {
  const fs::path d = fresh_dir("eval");
  write_file(d / "eval.cfg",
             "schema_version = 1\n"
             "init.kind = kuznetsov_ma\n"
             "init.a = 1.0\n"
             "eval.times = -1,0,1\n");
  const CliOutcome r =
      run_cli("breather-eval --config " + (d / "eval.cfg").string() + " --out " + d.string(), d);
  INFO(r.text);
  CHECK(r.code == 0);
  const std::string csv = read_file(d / "breather.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);  // header + three times
}

TEST_CASE("separation experiment emits its diagnostics", "[cli]") {
  const fs::path d = fresh_dir("separation");
  write_file(d / "km.cfg",
             "schema_version = 1\n"
             "grid.L = 40\n"
             "grid.N = 256\n"
             "km.periods = 0.1\n"
             "km.perturbation_x0 = 10\n"
             "solver.dt = 0.002\n"
             "solver.snapshot_dt = 0.05\n");
  const CliOutcome r =
      run_cli("km-instability --config " + (d / "km.cfg").string() + " --out " + d.string(), d);
  INFO(r.text);
  CHECK(r.code == 0);
  const std::string csv = read_file(d / "separation.csv");
  CHECK(csv.rfind("t,separation_hs,ratio_vs_initial", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') >= 3);
}

TEST_CASE("arrival experiment runs a reduced horizon", "[cli]") {
  const fs::path d = fresh_dir("arrival");
  write_file(d / "p.cfg",
             "schema_version = 1\n"
             "peregrine.T_list = 1.0\n"
             "peregrine.full_T_max = 2\n"
             "peregrine.dx = 0.3125\n"
             "peregrine.window_L = 40\n"
             "solver.dt = 0.002\n");
  const CliOutcome r = run_cli(
      "peregrine-instability --config " + (d / "p.cfg").string() + " --out " + d.string(), d);
  INFO(r.text);
  CHECK(r.code == 0);
  const std::string csv = read_file(d / "peregrine.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') >= 2);
}
