#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "raftsim/config.hpp"
#include "raftsim/io.hpp"

using namespace raftsim;
namespace fs = std::filesystem;

namespace {

std::string work_dir() {
  static const std::string dir = [] {
    const std::string d = (fs::temp_directory_path() / "raftsim_cli_test").string();
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string in_work(const std::string& name) { return (fs::path(work_dir()) / name).string(); }

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(RAFTSIM_BIN) + " " + args + " > " + in_work("stdout.txt") + " 2>&1";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

std::string last_output() {
  std::ifstream in(in_work("stdout.txt"));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig tiny_full_config() {
  RunConfig c;
  c.model = ModelKind::Full;
  c.geometry.N = 8;
  c.geometry.Mz = 2;
  c.params.eps = 0.3;
  c.params.dt = 1e-3;
  c.params.t_end = 5e-3;
  return c;
}

RunConfig tiny_reduced_config() {
  RunConfig c;
  c.model = ModelKind::Reduced;
  c.geometry.N = 16;
  c.params.eps = 0.3;
  c.params.dt = 1e-3;
  c.params.t_end = 5e-3;
  return c;
}

}  // namespace

TEST_CASE("help exits cleanly, absent or unknown arguments do not") {
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("run --help") == 0);
  CHECK(run_cli("") == 2);
  CHECK(run_cli("run --bogus-flag") == 2);
  CHECK(run_cli("run --config /nonexistent/config.json") == 2);
}

TEST_CASE("malformed and invalid configurations exit with code 2") {
  const std::string bad_json = in_work("bad.json");
  std::ofstream(bad_json) << "this is not json";
  CHECK(run_cli("run --config " + bad_json) == 2);

  RunConfig c = tiny_full_config();
  c.geometry.N = 7;
  const std::string bad_cfg = in_work("badcfg.json");
  save_config(c, bad_cfg);
  CHECK(run_cli("run --config " + bad_cfg) == 2);
  const std::string msg = last_output();
  CHECK(msg.find("invalid configuration") != std::string::npos);
}

TEST_CASE("run produces the advertised artifacts") {
  RunConfig c = tiny_full_config();
  c.output.snapshot_every = 2;
  const std::string cfg = in_work("run.json");
  save_config(c, cfg);
  const std::string out = in_work("run_out");

  CHECK(run_cli("run --config " + cfg + " --out " + out) == 0);
  CHECK(fs::exists(fs::path(out) / "series.csv"));
  CHECK(fs::exists(fs::path(out) / "final.state"));
  CHECK(fs::exists(fs::path(out) / "phi_final.pgm"));
  CHECK(fs::exists(fs::path(out) / "snap_00000000.snap"));
  CHECK(snapshot_kind((fs::path(out) / "final.state").string()) == kSnapshotFull);
}

TEST_CASE("the seed flag changes the trajectory, the same seed repeats it") {
  const std::string cfg = in_work("seeded.json");
  save_config(tiny_full_config(), cfg);
  const std::string out_a = in_work("seed_a");
  const std::string out_b = in_work("seed_b");
  const std::string out_c = in_work("seed_c");

  CHECK(run_cli("run --config " + cfg + " --out " + out_a + " --seed 7") == 0);
  CHECK(run_cli("run --config " + cfg + " --out " + out_b + " --seed 7") == 0);
  CHECK(run_cli("run --config " + cfg + " --out " + out_c + " --seed 8") == 0);

  const std::string a = slurp((fs::path(out_a) / "series.csv").string());
  CHECK(a == slurp((fs::path(out_b) / "series.csv").string()));
  CHECK(a != slurp((fs::path(out_c) / "series.csv").string()));
}

TEST_CASE("a diverging run exits with code 3 and leaves the last finite state") {
  RunConfig c = tiny_full_config();
  c.law = EquilibriumLaw{1e4};
  c.params.dt = 1e-2;
  c.params.t_end = 2.0;
  const std::string cfg = in_work("blowup.json");
  save_config(c, cfg);
  const std::string out = in_work("blowup_out");

  CHECK(run_cli("run --config " + cfg + " --out " + out) == 3);
  CHECK(fs::exists(fs::path(out) / "last_finite.state"));
}

TEST_CASE("sweep-delta writes the comparison table") {
  const std::string cfg = in_work("sweepdelta.json");
  save_config(tiny_reduced_config(), cfg);
  const std::string out = in_work("sweepdelta_out");

  CHECK(run_cli("sweep-delta --config " + cfg + " --deltas 0.2,0.1 --t-end 5e-3 --out " +
                out) == 0);
  const std::string csv = slurp((fs::path(out) / "sweep_delta.csv").string());
  CHECK(csv.rfind("delta,error_l2,u_final\n", 0) == 0);
  CHECK(fs::exists(fs::path(out) / "sweep_delta_fit.csv"));
}

TEST_CASE("sweep-D writes observables and a fitted slope") {
  RunConfig c = tiny_full_config();
  c.geometry.N = 16;
  c.geometry.Mz = 4;
  const std::string cfg = in_work("sweepd.json");
  save_config(c, cfg);
  const std::string out = in_work("sweepd_out");

  CHECK(run_cli("sweep-D --config " + cfg + " --D-values 1,4,16 --t-end 5e-3 --out " + out) ==
        0);
  const std::string csv = slurp((fs::path(out) / "sweep_D.csv").string());
  CHECK(csv.rfind("D,grad_u_integral,e_red,u_trace_mean\n", 0) == 0);
  CHECK(fs::exists(fs::path(out) / "sweep_D_fit.csv"));
  CHECK(run_cli("sweep-D --config " + cfg + " --D-values 1,4 --out " + out) == 2);
}

TEST_CASE("refine writes both study tables without a configuration file") {
  const std::string out = in_work("refine_out");
  CHECK(run_cli("refine --N-values 8,12,16 --dt-values 4e-4,2e-4,1e-4 --t-end 4e-4 --out " +
                out) == 0);
  for (const char* name : {"refine_dt.csv", "refine_dt_fit.csv", "refine_N.csv",
                           "refine_N_fit.csv"})
    CHECK(fs::exists(fs::path(out) / name));
  CHECK(run_cli("refine --N-values 8,16 --out " + out) == 2);
}

TEST_CASE("stationary solves from flags alone and reports tiny residuals") {
  const std::string out = in_work("stationary_out");
  CHECK(run_cli("stationary --m -0.4 --M 1.0 --eps 0.04 --delta 0.1 --law noneq --out " +
                out) == 0);
  const std::string csv = slurp((fs::path(out) / "residuals.csv").string());
  CHECK(csv.rfind("residual,value\n", 0) == 0);

  double max_res = -1.0;
  std::istringstream ss(csv);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.rfind("max,", 0) == 0) max_res = std::stod(line.substr(4));
  }
  CHECK(max_res >= 0.0);
  CHECK(max_res < 1e-8);
  CHECK(fs::exists(fs::path(out) / "final.state"));

  // The relaxation law has no stationary problem in these variables.
  CHECK(run_cli("stationary --law equilibrium --c 1.0 --out " + out) == 2);
}
