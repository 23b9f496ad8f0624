#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bfam/cli.hpp"
#include "bfam/io.hpp"
#include "golden.hpp"

using namespace bfam;
using namespace bfam::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bfam_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const char* kGaussian = R"(# standard Gaussian datum
[grid]
L = 20
N = 512

[params]
b = 2
s = 2

[solver]
dt = 1e-2
T = 1
stride = 25

[initial]
family = gaussian
amp = 0.5
width = 2
)";

Options to(const fs::path& out) {
  Options o;
  o.out = out;
  return o;
}

int line_of(const std::string& text) {
  try {
    RunConfig::parse(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

std::string tree_bytes(const fs::path& dir) { return golden::directory_hash(dir); }

}  // namespace

TEST_CASE("config parsing") {
  const RunConfig cfg = RunConfig::parse(kGaussian);
  CHECK(cfg.get_double("grid", "L") == 20);
  CHECK(cfg.get_int("grid", "N") == 512);
  CHECK(cfg.get_string("initial", "family") == "gaussian");
  CHECK(cfg.get_double("solver", "missing_is_fine", 4.0) == 4.0);
  CHECK(cfg.find("solver", "dt")->line == 11);

  CHECK(line_of("[grid]\nL = 20\nfoo = 3\n") == 3);
  CHECK(line_of("[grid]\n[nonsense]\n") == 2);
  CHECK(line_of("[grid]\nL = 1\nL = 2\n") == 3);
  CHECK(line_of("[grid]\nL 20\n") == 2);
  CHECK(line_of("L = 20\n") == 1);
  CHECK(line_of("[grid\n") == 1);
  CHECK(line_of("[grid]\nL =\n") == 2);

  const RunConfig bad = RunConfig::parse("[grid]\nN = 12x\n");
  try {
    bad.get_int("grid", "N");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(RunConfig::parse("[grid]\nN = 1.5\n").get_int("grid", "N"), ConfigError);
  CHECK_THROWS_AS(grid_from(RunConfig::parse("[grid]\nN = 1000\n")), ConfigError);
  CHECK_THROWS_AS(params_from(RunConfig::parse("[params]\ns = 1\n")), ConfigError);
  const RunConfig mixed = RunConfig::parse("[initial]\nfamily = mode\nk = 2\nwidth = 1\n");
  CHECK_THROWS_AS(initial_from(mixed, "initial", make_grid(20, 64)), ConfigError);
  CHECK_THROWS_AS(initial_from(RunConfig::parse("[initial]\nfamily = spline\n"), "initial", make_grid(20, 64)),
                  ConfigError);
}

TEST_CASE("config hash ignores formatting and output location") {
  const RunConfig a = RunConfig::parse("[params]\nb = 2\n[grid]\nN = 64\n[output]\ndir = x\n");
  const RunConfig b = RunConfig::parse("# comment\n[grid]\nN=64.0\n\n[params]\nb = 2e0 ; trailing\n[output]\ndir = y\n");
  CHECK(a.config_hash() == b.config_hash());
  CHECK(a.config_hash() != RunConfig::parse("[params]\nb = 3\n[grid]\nN = 64\n").config_hash());
}

TEST_CASE("initial data families") {
  const Grid g = make_grid(20, 256);
  const Field m = initial_from(RunConfig::parse("[initial]\nfamily = mode\nk = 3\namp = 2\n"), "initial", g);
  CHECK(m[0] == doctest::Approx(2 * std::cos(g.wavenumber(3) * g.x(0))));
  const Field b = initial_from(
      RunConfig::parse("[initial]\nfamily = bump\ncenter = 1\nradius = 2\ns_norm = 2\ntarget = 0.5\n"), "initial", g);
  CHECK(hs_norm(b, 2) == doctest::Approx(0.5).epsilon(1e-10));

  const fs::path dir = scratch("file");
  io::write_field_csv(dir / "u.csv", b);
  const Field f = initial_from(RunConfig::parse("[initial]\nfamily = file\npath = " + (dir / "u.csv").string() + "\n"),
                               "initial", g);
  CHECK(f == b);
  CHECK_THROWS_AS(initial_from(RunConfig::parse("[initial]\nfamily = file\npath = " + (dir / "u.csv").string() + "\n"),
                               "initial", make_grid(20, 128)),
                  ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("solve") {
  const fs::path dir = scratch("solve");
  RunConfig zero = RunConfig::parse(kGaussian);
  zero.erase_section("initial");
  zero.set("initial", "family", "zero");
  CHECK(dispatch("solve", zero, to(dir / "zero")) == exit_ok);
  const auto traj = io::read_eulerian_trajectory(dir / "zero");
  for (const auto& u : traj.states) CHECK(sup_norm(u) == 0.0);

  Options lag = to(dir / "lag");
  lag.formulation = "lagrangian";
  CHECK(dispatch("solve", zero, lag) == exit_ok);
  CHECK(io::read_lagrangian_trajectory(dir / "lag").final_state().phi.is_identity());

  RunConfig huge = RunConfig::parse(kGaussian);
  huge.set("initial", "amp", "1e4");
  huge.set("solver", "norm_cap", "10");
  CHECK(dispatch("solve", huge, to(dir / "huge")) == exit_blowup);
  const auto m = nlohmann::json::parse(io::read_text(dir / "huge" / "manifest.json"));
  CHECK(m["termination"] == "blowup_norm");

  Options bad = to(dir / "bad");
  bad.formulation = "hamiltonian";
  CHECK(dispatch("solve", zero, bad) == exit_config);
  CHECK(dispatch("solve", RunConfig::parse("[grid]\nN = 100\n[initial]\nfamily = zero\n"), to(dir / "n")) ==
        exit_config);
  fs::remove_all(dir);
}

TEST_CASE("solve output is reproducible") {
  const fs::path dir = scratch("repro");
  const RunConfig cfg = RunConfig::parse(kGaussian);
  CHECK(dispatch("solve", cfg, to(dir / "a")) == exit_ok);
  CHECK(dispatch("solve", cfg, to(dir / "b")) == exit_ok);
  CHECK(tree_bytes(dir / "a") == tree_bytes(dir / "b"));
  const auto m = nlohmann::json::parse(io::read_text(dir / "a" / "manifest.json"));
  CHECK(m["config_hash"] == cfg.config_hash());
  fs::remove_all(dir);
}

TEST_CASE("conserve") {
  const fs::path dir = scratch("conserve");
  RunConfig cfg = RunConfig::parse(kGaussian);
  CHECK(dispatch("conserve", cfg, to(dir / "ok")) == exit_ok);
  const auto m = nlohmann::json::parse(io::read_text(dir / "ok" / "manifest.json"));
  CHECK(m["max_relative_residual_hs2"].get<double>() <= 1e-4);
  CHECK(io::read_text(dir / "ok" / "conservation.csv").rfind("t,res_hs2,res_sup,relative\n0,0,0,1\n", 0) == 0);

  RunConfig zero = cfg;
  zero.erase_section("initial");
  zero.set("initial", "family", "zero");
  CHECK(dispatch("conserve", zero, to(dir / "zero")) == exit_ok);
  CHECK(nlohmann::json::parse(io::read_text(dir / "zero" / "manifest.json"))["max_relative_residual_hs2"] == 0.0);

  RunConfig coarse = cfg;
  coarse.set("initial", "amp", "2");
  coarse.set("solver", "dt", "0.5");
  CHECK(dispatch("conserve", coarse, to(dir / "coarse")) == exit_acceptance);

  Options strict = to(dir / "strict");
  strict.tol = 1e-15;
  CHECK(dispatch("conserve", cfg, strict) == exit_acceptance);
  fs::remove_all(dir);
}

TEST_CASE("exp and scalecheck") {
  const fs::path dir = scratch("exp");
  const RunConfig cfg = RunConfig::parse(kGaussian);
  CHECK(dispatch("exp", cfg, to(dir / "exp")) == exit_ok);
  CHECK(fs::exists(dir / "exp" / "exp.csv"));
  CHECK(dispatch("scalecheck", cfg, to(dir / "sc")) == exit_ok);
  RunConfig capped = cfg;
  capped.set("solver", "norm_cap", "0.01");
  CHECK(dispatch("exp", capped, to(dir / "capped")) == exit_blowup);
  fs::remove_all(dir);
}

TEST_CASE("nonuniform") {
  const fs::path dir = scratch("nonuniform");
  const std::string text = R"([grid]
L = 10
N = 1024
[params]
b = 2
s = 2
[solver]
dt = 5e-3
[initial]
family = bump
center = 0
radius = 5
s_norm = 2
target = 0.3
[probe]
family = gaussian
amp = 2.5
width = 2
[experiment]
R = 4
n_values = 1, 2, 4, 8
)";
  const RunConfig cfg = RunConfig::parse(text);
  CHECK(dispatch("nonuniform", cfg, to(dir / "run")) == exit_ok);
  std::istringstream csv(io::read_text(dir / "run" / "experiment.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "n,r_n,input_dist,output_dist,momentum_output_dist,witness_gap,disjoint_ok,resolved_ok");
  double prev = 1e300;
  int rows = 0;
  bool flagged = false;
  while (std::getline(csv, line)) {
    ++rows;
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    const double input = io::parse_double(cells[2]);
    CHECK(input < prev);
    prev = input;
    if (cells[7] == "0") flagged = true;
  }
  CHECK(rows == 4);
  CHECK(flagged);
  const auto side = nlohmann::json::parse(io::read_text(dir / "run" / "experiment.json"));
  CHECK(side["config_hash"] == cfg.config_hash());

  RunConfig degenerate = cfg;
  degenerate.set("probe", "amp", "0");
  CHECK(dispatch("nonuniform", degenerate, to(dir / "degenerate")) == exit_config);
  fs::remove_all(dir);
}

TEST_CASE("sweep") {
  const fs::path dir = scratch("sweep");
  RunConfig cfg = RunConfig::parse(kGaussian);
  cfg.set("solver", "T", "0.2");
  cfg.set("sweep", "command", "solve");
  cfg.set("sweep", "b", "0, 2, 3");
  Options opt = to(dir / "three");
  opt.jobs = 2;
  CHECK(dispatch("sweep", cfg, opt) == exit_ok);
  for (const char* cell : {"b=0_N=512", "b=2_N=512", "b=3_N=512"})
    CHECK(fs::exists(dir / "three" / cell / "manifest.json"));
  const auto index = nlohmann::json::parse(io::read_text(dir / "three" / "index.json"));
  CHECK(index["cells"].size() == 3u);

  SUBCASE("a single cell matches the direct command byte for byte") {
    RunConfig one = cfg;
    one.set("sweep", "b", "2");
    CHECK(dispatch("sweep", one, to(dir / "one")) == exit_ok);
    RunConfig direct = cfg;
    direct.erase_section("sweep");
    CHECK(dispatch("solve", direct, to(dir / "direct")) == exit_ok);
    CHECK(tree_bytes(dir / "one" / "b=2_N=512") == tree_bytes(dir / "direct"));
  }

  SUBCASE("interrupted sweeps resume") {
    fs::remove(dir / "three" / "b=2_N=512" / "manifest.json");
    const auto before = fs::last_write_time(dir / "three" / "b=0_N=512" / "u_00000.csv");
    CHECK(dispatch("sweep", cfg, to(dir / "three")) == exit_ok);
    const auto idx = nlohmann::json::parse(io::read_text(dir / "three" / "index.json"));
    int resumed = 0;
    for (const auto& c : idx["cells"]) resumed += c["resumed"].get<bool>() ? 1 : 0;
    CHECK(resumed == 2);
    CHECK(fs::exists(dir / "three" / "b=2_N=512" / "manifest.json"));
    CHECK(fs::last_write_time(dir / "three" / "b=0_N=512" / "u_00000.csv") == before);
  }

  RunConfig nested = cfg;
  nested.set("sweep", "command", "sweep");
  CHECK(dispatch("sweep", nested, to(dir / "nested")) == exit_config);
  fs::remove_all(dir);
}

TEST_CASE("command line") {
  const fs::path dir = scratch("argv");
  io::write_text(dir / "zero.ini", "[grid]\nN = 64\n[solver]\nT = 0.01\n[initial]\nfamily = zero\n");
  io::write_text(dir / "bad.ini", "[grid]\nN = 64\nbogus = 1\n");
  const std::string cfg = (dir / "zero.ini").string(), bad = (dir / "bad.ini").string(),
                    out = (dir / "out").string();
  auto run_args = [](std::vector<std::string> args) {
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return run(static_cast<int>(argv.size()), argv.data());
  };
  CHECK(run_args({"bfam", "solve", "--config", cfg, "--out", out}) == exit_ok);
  CHECK(fs::exists(dir / "out" / "manifest.json"));
  CHECK(run_args({"bfam", "solve", "--config", bad}) == exit_config);
  CHECK(run_args({"bfam", "solve"}) == exit_config);
  CHECK(run_args({"bfam", "frobnicate", "--config", cfg}) == exit_config);
  CHECK(run_args({"bfam", "solve", "--config", cfg, "--formulation", "x"}) == exit_config);
  CHECK(run_args({"bfam", "solve", "--config", cfg, "--out", out, "--formulation", "lagrangian"}) == exit_ok);
  fs::remove_all(dir);
}
