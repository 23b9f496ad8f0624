#include <algorithm>
#include <atomic>
#include <iostream>
#include <mutex>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "bfam/cli.hpp"
#include "bfam/diagnostics.hpp"
#include "bfam/io.hpp"
#include "bfam/spectral.hpp"

namespace bfam::cli {

namespace {

std::mutex g_out_mutex;

void say(const std::string& line) {
  std::lock_guard<std::mutex> lock(g_out_mutex);
  std::cout << line << '\n' << std::flush;
}

void complain(const std::string& line) {
  std::lock_guard<std::mutex> lock(g_out_mutex);
  std::cerr << "bfam: " << line << '\n' << std::flush;
}

std::string formulation_or(const Options& opt, const std::string& fallback) {
  const std::string f = opt.formulation.value_or(fallback);
  if (f != "eulerian" && f != "lagrangian") throw ConfigError("--formulation must be eulerian or lagrangian, got '" + f + "'");
  return f;
}

// manifest.json is written last; its presence marks a finished output directory.
void write_manifest(const fs::path& dir, nlohmann::json m) {
  io::write_text(dir / "manifest.json", m.dump(2) + "\n");
}

nlohmann::json manifest_base(std::string_view command, const RunConfig& cfg) {
  nlohmann::json m;
  m["command"] = command;
  m["config_hash"] = cfg.config_hash();
  return m;
}

int recorded_exit_code(const nlohmann::json& m) {
  if (m.contains("exit_code")) return m.at("exit_code").get<int>();
  if (m.contains("termination"))
    return termination_from_string(m.at("termination").get<std::string>()) == Termination::completed ? exit_ok
                                                                                                      : exit_blowup;
  return exit_ok;
}

}  // namespace

fs::path output_dir(const RunConfig& cfg, const Options& opt) {
  if (opt.out) return *opt.out;
  return cfg.get_string("output", "dir", std::string("out"));
}

int cmd_solve(const RunConfig& cfg, const Options& opt) {
  const std::string form = formulation_or(opt, "eulerian");
  const Grid grid = grid_from(cfg);
  const BParams params = params_from(cfg);
  const Field u0 = initial_from(cfg, "initial", grid);
  const SolverConfig solver = solver_from(cfg, u0);
  const fs::path dir = output_dir(cfg, opt);

  Termination term;
  double t_end;
  if (form == "eulerian") {
    const EulerianTrajectory traj = solve_eulerian(u0, params, solver);
    io::write_trajectory(dir, traj, cfg.config_hash());
    term = traj.termination;
    t_end = traj.times.back();
  } else {
    const LagrangianTrajectory traj = solve_geodesic(u0, params, solver);
    io::write_trajectory(dir, traj, cfg.config_hash());
    term = traj.termination;
    t_end = traj.times.back();
  }
  say("solve (" + form + "): " + std::string(to_string(term)) + " at t = " + io::format_double(t_end) + " -> " +
      dir.string());
  return term == Termination::completed ? exit_ok : exit_blowup;
}

int cmd_conserve(const RunConfig& cfg, const Options& opt) {
  const std::string form = formulation_or(opt, "lagrangian");
  const double tol = opt.tol.value_or(1e-4);
  const Grid grid = grid_from(cfg);
  const BParams params = params_from(cfg);
  const Field u0 = initial_from(cfg, "initial", grid);
  SolverConfig solver = solver_from(cfg, u0);
  const fs::path dir = output_dir(cfg, opt);

  LagrangianTrajectory traj = [&] {
    if (form == "lagrangian") return solve_geodesic(u0, params, solver);
    solver.snapshot_stride = 1;
    return flow_from_velocity(solve_eulerian(u0, params, solver));
  }();
  const ConservationReport report = conservation_residual(traj, params, true);
  fs::create_directories(dir);
  io::write_conservation_csv(dir / "conservation.csv", report);

  const double worst = report.max_residual_s_minus_2();
  int code = exit_ok;
  if (!traj.completed())
    code = exit_blowup;
  else if (!(worst <= tol))
    code = exit_acceptance;

  nlohmann::json m = manifest_base("conserve", cfg);
  m["formulation"] = form;
  m["termination"] = to_string(traj.termination);
  m["max_relative_residual_hs2"] = worst;
  m["tol"] = tol;
  m["exit_code"] = code;
  write_manifest(dir, m);
  say("conserve (" + form + "): max relative H^{s-2} residual " + io::format_double(worst) + " (tol " +
      io::format_double(tol) + ")" + (code == exit_ok ? "" : " FAILED"));
  return code;
}

int cmd_nonuniform(const RunConfig& cfg, const Options& opt) {
  const NonUniformityConfig nc = nonuniformity_from(cfg);
  const fs::path dir = output_dir(cfg, opt);
  const ExperimentReport report = nonuniformity_experiment(nc);

  fs::create_directories(dir);
  io::write_experiment_csv(dir / "experiment.csv", report);
  io::write_text(dir / "experiment.json", io::experiment_sidecar(report, cfg.config_hash()).dump(2) + "\n");

  const int code = report.separation_persists() ? exit_ok : exit_acceptance;
  nlohmann::json m = manifest_base("nonuniform", cfg);
  m["resolved_rows"] = report.resolved().size();
  m["witness_bound_holds"] = report.witness_bound_holds();
  m["separation_persists"] = report.separation_persists();
  m["disjoint_holds"] = report.disjoint_holds();
  m["exit_code"] = code;
  write_manifest(dir, m);
  for (const auto& r : report.rows)
    if (!r.resolved_ok) say("nonuniform: n = " + std::to_string(r.n) + " under-resolved, flagged");
  say(std::string("nonuniform: separation ") + (report.separation_persists() ? "persists" : "does NOT persist") +
      ", m_est = " + io::format_double(report.m_est) + " -> " + dir.string());
  return code;
}

int cmd_exp(const RunConfig& cfg, const Options& opt) {
  const Grid grid = grid_from(cfg);
  const BParams params = params_from(cfg);
  const Field v = initial_from(cfg, "initial", grid);
  const SolverConfig solver = solver_from(cfg, v);
  const fs::path dir = output_dir(cfg, opt);

  const Diffeomorphism phi = exp_map(v, params, solver);
  fs::create_directories(dir);
  io::write_diffeo_csv(dir / "exp.csv", phi);
  nlohmann::json m = manifest_base("exp", cfg);
  m["min_jacobian"] = phi.min_jacobian();
  m["displacement_hs_norm"] = hs_norm(phi.displacement(), params.s());
  m["exit_code"] = exit_ok;
  write_manifest(dir, m);
  say("exp: |exp(v) - id|_s = " + io::format_double(hs_norm(phi.displacement(), params.s())) + " -> " + dir.string());
  return exit_ok;
}

int cmd_scalecheck(const RunConfig& cfg, const Options& opt) {
  const double tol = opt.tol.value_or(1e-6);
  const Grid grid = grid_from(cfg);
  const BParams params = params_from(cfg);
  const Field u0 = initial_from(cfg, "initial", grid);
  const SolverConfig solver = solver_from(cfg, u0);
  const double lambda = cfg.get_double("scalecheck", "lambda", 2.0);
  const double T = cfg.get_double("scalecheck", "T", 0.5);
  const fs::path dir = output_dir(cfg, opt);

  const double residual = scaling_check(u0, lambda, T, params, solver);
  const int code = residual <= tol ? exit_ok : exit_acceptance;
  fs::create_directories(dir);
  nlohmann::json m = manifest_base("scalecheck", cfg);
  m["lambda"] = lambda;
  m["T"] = T;
  m["residual_hs"] = residual;
  m["tol"] = tol;
  m["exit_code"] = code;
  write_manifest(dir, m);
  say("scalecheck: residual " + io::format_double(residual) + " (tol " + io::format_double(tol) + ")" +
      (code == exit_ok ? "" : " FAILED"));
  return code;
}

int cmd_sweep(const RunConfig& cfg, const Options& opt) {
  const std::string command = cfg.get_string("sweep", "command");
  if (command == "sweep") throw ConfigError("[sweep] command cannot be sweep", cfg.find("sweep", "command")->line);
  if (command != "solve" && command != "conserve" && command != "nonuniform" && command != "exp" &&
      command != "scalecheck")
    throw ConfigError("[sweep] command: unknown command '" + command + "'", cfg.find("sweep", "command")->line);

  const std::vector<double> bs =
      cfg.has("sweep", "b") ? cfg.get_list("sweep", "b") : std::vector<double>{params_from(cfg).b()};
  std::vector<int> ns;
  if (cfg.has("sweep", "N")) {
    for (double n : cfg.get_list("sweep", "N")) {
      if (n != std::floor(n) || n < 1) throw ConfigError("[sweep] N must be integers", cfg.find("sweep", "N")->line);
      ns.push_back(static_cast<int>(n));
    }
  } else {
    ns.push_back(grid_from(cfg).n_points);
  }

  struct Cell {
    double b;
    int n;
    RunConfig cfg;
    fs::path dir;
    int code = exit_ok;
    bool skipped = false;
  };
  const fs::path root = output_dir(cfg, opt);
  std::vector<Cell> cells;
  for (double b : bs) {
    for (int n : ns) {
      RunConfig c = cfg;
      c.erase_section("sweep");
      c.set("params", "b", io::format_double(b));
      c.set("grid", "N", std::to_string(n));
      // Validate every cell up front so a bad grid fails before any work starts.
      grid_from(c);
      params_from(c);
      const std::string name = "b=" + io::format_double(b) + "_N=" + std::to_string(n);
      cells.push_back(Cell{b, n, std::move(c), root / name});
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      Cell& cell = cells[i];
      const fs::path manifest = cell.dir / "manifest.json";
      if (fs::exists(manifest)) {
        try {
          const auto m = nlohmann::json::parse(io::read_text(manifest));
          if (m.value("config_hash", std::string()) == cell.cfg.config_hash()) {
            cell.code = recorded_exit_code(m);
            cell.skipped = true;
            say("sweep: " + cell.dir.filename().string() + " already complete, skipped");
            continue;
          }
        } catch (const std::exception&) {
          // unreadable manifest: recompute the cell
        }
      }
      Options sub = opt;
      sub.out = cell.dir;
      sub.jobs = 1;
      cell.code = dispatch(command, cell.cfg, sub);
    }
  };
  const int jobs = std::clamp(opt.jobs, 1, static_cast<int>(cells.size()));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  nlohmann::json index;
  index["command"] = command;
  index["config_hash"] = cfg.config_hash();
  index["cells"] = nlohmann::json::array();
  int worst = exit_ok;
  for (const auto& cell : cells) {
    index["cells"].push_back({{"b", cell.b},
                              {"N", cell.n},
                              {"dir", cell.dir.filename().string()},
                              {"exit_code", cell.code},
                              {"resumed", cell.skipped}});
    worst = std::max(worst, cell.code);
  }
  fs::create_directories(root);
  io::write_text(root / "index.json", index.dump(2) + "\n");
  say("sweep: " + std::to_string(cells.size()) + " cells -> " + root.string());
  return worst;
}

int dispatch(std::string_view command, const RunConfig& cfg, const Options& opt) {
  try {
    if (command == "solve") return cmd_solve(cfg, opt);
    if (command == "conserve") return cmd_conserve(cfg, opt);
    if (command == "nonuniform") return cmd_nonuniform(cfg, opt);
    if (command == "exp") return cmd_exp(cfg, opt);
    if (command == "scalecheck") return cmd_scalecheck(cfg, opt);
    if (command == "sweep") return cmd_sweep(cfg, opt);
    complain("unknown command '" + std::string(command) + "'");
    return exit_config;
  } catch (const ConfigError& e) {
    complain("config error: " + std::string(e.what()));
    return exit_config;
  } catch (const OutsideDomain& e) {
    complain(std::string("blow-up: ") + e.what());
    return exit_blowup;
  } catch (const ExperimentBlowup& e) {
    complain(std::string("blow-up: ") + e.what());
    return exit_blowup;
  } catch (const SolverError& e) {
    complain(std::string("blow-up: ") + e.what());
    return exit_blowup;
  } catch (const ConvergenceError& e) {
    complain(std::string("blow-up: ") + e.what());
    return exit_blowup;
  } catch (const std::invalid_argument& e) {
    complain(std::string("invalid input: ") + e.what());
    return exit_config;
  } catch (const std::exception& e) {
    complain(e.what());
    return exit_config;
  }
}

int run(int argc, char** argv) {
  CLI::App app{"Numerical lab for the b-family of peakon equations"};
  app.require_subcommand(1);
  Options opt;
  std::string out, formulation;
  double tol = 0.0;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"solve", "integrate the equation (Eulerian or geodesic form) and write snapshots"},
      {"conserve", "check the transported-momentum law along the flow"},
      {"nonuniform", "run the shrinking-bump non-uniform continuity experiment"},
      {"sweep", "run a command over a grid of b and N values"},
      {"exp", "evaluate the Riemannian exponential map at the initial datum"},
      {"scalecheck", "compare a solution with its rescaled counterpart"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory (overrides [output] dir)");
    sub->add_option("--jobs", opt.jobs, "concurrent sweep cells")->check(CLI::PositiveNumber);
    sub->add_option("--tol", tol, "acceptance tolerance");
    sub->add_option("--formulation", formulation, "eulerian or lagrangian")
        ->check(CLI::IsMember({"eulerian", "lagrangian"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }
  CLI::App* chosen = app.get_subcommands().front();
  if (chosen->count("--out") > 0) opt.out = out;
  if (chosen->count("--tol") > 0) opt.tol = tol;
  if (chosen->count("--formulation") > 0) opt.formulation = formulation;

  RunConfig cfg;
  try {
    cfg = RunConfig::load(opt.config);
  } catch (const ConfigError& e) {
    complain(opt.config.string() + ": " + e.what());
    return exit_config;
  }
  return dispatch(chosen->get_name(), cfg, opt);
}

}  // namespace bfam::cli
