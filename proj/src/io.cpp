#include "bfam/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bfam::io {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  return v;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_text(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::string two_column_csv(const Grid& g, std::span<const double> values, std::string_view header) {
  std::string out(header);
  out += '\n';
  for (int j = 0; j < g.n_points; ++j) {
    out += format_double(g.x(j));
    out += ',';
    out += format_double(values[j]);
    out += '\n';
  }
  return out;
}

Field read_two_column_csv(const fs::path& path, std::string_view header) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line) || (line != header && line != std::string(header) + "\r"))
    throw std::runtime_error(path.string() + ": expected header '" + std::string(header) + "'");
  std::vector<double> xs, vs;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": missing ','");
    try {
      xs.push_back(parse_double(std::string_view(line).substr(0, comma)));
      vs.push_back(parse_double(std::string_view(line).substr(comma + 1)));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (xs.empty()) throw std::runtime_error(path.string() + ": no rows");
  const Grid g = make_grid(-xs.front(), static_cast<int>(xs.size()));
  for (int j = 0; j < g.n_points; ++j)
    if (std::abs(xs[j] - g.x(j)) > 1e-9 * g.half_length)
      throw std::runtime_error(path.string() + ": x column is not a uniform grid on [-L, L) at row " +
                               std::to_string(j + 2));
  return Field(g, std::move(vs));
}

std::string snapshot_name(std::string_view stem, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%05zu.csv", i);
  return std::string(stem) + buf;
}

nlohmann::json manifest_head(std::string_view formulation, const Grid& g, const BParams& p, const SolverConfig& c,
                             Termination term, const std::vector<double>& times, std::string_view hash) {
  nlohmann::json m;
  m["formulation"] = formulation;
  m["grid"] = to_json(g);
  m["params"] = to_json(p);
  m["config"] = to_json(c);
  m["termination"] = std::string(to_string(term));
  m["times"] = times;
  m["config_hash"] = hash;
  return m;
}

SolverConfig config_from_json(const nlohmann::json& j) {
  SolverConfig c;
  c.dt = j.at("dt").get<double>();
  c.T = j.at("T").get<double>();
  c.snapshot_stride = j.at("snapshot_stride").get<int>();
  c.blowup_norm_cap = j.at("blowup_norm_cap").get<double>();
  c.min_phix = j.at("min_phix").get<double>();
  c.christoffel_tol = j.at("christoffel_tol").get<double>();
  c.christoffel_max_iter = j.at("christoffel_max_iter").get<int>();
  return c;
}

}  // namespace

std::string field_csv(const Field& f) { return two_column_csv(f.grid(), f.values(), "x,value"); }

void write_field_csv(const fs::path& path, const Field& f) { write_text(path, field_csv(f)); }

Field read_field_csv(const fs::path& path) { return read_two_column_csv(path, "x,value"); }

void write_diffeo_csv(const fs::path& path, const Diffeomorphism& phi) {
  write_text(path, two_column_csv(phi.grid(), phi.displacement().values(), "x,displacement"));
}

Diffeomorphism read_diffeo_csv(const fs::path& path) {
  return Diffeomorphism(read_two_column_csv(path, "x,displacement"));
}

void write_conservation_csv(const fs::path& path, const ConservationReport& report) {
  std::string out = "t,res_hs2,res_sup,relative\n";
  for (std::size_t i = 0; i < report.times.size(); ++i) {
    out += format_double(report.times[i]) + ',' + format_double(report.residual_s_minus_2[i]) + ',' +
           format_double(report.residual_sup[i]) + ',' + (report.relative ? "1" : "0") + '\n';
  }
  write_text(path, out);
}

void write_experiment_csv(const fs::path& path, const ExperimentReport& report) {
  std::string out = "n,r_n,input_dist,output_dist,momentum_output_dist,witness_gap,disjoint_ok,resolved_ok\n";
  for (const auto& r : report.rows) {
    out += std::to_string(r.n) + ',' + format_double(r.r_n) + ',' + format_double(r.input_distance) + ',' +
           format_double(r.output_distance) + ',' + format_double(r.momentum_output_distance) + ',' +
           format_double(r.witness_gap) + ',' + (r.disjoint_ok ? "1" : "0") + ',' + (r.resolved_ok ? "1" : "0") +
           '\n';
  }
  write_text(path, out);
}

nlohmann::json experiment_sidecar(const ExperimentReport& report, std::string_view config_hash) {
  nlohmann::json j;
  j["m_est"] = report.m_est;
  j["x0_est"] = report.x0_est;
  j["L_est"] = report.L_est;
  j["v_norm"] = report.v_norm;
  j["witness_bound_holds"] = report.witness_bound_holds();
  j["separation_persists"] = report.separation_persists();
  j["disjoint_holds"] = report.disjoint_holds();
  j["config_hash"] = config_hash;
  return j;
}

nlohmann::json to_json(const BParams& p) { return {{"b", p.b()}, {"s", p.s()}}; }

nlohmann::json to_json(const SolverConfig& c) {
  return {{"dt", c.dt},
          {"T", c.T},
          {"snapshot_stride", c.snapshot_stride},
          {"blowup_norm_cap", c.blowup_norm_cap},
          {"min_phix", c.min_phix},
          {"christoffel_tol", c.christoffel_tol},
          {"christoffel_max_iter", c.christoffel_max_iter}};
}

nlohmann::json to_json(const Grid& g) { return {{"L", g.half_length}, {"N", g.n_points}}; }

void write_trajectory(const fs::path& dir, const EulerianTrajectory& traj, std::string_view config_hash) {
  fs::create_directories(dir);
  nlohmann::json m = manifest_head("eulerian", traj.states.front().grid(), traj.params, traj.config,
                                   traj.termination, traj.times, config_hash);
  nlohmann::json snaps = nlohmann::json::array();
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const std::string name = snapshot_name("u", i);
    write_field_csv(dir / name, traj.states[i]);
    snaps.push_back({{"t", traj.times[i]}, {"u", name}});
  }
  m["snapshots"] = snaps;
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

void write_trajectory(const fs::path& dir, const LagrangianTrajectory& traj, std::string_view config_hash) {
  fs::create_directories(dir);
  nlohmann::json m = manifest_head("lagrangian", traj.states.front().phit.grid(), traj.params, traj.config,
                                   traj.termination, traj.times, config_hash);
  nlohmann::json snaps = nlohmann::json::array();
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const std::string phi_name = snapshot_name("phi", i);
    const std::string phit_name = snapshot_name("phit", i);
    write_diffeo_csv(dir / phi_name, traj.states[i].phi);
    write_field_csv(dir / phit_name, traj.states[i].phit);
    snaps.push_back({{"t", traj.times[i]}, {"phi", phi_name}, {"phit", phit_name}});
  }
  m["snapshots"] = snaps;
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

EulerianTrajectory read_eulerian_trajectory(const fs::path& dir) {
  const auto m = nlohmann::json::parse(read_text(dir / "manifest.json"));
  if (m.at("formulation") != "eulerian") throw std::runtime_error("not an Eulerian trajectory: " + dir.string());
  EulerianTrajectory traj{BParams(m["params"].at("b").get<double>(), m["params"].at("s").get<double>()),
                          config_from_json(m.at("config")),
                          {},
                          {},
                          termination_from_string(m.at("termination").get<std::string>())};
  for (const auto& s : m.at("snapshots")) {
    traj.times.push_back(s.at("t").get<double>());
    traj.states.push_back(read_field_csv(dir / s.at("u").get<std::string>()));
  }
  return traj;
}

LagrangianTrajectory read_lagrangian_trajectory(const fs::path& dir) {
  const auto m = nlohmann::json::parse(read_text(dir / "manifest.json"));
  if (m.at("formulation") != "lagrangian") throw std::runtime_error("not a Lagrangian trajectory: " + dir.string());
  LagrangianTrajectory traj{BParams(m["params"].at("b").get<double>(), m["params"].at("s").get<double>()),
                            config_from_json(m.at("config")),
                            {},
                            {},
                            termination_from_string(m.at("termination").get<std::string>())};
  for (const auto& s : m.at("snapshots")) {
    traj.times.push_back(s.at("t").get<double>());
    traj.states.push_back(SprayState{read_diffeo_csv(dir / s.at("phi").get<std::string>()),
                                     read_field_csv(dir / s.at("phit").get<std::string>())});
  }
  return traj;
}

}  // namespace bfam::io
