#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "bfam/cli.hpp"
#include "bfam/io.hpp"
#include "bfam/spectral.hpp"

namespace bfam::cli {

namespace {

const std::set<std::string> kDataKeys{"family", "amp", "width", "center", "radius", "s_norm", "target", "k", "path"};

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"grid", {"L", "N"}},
      {"params", {"b", "s"}},
      {"solver", {"dt", "T", "stride", "norm_cap", "min_phix", "christoffel_tol", "christoffel_max_iter"}},
      {"initial", kDataKeys},
      {"probe", kDataKeys},
      {"experiment", {"R", "n_values", "eps_dexp"}},
      {"scalecheck", {"lambda", "T"}},
      {"sweep", {"command", "b", "N"}},
      {"output", {"dir"}},
  };
  return s;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string where(const std::string& section, const std::string& key) { return "[" + section + "] " + key; }

double to_double(const ConfigValue& v, const std::string& section, const std::string& key) {
  try {
    return io::parse_double(v.text);
  } catch (const std::invalid_argument&) {
    throw ConfigError(where(section, key) + ": expected a number, got '" + v.text + "'", v.line);
  }
}

// Numbers are rewritten in shortest round-trip form so "2", "2.0" and "2e0" hash alike.
std::string normalise(const std::string& text) {
  std::string out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      if (!out.empty()) out += ',';
      out += io::format_double(io::parse_double(trim(item)));
    } catch (const std::invalid_argument&) {
      return text;
    }
  }
  return out.empty() ? text : out;
}

}  // namespace

ConfigError::ConfigError(const std::string& what, int line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

RunConfig RunConfig::parse(std::string_view text) {
  RunConfig cfg;
  std::string current;
  int lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    if (const auto c = line.find_first_of("#;"); c != std::string_view::npos) line = line.substr(0, c);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", lineno);
      current = std::string(trim(line.substr(1, line.size() - 2)));
      if (!schema().contains(current)) throw ConfigError("unknown section [" + current + "]", lineno);
      cfg.sections_[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", lineno);
    if (current.empty()) throw ConfigError("key outside of any section", lineno);
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("empty key", lineno);
    if (!schema().at(current).contains(key)) throw ConfigError("unknown key " + where(current, key), lineno);
    if (value.empty()) throw ConfigError(where(current, key) + ": empty value", lineno);
    auto& sec = cfg.sections_[current];
    if (sec.contains(key))
      throw ConfigError("duplicate key " + where(current, key) + " (first set on line " +
                            std::to_string(sec.at(key).line) + ")",
                        lineno);
    sec[key] = ConfigValue{value, lineno};
  }
  return cfg;
}

RunConfig RunConfig::load(const fs::path& path) {
  std::string text;
  try {
    text = io::read_text(path);
  } catch (const std::exception& e) {
    throw ConfigError("cannot read config " + path.string() + ": " + e.what());
  }
  return parse(text);
}

bool RunConfig::has_section(const std::string& section) const { return sections_.contains(section); }

bool RunConfig::has(const std::string& section, const std::string& key) const { return find(section, key) != nullptr; }

const ConfigValue* RunConfig::find(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return nullptr;
  const auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

std::string RunConfig::get_string(const std::string& section, const std::string& key,
                                  std::optional<std::string> fallback) const {
  if (const auto* v = find(section, key)) return v->text;
  if (fallback) return *fallback;
  throw ConfigError("missing required key " + where(section, key));
}

double RunConfig::get_double(const std::string& section, const std::string& key, std::optional<double> fallback) const {
  if (const auto* v = find(section, key)) return to_double(*v, section, key);
  if (fallback) return *fallback;
  throw ConfigError("missing required key " + where(section, key));
}

int RunConfig::get_int(const std::string& section, const std::string& key, std::optional<int> fallback) const {
  const auto* v = find(section, key);
  if (v == nullptr) {
    if (fallback) return *fallback;
    throw ConfigError("missing required key " + where(section, key));
  }
  const double d = to_double(*v, section, key);
  if (d != std::floor(d) || std::abs(d) > 2e9)
    throw ConfigError(where(section, key) + ": expected an integer, got '" + v->text + "'", v->line);
  return static_cast<int>(d);
}

std::vector<double> RunConfig::get_list(const std::string& section, const std::string& key) const {
  const auto* v = find(section, key);
  if (v == nullptr) throw ConfigError("missing required key " + where(section, key));
  std::vector<double> out;
  std::istringstream in(v->text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(to_double(ConfigValue{std::string(trim(item)), v->line}, section, key));
  if (out.empty()) throw ConfigError(where(section, key) + ": empty list", v->line);
  return out;
}

void RunConfig::set(const std::string& section, const std::string& key, const std::string& value) {
  if (!schema().contains(section) || !schema().at(section).contains(key))
    throw ConfigError("unknown key " + where(section, key));
  sections_[section][key] = ConfigValue{value, 0};
}

void RunConfig::erase_section(const std::string& section) { sections_.erase(section); }

std::string RunConfig::canonical() const {
  std::string out;
  for (const auto& [name, sec] : sections_) {
    if (sec.empty() || name == "output") continue;
    out += "[" + name + "]\n";
    for (const auto& [key, value] : sec) out += key + "=" + normalise(value.text) + "\n";
  }
  return out;
}

std::string RunConfig::config_hash() const { return io::hex64(io::fnv1a(canonical())); }

Grid grid_from(const RunConfig& cfg) {
  const double L = cfg.get_double("grid", "L", 20.0);
  const int N = cfg.get_int("grid", "N", 1024);
  try {
    return make_grid(L, N);
  } catch (const std::invalid_argument& e) {
    const auto* v = cfg.find("grid", "N");
    throw ConfigError(std::string("[grid]: ") + e.what(), v ? v->line : 0);
  }
}

BParams params_from(const RunConfig& cfg) {
  try {
    return BParams(cfg.get_double("params", "b", 2.0), cfg.get_double("params", "s", 2.0));
  } catch (const std::invalid_argument& e) {
    const auto* v = cfg.find("params", "s");
    throw ConfigError(std::string("[params]: ") + e.what(), v ? v->line : 0);
  }
}

SolverConfig solver_from(const RunConfig& cfg, const Field& u0) {
  SolverConfig c;
  const auto* dt = cfg.find("solver", "dt");
  c.dt = (dt == nullptr || dt->text == "auto") ? default_time_step(u0) : cfg.get_double("solver", "dt");
  c.T = cfg.get_double("solver", "T", 1.0);
  c.snapshot_stride = cfg.get_int("solver", "stride", 100);
  c.blowup_norm_cap = cfg.get_double("solver", "norm_cap", c.blowup_norm_cap);
  c.min_phix = cfg.get_double("solver", "min_phix", c.min_phix);
  c.christoffel_tol = cfg.get_double("solver", "christoffel_tol", c.christoffel_tol);
  c.christoffel_max_iter = cfg.get_int("solver", "christoffel_max_iter", c.christoffel_max_iter);
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[solver]: ") + e.what(), dt ? dt->line : 0);
  }
  return c;
}

Field initial_from(const RunConfig& cfg, const std::string& section, const Grid& grid) {
  if (!cfg.has_section(section)) throw ConfigError("missing section [" + section + "]");
  const std::string family = cfg.get_string(section, "family");
  const auto allowed = [&]() -> std::set<std::string> {
    if (family == "zero") return {"family"};
    if (family == "gaussian") return {"family", "amp", "width", "center"};
    if (family == "bump") return {"family", "center", "radius", "s_norm", "target"};
    if (family == "mode") return {"family", "k", "amp"};
    if (family == "file") return {"family", "path"};
    const auto* v = cfg.find(section, "family");
    throw ConfigError("[" + section + "] family: unknown family '" + family + "'", v ? v->line : 0);
  }();
  for (const auto& [key, value] : cfg.sections().at(section))
    if (!allowed.contains(key))
      throw ConfigError("key " + where(section, key) + " does not apply to family '" + family + "'", value.line);

  if (family == "zero") return Field::zeros(grid);
  if (family == "gaussian") {
    const double amp = cfg.get_double(section, "amp");
    const double width = cfg.get_double(section, "width");
    const double center = cfg.get_double(section, "center", 0.0);
    if (!(width > 0.0)) throw ConfigError(where(section, "width") + " must be positive", cfg.find(section, "width")->line);
    return Field::sample(grid, [&](double x) {
      const double t = (x - center) / width;
      return amp * std::exp(-t * t);
    });
  }
  if (family == "bump") {
    try {
      return build_bump(cfg.get_double(section, "center", 0.0), cfg.get_double(section, "radius"),
                        cfg.get_double(section, "s_norm", 2.0), cfg.get_double(section, "target"), grid);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("[" + section + "] bump: " + e.what(), cfg.find(section, "radius")->line);
    }
  }
  if (family == "mode") {
    const int k = cfg.get_int(section, "k");
    const double amp = cfg.get_double(section, "amp", 1.0);
    if (k < 0 || k > grid.n_points / 3)
      throw ConfigError(where(section, "k") + " must lie in [0, N/3]", cfg.find(section, "k")->line);
    return Field::sample(grid, [&](double x) { return amp * std::cos(grid.wavenumber(k) * x); });
  }
  const std::string path = cfg.get_string(section, "path");
  Field f = [&] {
    try {
      return io::read_field_csv(path);
    } catch (const std::exception& e) {
      throw ConfigError("[" + section + "] path: " + e.what(), cfg.find(section, "path")->line);
    }
  }();
  if (!(f.grid() == grid))
    throw ConfigError("[" + section + "] path: grid of " + path + " differs from [grid]", cfg.find(section, "path")->line);
  return f;
}

NonUniformityConfig nonuniformity_from(const RunConfig& cfg) {
  const Grid grid = grid_from(cfg);
  const Field u0 = initial_from(cfg, "initial", grid);
  const Field v = initial_from(cfg, "probe", grid);
  NonUniformityConfig nc{.u0 = u0, .v = v, .params = params_from(cfg)};
  nc.R = cfg.get_double("experiment", "R", nc.R);
  nc.eps_dexp = cfg.get_double("experiment", "eps_dexp", nc.eps_dexp);
  if (cfg.has("experiment", "n_values")) {
    nc.n_values.clear();
    const int line = cfg.find("experiment", "n_values")->line;
    for (double n : cfg.get_list("experiment", "n_values")) {
      if (n < 1 || n != std::floor(n)) throw ConfigError("[experiment] n_values must be integers >= 1", line);
      nc.n_values.push_back(static_cast<int>(n));
    }
  }
  if (!(nc.R > 0.0)) throw ConfigError("[experiment] R must be positive", cfg.find("experiment", "R")->line);
  nc.solver = solver_from(cfg, u0 + v);
  return nc;
}

}  // namespace bfam::cli
