#ifndef BFAM_CLI_HPP
#define BFAM_CLI_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bfam/dynamics.hpp"
#include "bfam/experiments.hpp"

namespace bfam::cli {

namespace fs = std::filesystem;

enum ExitCode : int { exit_ok = 0, exit_config = 1, exit_blowup = 2, exit_acceptance = 3 };

/// Parse or validation failure; line() is 0 when no source line applies.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0);
  int line() const { return line_; }

 private:
  int line_;
};

struct ConfigValue {
  std::string text;
  int line = 0;
};

/// Flat "[section] key = value" document. '#' and ';' start comments.
class RunConfig {
 public:
  using Section = std::map<std::string, ConfigValue>;

  /// Throws ConfigError with the line number on syntax errors, duplicate
  /// keys, and keys outside the known schema.
  static RunConfig parse(std::string_view text);
  static RunConfig load(const fs::path& path);

  bool has(const std::string& section, const std::string& key) const;
  bool has_section(const std::string& section) const;
  const ConfigValue* find(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& section, const std::string& key,
                         std::optional<std::string> fallback = std::nullopt) const;
  double get_double(const std::string& section, const std::string& key,
                    std::optional<double> fallback = std::nullopt) const;
  int get_int(const std::string& section, const std::string& key, std::optional<int> fallback = std::nullopt) const;
  std::vector<double> get_list(const std::string& section, const std::string& key) const;

  void set(const std::string& section, const std::string& key, const std::string& value);
  void erase_section(const std::string& section);

  /// Sorted sections and keys, numbers normalised, [output] left out; the
  /// input of config_hash().
  std::string canonical() const;
  std::string config_hash() const;

  const std::map<std::string, Section>& sections() const { return sections_; }

 private:
  std::map<std::string, Section> sections_;
};

Grid grid_from(const RunConfig& cfg);
BParams params_from(const RunConfig& cfg);
/// dt = auto (or absent) uses default_time_step(u0).
SolverConfig solver_from(const RunConfig& cfg, const Field& u0);
/// Families: zero | gaussian{amp, width, center} | bump{center, radius, s_norm, target}
/// | mode{k, amp} | file{path}. Gaussian is amp exp(-((x - center)/width)^2),
/// mode is amp cos(pi k x / L).
Field initial_from(const RunConfig& cfg, const std::string& section, const Grid& grid);
NonUniformityConfig nonuniformity_from(const RunConfig& cfg);

struct Options {
  fs::path config;
  std::optional<fs::path> out;
  int jobs = 1;
  std::optional<double> tol;
  /// eulerian | lagrangian; each command picks its own default.
  std::optional<std::string> formulation;
};

fs::path output_dir(const RunConfig& cfg, const Options& opt);

int cmd_solve(const RunConfig& cfg, const Options& opt);
int cmd_conserve(const RunConfig& cfg, const Options& opt);
int cmd_nonuniform(const RunConfig& cfg, const Options& opt);
int cmd_exp(const RunConfig& cfg, const Options& opt);
int cmd_scalecheck(const RunConfig& cfg, const Options& opt);
int cmd_sweep(const RunConfig& cfg, const Options& opt);

/// Runs one command by name and maps exceptions onto exit codes.
int dispatch(std::string_view command, const RunConfig& cfg, const Options& opt);

/// Entry point behind the bfam executable.
int run(int argc, char** argv);

}  // namespace bfam::cli

#endif
