#ifndef BFAM_IO_HPP
#define BFAM_IO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

#include "bfam/diagnostics.hpp"
#include "bfam/dynamics.hpp"
#include "bfam/experiments.hpp"

namespace bfam::io {

namespace fs = std::filesystem;

/// Shortest form that carries 17 significant digits ("%.17g" semantics),
/// locale independent.
std::string format_double(double v);
double parse_double(std::string_view text);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t h);

/// Field snapshot: header "x,value", one row per grid point.
std::string field_csv(const Field& f);
void write_field_csv(const fs::path& path, const Field& f);
/// Grid is recovered from the x column (L = -x_0, N = row count).
Field read_field_csv(const fs::path& path);

/// Diffeomorphism snapshot: header "x,displacement".
void write_diffeo_csv(const fs::path& path, const Diffeomorphism& phi);
Diffeomorphism read_diffeo_csv(const fs::path& path);

/// Header "t,res_hs2,res_sup,relative".
void write_conservation_csv(const fs::path& path, const ConservationReport& report);

/// Header "n,r_n,input_dist,output_dist,momentum_output_dist,witness_gap,disjoint_ok,resolved_ok".
void write_experiment_csv(const fs::path& path, const ExperimentReport& report);
nlohmann::json experiment_sidecar(const ExperimentReport& report, std::string_view config_hash);

nlohmann::json to_json(const BParams& p);
nlohmann::json to_json(const SolverConfig& c);
nlohmann::json to_json(const Grid& g);

/// Writes snapshot CSVs and manifest.json into dir. The manifest lists files
/// relative to dir.
void write_trajectory(const fs::path& dir, const EulerianTrajectory& traj, std::string_view config_hash);
void write_trajectory(const fs::path& dir, const LagrangianTrajectory& traj, std::string_view config_hash);

EulerianTrajectory read_eulerian_trajectory(const fs::path& dir);
LagrangianTrajectory read_lagrangian_trajectory(const fs::path& dir);

void write_text(const fs::path& path, std::string_view text);
std::string read_text(const fs::path& path);

}  // namespace bfam::io

#endif
