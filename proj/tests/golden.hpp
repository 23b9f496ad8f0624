// Golden-hash regression for one solve per formulation. Entries are keyed by
// a platform profile; the first run on a new profile records its entry.
#ifndef BFAM_TESTS_GOLDEN_HPP
#define BFAM_TESTS_GOLDEN_HPP

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "bfam/dynamics.hpp"
#include "bfam/io.hpp"
#include "bfam/spectral.hpp"

namespace golden {

namespace fs = std::filesystem;

inline std::string platform_profile() {
  std::string arch =
#if defined(__x86_64__)
      "x86_64";
#elif defined(__aarch64__)
      "aarch64";
#else
      "unknown-arch";
#endif
#if defined(__clang__)
  std::string compiler = "clang-" __clang_version__;
#elif defined(__GNUC__)
  std::string compiler = "gcc-" __VERSION__;
#else
  std::string compiler = "cc";
#endif
#if defined(__OPTIMIZE__)
  const std::string opt = "opt";
#else
  const std::string opt = "noopt";
#endif
  std::string profile = arch + "|" + compiler + "|" + opt + "|" + bfam::fft::backend();
  std::replace(profile.begin(), profile.end(), ' ', '_');
  return profile;
}

/// Hash of every file the trajectory writer emits, in manifest order.
inline std::string directory_hash(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto& f : files) {
    all += f.filename().string();
    all += '\0';
    all += bfam::io::read_text(f);
  }
  return bfam::io::hex64(bfam::io::fnv1a(all));
}

/// Gaussian 0.5 exp(-(x/2)^2), b = 2, s = 2, L = 20, N = 1024, dt = 1e-3, T = 1.
inline std::string golden_run(const std::string& formulation, const fs::path& dir) {
  using namespace bfam;
  const Grid g = make_grid(20, 1024);
  const Field u0 = Field::sample(g, [](double x) { return 0.5 * std::exp(-x * x / 4); });
  const BParams p(2, 2);
  SolverConfig c;
  c.dt = 1e-3;
  c.T = 1;
  c.snapshot_stride = 250;
  fs::remove_all(dir);
  if (formulation == "eulerian")
    io::write_trajectory(dir, solve_eulerian(u0, p, c), "golden");
  else
    io::write_trajectory(dir, solve_geodesic(u0, p, c), "golden");
  return directory_hash(dir);
}

struct Verdict {
  bool ok = false;
  bool recorded = false;
  std::string expected;
};

/// Compares against the stored entry, recording it when the profile is new.
inline Verdict check(const fs::path& file, const std::string& formulation, const std::string& hash) {
  nlohmann::json doc = nlohmann::json::object();
  if (fs::exists(file)) doc = nlohmann::json::parse(bfam::io::read_text(file));
  const std::string profile = platform_profile();
  auto& entry = doc[profile];
  if (entry.contains(formulation)) {
    const std::string expected = entry[formulation].get<std::string>();
    return {expected == hash, false, expected};
  }
  entry[formulation] = hash;
  fs::create_directories(file.parent_path());
  bfam::io::write_text(file, doc.dump(2) + "\n");
  return {true, true, hash};
}

}  // namespace golden

#endif
