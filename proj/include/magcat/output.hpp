#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "magcat/experiment.hpp"

namespace magcat {

/// Shortest round-trip-safe decimal form; identical inputs give identical text.
std::string format_number(double v);

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& t);
/// First row: re_min, re_max, re_n, im_min, im_max, im_n. Then one row per Im value.
void write_wigner_csv(const std::filesystem::path& path, const WignerGrid& grid);
void write_sweep_csv(const std::filesystem::path& path, const std::string& axis, const std::vector<SweepRow>& rows);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

json diagnostics_json(const Diagnostics& d);
json steady_json(const SteadySummary& s);

/// Output manifest; files are listed in insertion order with their digests.
class Manifest {
 public:
  Manifest(std::filesystem::path dir, const ScenarioConfig& config, const Model& model);

  json& body() { return body_; }
  /// Records a file that already exists under the output directory.
  void add_file(const std::string& name, const std::string& kind);
  void write() const;

 private:
  std::filesystem::path dir_;
  json body_;
};

/// Digest check for a directory holding manifest.json.
bool verify_manifest(const std::filesystem::path& dir, std::string* problem = nullptr);

}  // namespace magcat
