#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "phi4lab/partition.hpp"

namespace phi4lab {

inline constexpr const char* kArtifactVersion = "phi4lab 1.0.0";

// Flat declarative run configuration; one key = value per line, '#' comments.
struct RunConfig {
  std::string experiment;  // covariance | lln | decorrelation | ldp-synthetic | case-study
  int d = 4;
  std::vector<int> n_range;
  std::string schedule;  // preset name, or empty when g/m/a are inline
  std::string schedule_g, schedule_m, schedule_a;  // inline closed forms over n
  uint64_t samples = 500;
  uint64_t seed = 1;
  std::string out = "runs/out";
  int threads = 2;
  int grid = 0;  // 0 = auto
  double torus = 2.0;
  double mollifier_width = 0.25;
  uint64_t budget_mb = 4096;
  std::vector<int> powers{2, 3, 4};
  std::string cells_csv = "tracked";  // none | tracked | all

  void validate() const;
  std::string serialize() const;  // canonical form (fixed key order)
  static RunConfig parse(const std::string& text);
  static RunConfig from_file(const std::string& path);
  uint64_t config_hash() const;
  LabOptions lab_options() const;
  RenormSchedule build_schedule(const std::vector<int>& ns) const;
};

struct ManifestFile {
  std::string path;  // relative to the run directory
  uint64_t checksum = 0;
  uint64_t bytes = 0;
};

struct RunManifest {
  uint64_t config_hash = 0;
  uint64_t seed = 0;
  std::string started_at;
  std::string finished_at;
  std::string artifact_version;
  std::string experiment;
  std::vector<ManifestFile> files;

  std::string to_json() const;
  static RunManifest from_json_file(const std::string& path);
};

struct RunResult {
  RunManifest manifest;
  int exit_status = 0;  // 0 ok, 5 inconclusive trend
  std::string verdict_line;
};

// Executes the configured experiment, writes tables/ and verdict.json under
// config.out, and returns the manifest (also written as manifest.json).
RunResult run(const RunConfig& config);

// Verifies checksums, prints a human summary, writes plotspec.json.
// Throws an integrity error when a listed file does not match.
std::string report(const std::string& run_dir);

uint64_t fnv1a_file(const std::string& path);
uint64_t fnv1a_bytes(const void* data, size_t len, uint64_t h = 0xcbf29ce484222325ULL);

}  // namespace phi4lab
