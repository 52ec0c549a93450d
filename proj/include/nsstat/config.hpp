#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nsstat/ensemble.hpp"
#include "nsstat/error.hpp"
#include "nsstat/khm.hpp"
#include "nsstat/solver.hpp"

namespace nsstat {

inline constexpr int kSchemaVersion = 1;

std::string code_version();

struct AnalysisOptions {
  double r_min = 0.05;
  double r_max = 1.5;
  int r_points = 24;
  int directions = 64;
  int radial_nodes = 16;
  double khm_s0 = 0.4;
  int khm_radial_nodes = 48;
  int khm_directions = 64;
  /// Interval of streamed FK moments (divides the solver snapshot_interval).
  double fk_interval = 0.01;
};

struct VVOptions {
  std::vector<double> nus{1e-2, 5e-3, 2.5e-3, 1.25e-3};
};

/// Everything a pipeline run needs, as read from a JSON config.
struct RunConfig {
  int schema_version = kSchemaVersion;
  Grid grid;
  SolverConfig solver;
  MeasureSpec measure;
  int members = 8;
  AnalysisOptions analysis;
  VVOptions vv;

  nlohmann::json to_json() const;
  /// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
  std::string hash() const;
};

struct Violation {
  std::string path;
  std::string message;
};

/// Config rejected; carries every violation found.
class ConfigViolations : public ConfigError {
 public:
  explicit ConfigViolations(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }
  nlohmann::json to_json() const;

 private:
  std::vector<Violation> violations_;
};

/// Validates against the schema (unknown keys rejected, all violations
/// collected) and fills defaults.
RunConfig parse_config(const nlohmann::json& j);
RunConfig parse_config(const std::filesystem::path& path);

/// The JSON schema the validator enforces.
nlohmann::json config_schema();

/// Provenance block {config_hash, code_version}.
nlohmann::json provenance(const RunConfig& config);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace nsstat
