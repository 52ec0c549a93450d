#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "nsstat/correlation.hpp"
#include "nsstat/khm.hpp"
#include "nsstat/solver.hpp"
#include "nsstat/structure.hpp"
#include "nsstat/vvlimit.hpp"

namespace nsstat {

nlohmann::json to_json(const FKResidual& r);
nlohmann::json to_json(const KHMBudget& b);
nlohmann::json to_json(const ScalingFit& f);
nlohmann::json to_json(const BoundCheck& b);
nlohmann::json to_json(const StatisticDistances& d);
nlohmann::json to_json(const InviscidScaling& s);
nlohmann::json to_json(const DCUniformity& u);
nlohmann::json to_json(const SweepPlan& p);
/// Scalar summary of one ν run (curves go to CSV).
nlohmann::json to_json(const NuReport& r);
nlohmann::json to_json(const SweepReport& r);

/// Rows (tau, r, p, S_par, S0_3, S_perp_3); S0_3 and S_perp_3 repeat per p.
void write_structure_csv(const std::filesystem::path& path, const StructureFunctionTable& table);

struct CorrelationRow {
  std::string observable;
  int k = 1;
  double t_or_tau = 0.0;
  double h_or_r = 0.0;
  double value = 0.0;
};

/// Appends rows (observable, k, t_or_tau, h_or_r, value); the header is
/// written when the file is new.
void append_correlation_csv(const std::filesystem::path& path, const std::vector<CorrelationRow>& rows);

/// Pretty-printed JSON with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

/// Snapshot directory plus index.json {config, times, files}.
void write_trajectory(const std::filesystem::path& dir, const Trajectory& trajectory,
                      const nlohmann::json& config);
Trajectory read_trajectory(const std::filesystem::path& dir);

/// {dir}/sweep.json plus {dir}/nu=VALUE/{structure.csv, correlation.csv, summary.json}.
void write_sweep(const std::filesystem::path& dir, const SweepReport& report, const nlohmann::json& provenance);

/// Directory-safe rendering of a viscosity, e.g. "nu=0.005".
std::string nu_label(double nu);

}  // namespace nsstat
