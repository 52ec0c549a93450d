#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nsstat/correlation.hpp"
#include "nsstat/ensemble.hpp"
#include "nsstat/khm.hpp"
#include "nsstat/solver.hpp"
#include "nsstat/structure.hpp"

namespace nsstat {

struct SweepPlan {
  /// Non-increasing positive viscosities sharing one initial measure.
  std::vector<double> nus;
  MeasureSpec spec;
  Grid grid;
  int members = 8;
  double t_end = 1.0;
  double cfl = 0.4;
  /// Interval of the snapshots feeding correlation spectra.
  double snapshot_interval = 0.05;
  /// Interval of the streamed FK moments and energies (divides snapshot_interval).
  double fk_interval = 0.01;
  /// Radii for DC curves, structure functions and correlation curves.
  std::vector<double> r_grid;
  int directions = 32;
  FKTestFunction fk_test;
  RadialProfile khm_omega = RadialProfile::bump(0.4);

  void validate() const;
  /// Fine output times 0, fk_interval, ..., t_end.
  std::vector<double> fine_times() const;
  std::vector<double> snapshot_times() const;
};

struct BlowUpRecord {
  int member = -1;
  double time = 0.0;
  std::string message;
};

struct NuReport {
  double nu = 0.0;
  /// n/3 ≥ ν^{-1/2}.
  bool resolved = true;
  bool failed = false;
  std::vector<BlowUpRecord> blowups;

  std::vector<double> times;
  std::vector<double> mean_energy;
  /// max_t [mean E(t) + 2ν∫mean|∇u|² − mean E(0)] / mean E(0).
  double energy_defect = 0.0;

  /// ∫₀ᵀ ω_r² dt on the plan's r_grid.
  std::vector<double> dc_integrated;
  FKResidual fk1, fk2, fk1_inviscid, fk2_inviscid;
  StructureFunctionTable structure;
  BoundCheck bounds;
  KHMBudget khm;

  /// Final-time data for statistic distances.
  Ensemble final_ensemble;
  std::vector<double> correlation_curve;
};

struct StatisticDistances {
  double mean_field = 0.0;
  double correlation = 0.0;
  double wasserstein = 0.0;
  /// Jackknife standard errors over paired members.
  double se_mean_field = 0.0;
  double se_correlation = 0.0;
  double se_wasserstein = 0.0;
};

struct InviscidScaling {
  int k = 1;
  std::vector<double> nus;
  std::vector<double> residuals;
  double slope = 0.0;
  double r_squared = 0.0;
};

struct DCUniformity {
  bool fit_skipped = false;
  double alpha = 0.0;
  double C = 0.0;
  double r_squared = 0.0;
  double worst_nu = 0.0;
  std::vector<double> envelope;
  bool nu_monotone = false;
  bool envelope_nondecreasing = false;
};

struct SweepReport {
  SweepPlan plan;
  std::vector<NuReport> runs;
  /// Between runs i and i+1.
  std::vector<StatisticDistances> distances;
  DCUniformity dc;
  InviscidScaling inviscid_k1, inviscid_k2;
};

using SweepLog = std::function<void(const std::string&)>;

/// Full pipeline for one ν.
NuReport run_single(const SweepPlan& plan, double nu);
SweepReport run_sweep(const SweepPlan& plan, const SweepLog& log = {});

/// Envelope sup_ν of the curves fitted against C r^α.
DCUniformity dc_uniformity(std::span<const double> nus, std::span<const double> r_grid,
                           const std::vector<std::vector<double>>& curves);
DCUniformity dc_uniformity(const SweepReport& report);

/// |inviscid residual| per ν and its log-log slope against ν.
InviscidScaling inviscid_fk_residual(const std::vector<NuReport>& runs, int k);

/// Distances between two final-time ensembles; probes are 8 fixed grid points.
StatisticDistances statistic_distance(const Ensemble& a, const Ensemble& b, std::span<const double> r_grid,
                                      const DirectionSet& dirs);
StatisticDistances statistic_distance(const SweepReport& report, std::size_t i, std::size_t j);

/// Radial correlation curve (1/M)Σ ⨍_S ∫u·u(x + r n) on r_grid.
std::vector<double> correlation_curve(std::span<const VelocityField> fields, std::span<const double> r_grid,
                                      const DirectionSet& dirs);

/// Wasserstein-1 distance between two empirical distributions on ℝ.
double wasserstein1(std::vector<double> a, std::vector<double> b);

}  // namespace nsstat
