#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "nsstat/field.hpp"

namespace nsstat {

enum class Integrator { IFRK4 };

/// Time-integration settings for one trajectory.
struct SolverConfig {
  double nu = 0.0;
  /// Fixed step; when empty the step follows dt = cfl·Δx / max|u|.
  std::optional<double> dt;
  double cfl = 0.4;
  double t_end = 1.0;
  double snapshot_interval = 0.1;
  bool dealias = true;
  Integrator integrator = Integrator::IFRK4;
  /// Store every snapshot in the returned Trajectory (observers see them either way).
  bool keep_snapshots = true;

  void validate() const;
  /// 0, interval, 2·interval, … up to and including t_end.
  std::vector<double> output_times() const;
};

/// (t, E(t) = ∫|u|², 2ν∫₀ᵗ∫|∇u|²) recorded after every step.
struct EnergySample {
  double t = 0.0;
  double energy = 0.0;
  double dissipation = 0.0;
};

struct Trajectory {
  std::vector<VelocityField> snapshots;
  std::vector<double> times;
  SolverConfig config;
  std::vector<EnergySample> energy_series;
  std::size_t steps = 0;
};

using SnapshotObserver = std::function<void(const VelocityField&)>;

/// Nonlinear tendency −P[(u·∇)u], evaluated in divergence form with
/// (optionally) 2/3-rule dealiased products.
VelocityField rhs_eval(const VelocityField& field, bool dealias = true);

/// One integrating-factor RK4 step of size dt.
VelocityField step(const VelocityField& field, double nu, double dt, bool dealias = true);

/// Integrates from u0 (at u0.time()) to config.t_end, stopping exactly at each
/// output time. The observer is called at every output time including the start.
Trajectory run(const VelocityField& u0, const SolverConfig& config,
               const SnapshotObserver& observer = {});
Trajectory run(const VelocityField& u0, const SolverConfig& config,
               std::span<const double> output_times, const SnapshotObserver& observer = {});

/// max_t |E(t) + 2ν∫₀ᵗ|∇u|² − E(0)| / E(0).
double energy_budget(const Trajectory& trajectory);

}  // namespace nsstat
