#pragma once

#include <map>
#include <span>
#include <vector>

#include "nsstat/ensemble.hpp"
#include "nsstat/kernels.hpp"

namespace nsstat {

/// Quadrature on the unit sphere S^{d-1}, closed under n -> -n.
struct DirectionSet {
  int dim = 2;
  std::vector<Vec3> dirs;
  std::vector<double> weights;
  /// d = 2: equispaced angles 2πk/n. d = 3: reduced Gauss grid, Gauss–Legendre
  /// levels in z with an even number of equispaced azimuths per level
  /// proportional to sin θ + 1/2 (exact for n⊗n); counts that admit no such layout
  /// fall back to a Fibonacci hemisphere plus antipodes.
  /// n_dirs must be even and ≥ 8.
  static DirectionSet make(int dim, int n_dirs);
  std::size_t size() const { return dirs.size(); }
};

/// Offsets and weights (summing to 1) for the average over the ball B_r.
struct BallRule {
  std::vector<Vec3> offsets;
  std::vector<double> weights;
};

/// Gauss–Legendre radial nodes times a direction set, radial weight s^{d-1}.
BallRule ball_rule(const DirectionSet& dirs, double r, int radial_nodes);

struct StructureFunctionTable {
  double tau = 0.0;
  std::vector<double> r_grid;
  /// S_par[p][i] for p in {2, 3}.
  std::map<int, std::vector<double>> S_par;
  std::vector<double> S0_3;
  std::vector<double> S_perp_3;
  double E0 = 0.0;
};

/// Structure functions from a time-integrated correlation spectrum (weights
/// already include the trapezoid rule and the 1/M ensemble average).
StructureFunctionTable structure_functions(const CorrelationSpectrum& integrated, double tau,
                                           double E0, std::span<const double> r_grid,
                                           const DirectionSet& dirs, std::span<const int> p_list);

/// Time-ordered ensembles from t = 0 to τ = last time.
StructureFunctionTable structure_functions(std::span<const Ensemble> ensembles,
                                           std::span<const double> r_grid, const DirectionSet& dirs,
                                           std::span<const int> p_list);

/// Accumulates (1/M)·trapezoid-weighted spectra while a run streams snapshots.
/// observe() may be called concurrently for distinct members.
class SpectrumStream {
 public:
  SpectrumStream(const Grid& grid, std::size_t members, std::span<const double> times, bool cubic = true);
  void observe(std::size_t member, const VelocityField& field);
  /// Merged time-integrated spectrum, members summed in ascending order.
  CorrelationSpectrum integrated() const;
  /// Member means of the first and last snapshots (quadratic moments only).
  CorrelationSpectrum initial() const;
  CorrelationSpectrum last() const;
  const std::vector<double>& times() const { return times_; }

 private:
  Grid grid_;
  bool cubic_;
  std::vector<double> times_;
  std::vector<double> weights_;
  std::vector<CorrelationSpectrum> per_member_;
  std::vector<std::size_t> counters_;
  std::vector<CorrelationSpectrum> first_;
  std::vector<CorrelationSpectrum> last_;
};

struct BoundCheck {
  double ratio_S0 = 0.0;
  double ratio_par = 0.0;
  bool violated = false;
};

/// max_r |S³₀/r|/(2E₀) and max_r |S³‖/r|/(2E₀); violation above 1 + tol.
BoundCheck bound_check(const StructureFunctionTable& table, double tol = 0.05);

struct AnisotropyResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
};

/// d·⨍_{∂B_r}∫(δ_{rn}u·n)² against ⨍_{B_r}∫|δ_ℓu|², summed over fields.
AnisotropyResult weak_anisotropy_residual(std::span<const VelocityField> fields, double r,
                                          const DirectionSet& dirs, int radial_nodes = 16);

struct ScalingFit {
  double alpha = 0.0;
  double alpha_r_squared = 0.0;
  std::map<int, double> zeta;
  std::map<int, double> zeta_r_squared;
  std::map<int, double> she_leveque;
  double r_lo = 0.0;
  double r_hi = 0.0;
  std::size_t points = 0;
  /// S³‖ changed sign inside the range or points fell under the floor.
  bool degraded = false;
};

/// λ(p) = p/9 + 2(1 − (2/3)^{p/3}).
double she_leveque(double p);

/// Log-log fits on r ∈ [r_lo, r_hi]: ζ_p from S_par[p] vs r and α from
/// |S_par[2]| vs |S_par[3]| (when both present). Needs ≥ 6 usable points.
ScalingFit scaling_fit(std::span<const double> r_grid, const std::map<int, std::vector<double>>& S_par,
                       double r_lo, double r_hi, double floor = 1e-300);

/// n logarithmically spaced radii on [lo, hi].
std::vector<double> log_spaced(double lo, double hi, int n);

}  // namespace nsstat
