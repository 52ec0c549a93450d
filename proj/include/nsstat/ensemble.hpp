#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nsstat/field.hpp"
#include "nsstat/solver.hpp"

namespace nsstat {

enum class MeasureKind { RandomFourier, PerturbedBase };
enum class BaseFlow { None, TaylorGreen, Shear };

/// Initial probability measure with bounded L² support, sampled as
/// u = base + amp·w, where w is a random-phase field with shell spectrum
/// E(k) ∝ k^{-slope} on [k_min, k_max] normalised to unit mean-square velocity.
struct MeasureSpec {
  MeasureKind kind = MeasureKind::RandomFourier;
  double spectrum_slope = 5.0 / 3.0;
  int k_min = 1;
  int k_max = 8;
  BaseFlow base = BaseFlow::None;
  double perturbation_amp = 1.0;
  double support_radius = 10.0;
  std::uint64_t seed = 0;

  void validate(const Grid& grid) const;
};

std::string to_string(MeasureKind kind);
std::string to_string(BaseFlow base);
MeasureKind measure_kind_from_string(const std::string& s);
BaseFlow base_flow_from_string(const std::string& s);

/// Empirical measure: M equally weighted member fields at a common time.
struct Ensemble {
  std::vector<VelocityField> members;
  double time = 0.0;
  double nu = 0.0;
  MeasureSpec spec;
  std::vector<std::uint64_t> member_seeds;

  std::size_t size() const { return members.size(); }
  const Grid& grid() const;
  /// Shared grid/time/nu, divergence-free members, ‖u_m‖ ≤ R.
  void validate(double divergence_tol = 1e-10) const;
};

/// Named flows used as bases and test fixtures.
VelocityField taylor_green(const Grid& grid);
VelocityField shear_flow(const Grid& grid);

/// Counter-based 64-bit mixer (splitmix64 finaliser).
std::uint64_t mix64(std::uint64_t x);

Ensemble sample_initial(const MeasureSpec& spec, int members, const Grid& grid, double nu = 0.0);

using MemberObserver = std::function<void(std::size_t member, const VelocityField& snapshot)>;

/// Evolves every member and returns one ensemble per sample time (member
/// order preserved). The observer, when given, sees every output snapshot of
/// every member; `output_times` defaults to sample_times and must contain them.
std::vector<Ensemble> evolve(const Ensemble& ensemble, const SolverConfig& config,
                             std::span<const double> sample_times);
std::vector<Ensemble> evolve(const Ensemble& ensemble, const SolverConfig& config,
                             std::span<const double> sample_times,
                             std::span<const double> output_times, const MemberObserver& observer);

struct EnergyCheck {
  int k = 1;
  /// Signed defect per sample time: lhs − rhs of the ψ(s)=s^k energy inequality.
  std::vector<double> defects;
  double worst_defect = 0.0;
  /// worst_defect / mean ‖u(0)‖^{2k} (0 when that mean is 0).
  double worst_relative = 0.0;
};

/// ψ(s) = s^k statistical energy inequality for k = 1..K with trapezoid time
/// quadrature over the supplied ensembles.
std::vector<EnergyCheck> statistical_energy_check(std::span<const Ensemble> ensembles, int K);

/// Angle-averaged shell spectrum: E[s] = Σ_{round|k|=s} |û(k)|²·(2π)^d.
std::vector<double> shell_spectrum(const VelocityField& field);

nlohmann::json to_json(const MeasureSpec& spec);
MeasureSpec measure_spec_from_json(const nlohmann::json& j);

/// Writes member_XXXX.nsf snapshots plus manifest.json into dir.
void write_ensemble(const std::filesystem::path& dir, const Ensemble& ensemble);
Ensemble read_ensemble(const std::filesystem::path& dir);

}  // namespace nsstat
