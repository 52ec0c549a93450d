#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "nsstat/ensemble.hpp"

namespace nsstat {

struct TwoPointStat {
  std::string observable;
  double time = 0.0;
  bool time_integrated = false;
  /// Sorted by |h|.
  std::vector<Vec3> separations;
  std::vector<double> radii;
  std::vector<double> values;
};

/// (1/M) Σ_m ∫ g(x, u_m(x)) dx by grid quadrature.
double pair_observable(const Ensemble& ensemble,
                       const std::function<double(const Vec3& x, const Vec3& xi)>& g);

/// For each offset h: (1/M) Σ_m ∫ g(x, x+h, u_m(x), u_m(x+h)) dx.
std::vector<double> pair_observable(
    const Ensemble& ensemble,
    const std::function<double(const Vec3& x1, const Vec3& x2, const Vec3& xi1, const Vec3& xi2)>& g,
    std::span<const Vec3> offsets);

/// value(h) = (1/M) Σ_m ∫ u_m(x)·u_m(x+h) dx.
TwoPointStat two_point_correlation(const Ensemble& ensemble, std::span<const Vec3> offsets);

/// Deterministic offsets for the ball average over B_r: every lattice offset
/// with |y| < r when there are at least 8, otherwise 32 low-discrepancy
/// off-lattice offsets.
std::vector<Vec3> ball_offsets(const Grid& grid, double r);

/// ω_r^p = (1/M) Σ_m ∫ avg_{y∈B_r} |u_m(x+y) − u_m(x)|^p dx.
double dc_modulus(const Ensemble& ensemble, double r, double p = 2.0);
double dc_modulus(std::span<const VelocityField> fields, double r, double p = 2.0);

/// Smooth time factor θ(t) with θ(T) = 0 unless Constant.
struct TimeProfile {
  enum class Kind {
    /// ½(1 + cos(πt/T)).
    RaisedCosine,
    /// 1 − s(t/T) with s a smooth step whose derivatives all vanish at both ends.
    FlatStep,
    Constant,
  };
  Kind kind = Kind::RaisedCosine;
  double T = 1.0;
  double value(double t) const;
  double derivative(double t) const;
};

/// ψ(x) = a cos(k·x) + b sin(k·x) with a·k = b·k = 0.
struct FourierMode {
  std::array<int, 3> k{};
  Vec3 cos_amp{};
  Vec3 sin_amp{};
};

struct FKTestFunction {
  TimeProfile theta;
  std::vector<FourierMode> psi1;
  /// Spatial factor in x₂ for k = 2; psi1 is reused when empty.
  std::vector<FourierMode> psi2;
  std::string describe() const;
};

/// Samples a sum of Fourier modes; throws PreconditionError unless every mode
/// is divergence free.
VelocityField fourier_test_field(const Grid& grid, std::span<const FourierMode> modes);

struct FKResidual {
  int k = 1;
  std::string test_function;
  /// time_derivative, initial, terminal (only when θ(T) ≠ 0), advection, viscous.
  std::map<std::string, double> terms;
  double residual = 0.0;
  double scale = 0.0;
  double relative() const { return scale > 0.0 ? std::abs(residual) / scale : 0.0; }
};

/// Per-member scalar moments ⟨u,ψ⟩, ⟨u⊗u:∇ψ⟩, ⟨u,Δψ⟩ recorded at output times.
/// observe() may run concurrently for distinct members.
class FKProbe {
 public:
  FKProbe(const Grid& grid, const FKTestFunction& test, std::size_t members, std::span<const double> times);
  void observe(std::size_t member, const VelocityField& field);

  const FKTestFunction& test() const { return test_; }
  const std::vector<double>& times() const { return times_; }
  std::size_t members() const { return values_.size(); }

  struct Sample {
    double p1 = 0.0, a1 = 0.0, l1 = 0.0;
    double p2 = 0.0, a2 = 0.0, l2 = 0.0;
  };
  const Sample& sample(std::size_t member, std::size_t j) const { return values_[member][j]; }
  bool complete() const;

 private:
  FKTestFunction test_;
  std::vector<double> times_;
  VelocityField psi1_, psi2_;
  std::vector<std::vector<std::vector<double>>> grad1_, grad2_;
  VelocityField lap1_, lap2_;
  std::vector<std::vector<Sample>> values_;
  std::vector<std::size_t> counters_;
};

/// Weak form of the k-th moment equation (k = 1, 2) assembled with trapezoid
/// time quadrature. With inviscid = true the viscous term is left out.
FKResidual fk_residual(const FKProbe& probe, int k, double nu, bool inviscid = false);
FKResidual fk_residual(std::span<const Ensemble> ensembles, int k, const FKTestFunction& test, double nu,
                       bool inviscid = false);

/// Test data for the divergence constraint. f and g are scalar factors in x₁
/// and x₂; g_vec is the vector factor in x₂ for ℓ = 1, k = 2.
struct DivergenceTest {
  int k = 1;
  int ell = 1;
  std::function<double(const Vec3&)> f;
  std::function<double(const Vec3&)> g;
  std::function<Vec3(const Vec3&)> g_vec;
  std::function<Vec3(const Vec3&)> alpha;
};

struct DivergenceResidual {
  double value = 0.0;
  double scale = 0.0;
  double relative() const { return scale > 0.0 ? std::abs(value) / scale : 0.0; }
};

/// k = 1: (1/M)Σ ∫ u·∇f. k = 2, ℓ = 1: (1/M)Σ (∫u·∇f)(∫α(u)·g_vec).
/// k = 2, ℓ = 2: (1/M)Σ (∫u·∇f)(∫u·∇g).
DivergenceResidual divergence_constraint_residual(const Ensemble& ensemble, const DivergenceTest& test);

/// G(h) = h⁻² Σ_j (1/M) Σ_m ∫ |u_m(x + h e_j) − u_m(x)|² dx.
std::vector<double> gradient_two_point(const Ensemble& ensemble, std::span<const double> h_list);

/// (1/M) Σ_m |u_m|²_{H¹}.
double mean_h1(const Ensemble& ensemble);
double mean_energy(const Ensemble& ensemble);

}  // namespace nsstat
