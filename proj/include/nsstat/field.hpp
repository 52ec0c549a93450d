#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nsstat/grid.hpp"

namespace nsstat {

/// A labelled finite scalar such as an energy or a seminorm.
struct ScalarStat {
  double value = 0.0;
  std::string label;

  ScalarStat(double v, std::string l);
};

/// Periodic vector field on the torus with both real-space values and Fourier
/// coefficients.
///
/// Real space is the source of truth. The spectral mirror is computed when the
/// field is built, so a constructed field is immutable and may be shared
/// between threads freely.
class VelocityField {
 public:
  VelocityField(const Grid& grid, std::vector<std::vector<double>> components, double time = 0.0,
                double nu = 0.0);

  static VelocityField zero(const Grid& grid, double time = 0.0, double nu = 0.0);
  static VelocityField from_spectral(const Grid& grid, std::vector<std::vector<cplx>> spectral,
                                     double time = 0.0, double nu = 0.0);
  /// Samples f at every grid point x = 2π·i/n; f returns the velocity (unused
  /// trailing components are ignored in 2D).
  static VelocityField from_function(const Grid& grid, const std::function<Vec3(const Vec3&)>& f,
                                     double time = 0.0, double nu = 0.0);

  const Grid& grid() const { return grid_; }
  int dim() const { return grid_.dim; }
  double time() const { return time_; }
  double nu() const { return nu_; }

  std::span<const double> component(int i) const { return real_[static_cast<std::size_t>(i)]; }
  std::span<const cplx> spectral(int i) const { return spectral_[static_cast<std::size_t>(i)]; }
  const std::vector<std::vector<double>>& components() const { return real_; }
  const std::vector<std::vector<cplx>>& spectral_components() const { return spectral_; }

  /// Same values, new time/viscosity metadata.
  VelocityField with_metadata(double time, double nu) const;
  VelocityField scaled(double factor) const;

 private:
  VelocityField() = default;

  Grid grid_;
  double time_ = 0.0;
  double nu_ = 0.0;
  std::vector<std::vector<double>> real_;
  std::vector<std::vector<cplx>> spectral_;
};

/// Coordinates of grid point `idx` (x fastest).
Vec3 grid_point(const Grid& grid, std::size_t idx);

VelocityField fft_roundtrip(const VelocityField& field);

/// Modewise û ↦ û − k̂(k̂·û); the zero mode is removed.
VelocityField leray_project(const VelocityField& field);

/// ∫|u|² dx via Parseval.
ScalarStat energy(const VelocityField& field);
/// ∫|∇u|² dx via Parseval.
ScalarStat h1_seminorm_sq(const VelocityField& field);

/// u(· + offset) for any real offset, by spectral phase factors.
VelocityField shift_eval(const VelocityField& field, const Vec3& offset);

/// 2/3 rule: zero every mode with some |k_j| > n/3.
VelocityField dealias(const VelocityField& field);

/// max_k |k·û(k)| / max_k |û(k)|; 0 for the zero field.
double divergence_ratio(const VelocityField& field);
/// |û(0)| summed over components.
double mean_mode_magnitude(const VelocityField& field);

/// ∫ u·v dx via Parseval.
double inner_product(const VelocityField& u, const VelocityField& v);
/// ∫ |u|² dx by rectangle quadrature in real space.
double real_space_energy(const VelocityField& field);
double max_abs_difference(const VelocityField& a, const VelocityField& b);
/// ‖a − b‖_{L²}.
double l2_distance(const VelocityField& a, const VelocityField& b);

VelocityField add(const VelocityField& a, const VelocityField& b, double b_scale = 1.0);

/// Spectral gradient of a scalar sampled on the grid.
VelocityField gradient_of_scalar(const Grid& grid, std::span<const double> psi);
/// Spectral derivatives ∂_j u_i on the grid, indexed [i][j].
std::vector<std::vector<std::vector<double>>> velocity_gradient(const VelocityField& field);
/// Spectral Laplacian of each component.
VelocityField laplacian(const VelocityField& field);

namespace detail {
/// Σ over the full spectrum of a per-slot real quantity, using Hermitian weights.
double spectral_sum(const Grid& grid, const std::function<double(std::size_t)>& term);
}  // namespace detail

}  // namespace nsstat
