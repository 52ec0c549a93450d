#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

namespace nsstat {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Uniform periodic grid on the torus [0, 2π)^dim with n points per axis.
///
/// Real-space arrays are stored with the x index fastest. Spectral arrays use
/// the real-to-complex half layout: the x axis holds wavenumbers 0..n/2 and the
/// y/z axes hold the full range ordered as FFT output.
struct Grid {
  int dim = 2;
  int n = 32;

  /// Validates dim ∈ {2,3}, n ≥ 8 and n a power of two.
  static Grid make(int dim, int n);

  std::size_t points() const;
  std::size_t half_x() const { return static_cast<std::size_t>(n / 2 + 1); }
  std::size_t spectral_size() const;
  double dx() const { return kTwoPi / n; }
  double volume() const { return std::pow(kTwoPi, dim); }
  /// Quadrature weight of a grid point, (2π/n)^dim.
  double cell_volume() const { return volume() / static_cast<double>(points()); }
  /// Largest retained wavenumber magnitude per axis under the 2/3 rule.
  int dealias_cutoff() const { return n / 3; }

  bool operator==(const Grid&) const = default;
};

/// Signed wavenumber of FFT index i on an axis of n points.
inline int wavenumber(int i, int n) { return i <= n / 2 ? i : i - n; }

/// Integer wavevector and Hermitian multiplicity of each spectral slot.
///
/// `weight` is 1 on the kx = 0 and kx = n/2 planes and 2 elsewhere, so that a
/// sum over the half layout of weight·Re(c) equals the full-spectrum sum of a
/// Hermitian coefficient array.
struct SpectralLayout {
  Grid grid;
  std::vector<std::array<int, 3>> k;
  std::vector<double> k2;
  std::vector<double> weight;

  /// Shared, lazily built layout for a grid (thread safe).
  static const SpectralLayout& of(const Grid& grid);

  std::size_t size() const { return k.size(); }
  /// True when any |k_j| exceeds the 2/3-rule cutoff.
  bool outside_dealias_band(std::size_t idx) const;
  /// True when any component sits on the Nyquist wavenumber n/2.
  bool is_nyquist(std::size_t idx) const;
};

}  // namespace nsstat
