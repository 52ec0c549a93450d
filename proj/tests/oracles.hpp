#pragma once

// Independent reference computations for the unit tests. Nothing here calls
// the library's FFT or spectral kernels.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "nsstat/field.hpp"

namespace oracle {

inline constexpr double pi = std::numbers::pi;

/// Direct O(N²) DFT coefficient (1/n^d) Σ f(x) e^{-ik·x} for a real grid array.
inline std::complex<double> dft_coefficient(const nsstat::Grid& g, const std::vector<double>& f, int kx, int ky,
                                            int kz = 0) {
  std::complex<double> acc = 0.0;
  const int nz = g.dim == 3 ? g.n : 1;
  for (int z = 0; z < nz; ++z)
    for (int y = 0; y < g.n; ++y)
      for (int x = 0; x < g.n; ++x) {
        const double phase = 2.0 * pi * (kx * x + ky * y + kz * z) / g.n;
        acc += f[static_cast<std::size_t>(x + g.n * (y + g.n * z))] * std::polar(1.0, -phase);
      }
  return acc / static_cast<double>(g.points());
}

/// ∫ g(x) dx over the torus by the rectangle rule with n points per axis.
inline double grid_integral(int dim, int n, const std::function<double(double, double, double)>& g) {
  const double h = 2.0 * pi / n;
  double acc = 0.0;
  const int nz = dim == 3 ? n : 1;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) acc += g(i * h, j * h, k * h);
  return acc * std::pow(h, dim);
}

/// Uniform random real field, not divergence free.
inline nsstat::VelocityField random_field(const nsstat::Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<std::vector<double>> c(static_cast<std::size_t>(g.dim), std::vector<double>(g.points()));
  for (auto& comp : c)
    for (auto& v : comp) v = normal(rng);
  return nsstat::VelocityField(g, std::move(c));
}

/// Random trigonometric field with every |k_j| ≤ kmax, not divergence free.
inline nsstat::VelocityField random_bandlimited(const nsstat::Grid& g, int kmax, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  struct Mode {
    int k[3];
    double a[3], b[3];
  };
  std::vector<Mode> modes;
  const int kz_max = g.dim == 3 ? kmax : 0;
  for (int kx = 0; kx <= kmax; ++kx)
    for (int ky = -kmax; ky <= kmax; ++ky)
      for (int kz = -kz_max; kz <= kz_max; ++kz)
        modes.push_back({{kx, ky, kz}, {U(rng), U(rng), U(rng)}, {U(rng), U(rng), U(rng)}});
  return nsstat::VelocityField::from_function(g, [&](const nsstat::Vec3& x) -> nsstat::Vec3 {
    nsstat::Vec3 u{0.0, 0.0, 0.0};
    for (const auto& m : modes) {
      const double ph = m.k[0] * x[0] + m.k[1] * x[1] + m.k[2] * x[2];
      const double c = std::cos(ph), s = std::sin(ph);
      for (int i = 0; i < 3; ++i) u[i] += m.a[i] * c + m.b[i] * s;
    }
    return u;
  });
}

/// Divergence-free trigonometric field: ∇⊥ of a random stream function in 2D,
/// curl of a random vector potential in 3D; bandlimited to |k_j| ≤ kmax.
inline nsstat::VelocityField random_solenoidal(const nsstat::Grid& g, int kmax, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  struct Mode {
    int k[3];
    double a[3], b[3];
  };
  std::vector<Mode> modes;
  const int kz_max = g.dim == 3 ? kmax : 0;
  for (int kx = 0; kx <= kmax; ++kx)
    for (int ky = -kmax; ky <= kmax; ++ky)
      for (int kz = -kz_max; kz <= kz_max; ++kz) {
        if (kx == 0 && (ky < 0 || (ky == 0 && kz <= 0))) continue;
        modes.push_back({{kx, ky, kz}, {U(rng), U(rng), U(rng)}, {U(rng), U(rng), U(rng)}});
      }
  // Potential A = Σ a cos(k·x) + b sin(k·x); u = curl A (2D: A scalar in slot 2).
  return nsstat::VelocityField::from_function(g, [&](const nsstat::Vec3& x) -> nsstat::Vec3 {
    nsstat::Vec3 u{0.0, 0.0, 0.0};
    for (const auto& m : modes) {
      const double k2 = m.k[0] * m.k[0] + m.k[1] * m.k[1] + m.k[2] * m.k[2];
      const double amp = 1.0 / (1.0 + k2);
      const double ph = m.k[0] * x[0] + m.k[1] * x[1] + m.k[2] * x[2];
      const double c = std::cos(ph), s = std::sin(ph);
      // ∂_j A_l = k_j (−a_l sin + b_l cos)
      double dA[3][3];
      for (int j = 0; j < 3; ++j)
        for (int l = 0; l < 3; ++l) dA[j][l] = amp * m.k[j] * (-m.a[l] * s + m.b[l] * c);
      if (g.dim == 2) {
        u[0] += dA[1][2];
        u[1] -= dA[0][2];
      } else {
        u[0] += dA[1][2] - dA[2][1];
        u[1] += dA[2][0] - dA[0][2];
        u[2] += dA[0][1] - dA[1][0];
      }
    }
    return u;
  });
}

}  // namespace oracle
