#pragma once

#include <cmath>
#include <numbers>
#include <vector>

// Brute-force S²‖(τ, r) for the 2D Taylor–Green singleton
// u = e^{-2νt}(cos x sin y, −sin x cos y): the analytic field is evaluated
// pointwise at x and x + r n, integrated over a uniform grid, a fine circle of
// directions and (exactly) in time. Shares no code with the spectral path.
inline std::vector<double> taylor_green_s2par(double nu, double tau, const std::vector<double>& radii,
                                              int n_space = 64, int n_angles = 720) {
  const double pi = std::numbers::pi;
  const double time_factor = nu > 0.0 ? (1.0 - std::exp(-4.0 * nu * tau)) / (4.0 * nu) : tau;
  const double cell = std::pow(2.0 * pi / n_space, 2);
  std::vector<double> out;
  for (double r : radii) {
    double acc = 0.0;
    for (int a = 0; a < n_angles; ++a) {
      const double th = 2.0 * pi * a / n_angles;
      const double nx = std::cos(th), ny = std::sin(th);
      double sum = 0.0;
      for (int j = 0; j < n_space; ++j) {
        for (int i = 0; i < n_space; ++i) {
          const double x = 2.0 * pi * i / n_space, y = 2.0 * pi * j / n_space;
          const double x2 = x + r * nx, y2 = y + r * ny;
          const double du = std::cos(x2) * std::sin(y2) - std::cos(x) * std::sin(y);
          const double dv = -std::sin(x2) * std::cos(y2) + std::sin(x) * std::cos(y);
          const double l = du * nx + dv * ny;
          sum += l * l;
        }
      }
      acc += sum * cell;
    }
    out.push_back(time_factor * acc / n_angles);
  }
  return out;
}
