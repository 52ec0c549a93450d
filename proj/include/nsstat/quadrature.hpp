#pragma once

#include <span>
#include <vector>

namespace nsstat {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss–Legendre rule on [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

/// Trapezoid weights for samples at (possibly nonuniform) increasing times.
std::vector<double> trapezoid_weights(std::span<const double> times);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y ≈ slope·x + intercept.
LineFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace nsstat
