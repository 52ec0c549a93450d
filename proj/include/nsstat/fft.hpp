#pragma once

#include <span>

#include "nsstat/grid.hpp"

namespace nsstat {

/// Real-to-complex FFT pair for one grid, normalised so that the forward
/// transform returns Fourier coefficients: u(x) = Σ_k û(k) e^{ik·x}.
///
/// Plans are created once per grid and cached; execution is thread safe.
class FftPlan {
 public:
  static const FftPlan& of(const Grid& grid);

  void forward(std::span<const double> real, std::span<cplx> spectral) const;
  void inverse(std::span<const cplx> spectral, std::span<double> real) const;

  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  ~FftPlan();

 private:
  explicit FftPlan(const Grid& grid);

  Grid grid_;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

}  // namespace nsstat
