#include "nsstat/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "nsstat/error.hpp"

namespace nsstat {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::vector<int> fftw_dims(const Grid& grid) {
  // FFTW is row major; x is the fastest (last) axis.
  return std::vector<int>(static_cast<std::size_t>(grid.dim), grid.n);
}

}  // namespace

FftPlan::FftPlan(const Grid& grid) : grid_(grid) {
  const auto dims = fftw_dims(grid);
  double* r = fftw_alloc_real(grid.points());
  fftw_complex* c = fftw_alloc_complex(grid.spectral_size());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  forward_plan_ = fftw_plan_dft_r2c(grid.dim, dims.data(), r, c, flags);
  inverse_plan_ = fftw_plan_dft_c2r(grid.dim, dims.data(), c, r, flags);
  fftw_free(r);
  fftw_free(c);
  if (forward_plan_ == nullptr || inverse_plan_ == nullptr) {
    throw ConfigError("FFTW failed to create a plan");
  }
}

FftPlan::~FftPlan() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

const FftPlan& FftPlan::of(const Grid& grid) {
  static std::map<std::pair<int, int>, std::unique_ptr<FftPlan>> cache;
  std::lock_guard lock(planner_mutex());
  auto& slot = cache[{grid.dim, grid.n}];
  if (!slot) slot.reset(new FftPlan(grid));
  return *slot;
}

void FftPlan::forward(std::span<const double> real, std::span<cplx> spectral) const {
  // r2c does not modify its input, but FFTW's signature is non-const.
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), const_cast<double*>(real.data()),
                       reinterpret_cast<fftw_complex*>(spectral.data()));
  const double scale = 1.0 / static_cast<double>(grid_.points());
  for (auto& c : spectral) c *= scale;
}

void FftPlan::inverse(std::span<const cplx> spectral, std::span<double> real) const {
  // c2r destroys its input.
  std::vector<cplx> scratch(spectral.begin(), spectral.end());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex*>(scratch.data()), real.data());
}

}  // namespace nsstat
