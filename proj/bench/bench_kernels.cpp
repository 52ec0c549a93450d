// Parallel kernels against the serial reference on one random ensemble.
// Usage: bench_kernels [n] [members] [offsets]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "nsstat/ensemble.hpp"
#include "nsstat/kernels.hpp"

using namespace nsstat;

namespace {

template <class F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 64;
  const int members = argc > 2 ? std::atoi(argv[2]) : 4;
  const int n_offsets = argc > 3 ? std::atoi(argv[3]) : 64;

  MeasureSpec spec;
  spec.k_max = n / 4;
  spec.seed = 1;
  const auto ens = sample_initial(spec, members, Grid::make(2, n));
  std::vector<double> w(ens.size(), 1.0 / ens.size());
  std::vector<Vec3> offsets;
  for (int i = 0; i < n_offsets; ++i) offsets.push_back({0.03 * i, 0.017 * i, 0.0});

  std::vector<IncrementMoments> fast;
  const double t_fast = seconds([&] {
    CorrelationSpectrum s(ens.grid());
    for (const auto& u : ens.members) s.accumulate(u, 1.0 / ens.size());
    fast = s.at(offsets);
  });
  std::vector<IncrementMoments> slow;
  const double t_slow = seconds([&] {
    for (const auto& h : offsets) slow.push_back(reference::increment_moments(ens.members, w, h));
  });
  double diff = 0.0, scale = 0.0;
  for (std::size_t a = 0; a < offsets.size(); ++a)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        diff = std::max(diff, std::abs(fast[a].D[i][j] - slow[a].D[i][j]));
        scale = std::max(scale, std::abs(slow[a].D[i][j]));
      }

  std::vector<double> p_fast, p_slow;
  const double t_pow = seconds([&] { p_fast = increment_power(ens.members, w, offsets, 3.0); });
  const double t_pow_ref = seconds([&] { p_slow = reference::increment_power(ens.members, w, offsets, 3.0); });
  double pdiff = 0.0;
  for (std::size_t a = 0; a < offsets.size(); ++a) pdiff = std::max(pdiff, std::abs(p_fast[a] - p_slow[a]));

  std::printf("threads %d, n %d, members %d, offsets %d\n", omp_get_max_threads(), n, members, n_offsets);
  std::printf("increment moments  spectral %.3fs  reference %.3fs  speedup %.1fx  max rel diff %.2e\n", t_fast,
              t_slow, t_slow / t_fast, diff / scale);
  std::printf("increment power    parallel %.3fs  reference %.3fs  speedup %.1fx  max abs diff %.2e\n", t_pow,
              t_pow_ref, t_pow_ref / t_pow, pdiff);
  return 0;
}
