#include "nsstat/grid.hpp"

#include <cstdlib>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>

#include "nsstat/error.hpp"

namespace nsstat {

Grid Grid::make(int dim, int n) {
  if (dim != 2 && dim != 3) {
    throw ConfigError("grid dimension must be 2 or 3, got " + std::to_string(dim));
  }
  if (n < 8 || (n & (n - 1)) != 0) {
    throw ConfigError("grid size n must be a power of two with n >= 8, got " + std::to_string(n));
  }
  return Grid{dim, n};
}

std::size_t Grid::points() const {
  std::size_t p = 1;
  for (int a = 0; a < dim; ++a) p *= static_cast<std::size_t>(n);
  return p;
}

std::size_t Grid::spectral_size() const {
  std::size_t p = half_x();
  for (int a = 1; a < dim; ++a) p *= static_cast<std::size_t>(n);
  return p;
}

const SpectralLayout& SpectralLayout::of(const Grid& grid) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<SpectralLayout>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{grid.dim, grid.n}];
  if (!slot) {
    auto layout = std::make_unique<SpectralLayout>();
    layout->grid = grid;
    const int n = grid.n;
    const int hx = n / 2 + 1;
    const int ny = n;
    const int nz = grid.dim == 3 ? n : 1;
    const std::size_t size = grid.spectral_size();
    layout->k.resize(size);
    layout->k2.resize(size);
    layout->weight.resize(size);
    std::size_t idx = 0;
    for (int iz = 0; iz < nz; ++iz) {
      for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < hx; ++ix, ++idx) {
          const int kx = ix;
          const int ky = wavenumber(iy, n);
          const int kz = grid.dim == 3 ? wavenumber(iz, n) : 0;
          layout->k[idx] = {kx, ky, kz};
          layout->k2[idx] = static_cast<double>(kx * kx + ky * ky + kz * kz);
          layout->weight[idx] = (ix == 0 || ix == n / 2) ? 1.0 : 2.0;
        }
      }
    }
    slot = std::move(layout);
  }
  return *slot;
}

bool SpectralLayout::outside_dealias_band(std::size_t idx) const {
  const int cut = grid.dealias_cutoff();
  const auto& q = k[idx];
  return std::abs(q[0]) > cut || std::abs(q[1]) > cut || std::abs(q[2]) > cut;
}

bool SpectralLayout::is_nyquist(std::size_t idx) const {
  const int ny = grid.n / 2;
  const auto& q = k[idx];
  return q[0] == ny || q[1] == ny || (grid.dim == 3 && q[2] == ny);
}

}  // namespace nsstat
