#include "nsstat/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nsstat/error.hpp"
#include "nsstat/fft.hpp"

namespace nsstat {

ScalarStat::ScalarStat(double v, std::string l) : value(v), label(std::move(l)) {
  if (!std::isfinite(v)) throw DomainError("scalar statistic '" + label + "' is not finite");
}

namespace {

void require_shape(const Grid& grid, const std::vector<std::vector<double>>& comps) {
  if (comps.size() != static_cast<std::size_t>(grid.dim)) {
    throw PreconditionError("velocity field needs exactly dim components");
  }
  for (const auto& c : comps) {
    if (c.size() != grid.points()) throw PreconditionError("component size does not match the grid");
  }
}

void require_same_grid(const VelocityField& a, const VelocityField& b) {
  if (!(a.grid() == b.grid())) throw PreconditionError("fields live on different grids");
}

}  // namespace

VelocityField::VelocityField(const Grid& grid, std::vector<std::vector<double>> components,
                             double time, double nu)
    : grid_(Grid::make(grid.dim, grid.n)), time_(time), nu_(nu), real_(std::move(components)) {
  require_shape(grid_, real_);
  if (nu < 0.0) throw ConfigError("viscosity must be nonnegative");
  const auto& plan = FftPlan::of(grid_);
  spectral_.resize(real_.size());
  for (std::size_t i = 0; i < real_.size(); ++i) {
    spectral_[i].resize(grid_.spectral_size());
    plan.forward(real_[i], spectral_[i]);
  }
}

VelocityField VelocityField::zero(const Grid& grid, double time, double nu) {
  return VelocityField(grid,
                       std::vector<std::vector<double>>(static_cast<std::size_t>(grid.dim),
                                                        std::vector<double>(grid.points(), 0.0)),
                       time, nu);
}

VelocityField VelocityField::from_spectral(const Grid& grid, std::vector<std::vector<cplx>> spectral,
                                           double time, double nu) {
  VelocityField f;
  f.grid_ = Grid::make(grid.dim, grid.n);
  f.time_ = time;
  f.nu_ = nu;
  if (spectral.size() != static_cast<std::size_t>(grid.dim)) {
    throw PreconditionError("velocity field needs exactly dim spectral components");
  }
  const auto& plan = FftPlan::of(f.grid_);
  f.real_.resize(spectral.size());
  for (std::size_t i = 0; i < spectral.size(); ++i) {
    if (spectral[i].size() != grid.spectral_size()) {
      throw PreconditionError("spectral component size does not match the grid");
    }
    f.real_[i].resize(grid.points());
    plan.inverse(spectral[i], f.real_[i]);
  }
  // Re-derive the mirror so both representations describe the same real field.
  f.spectral_.resize(spectral.size());
  for (std::size_t i = 0; i < spectral.size(); ++i) {
    f.spectral_[i].resize(grid.spectral_size());
    plan.forward(f.real_[i], f.spectral_[i]);
  }
  return f;
}

VelocityField VelocityField::from_function(const Grid& grid,
                                           const std::function<Vec3(const Vec3&)>& f, double time,
                                           double nu) {
  std::vector<std::vector<double>> comps(static_cast<std::size_t>(grid.dim),
                                         std::vector<double>(grid.points()));
  for (std::size_t idx = 0; idx < grid.points(); ++idx) {
    const Vec3 v = f(grid_point(grid, idx));
    for (int i = 0; i < grid.dim; ++i) comps[static_cast<std::size_t>(i)][idx] = v[static_cast<std::size_t>(i)];
  }
  return VelocityField(grid, std::move(comps), time, nu);
}

VelocityField VelocityField::with_metadata(double time, double nu) const {
  VelocityField f = *this;
  f.time_ = time;
  f.nu_ = nu;
  return f;
}

VelocityField VelocityField::scaled(double factor) const {
  VelocityField f = *this;
  for (auto& c : f.real_) {
    for (auto& v : c) v *= factor;
  }
  for (auto& c : f.spectral_) {
    for (auto& v : c) v *= factor;
  }
  return f;
}

Vec3 grid_point(const Grid& grid, std::size_t idx) {
  const auto n = static_cast<std::size_t>(grid.n);
  const double h = grid.dx();
  Vec3 x{0.0, 0.0, 0.0};
  x[0] = h * static_cast<double>(idx % n);
  x[1] = h * static_cast<double>((idx / n) % n);
  if (grid.dim == 3) x[2] = h * static_cast<double>(idx / (n * n));
  return x;
}

namespace detail {

double spectral_sum(const Grid& grid, const std::function<double(std::size_t)>& term) {
  const auto& layout = SpectralLayout::of(grid);
  double s = 0.0;
  for (std::size_t idx = 0; idx < layout.size(); ++idx) s += layout.weight[idx] * term(idx);
  return s;
}

}  // namespace detail

VelocityField fft_roundtrip(const VelocityField& field) {
  return VelocityField::from_spectral(field.grid(), field.spectral_components(), field.time(),
                                      field.nu());
}

VelocityField leray_project(const VelocityField& field) {
  const auto& layout = SpectralLayout::of(field.grid());
  auto spec = field.spectral_components();
  const int d = field.dim();
  for (std::size_t idx = 0; idx < layout.size(); ++idx) {
    // The sign of a Nyquist wavenumber is ambiguous, so no divergence-free
    // representative exists there.
    if (layout.k2[idx] == 0.0 || layout.is_nyquist(idx)) {
      for (int i = 0; i < d; ++i) spec[static_cast<std::size_t>(i)][idx] = 0.0;
      continue;
    }
    cplx kdotu = 0.0;
    for (int i = 0; i < d; ++i) kdotu += static_cast<double>(layout.k[idx][static_cast<std::size_t>(i)]) * spec[static_cast<std::size_t>(i)][idx];
    const cplx factor = kdotu / layout.k2[idx];
    for (int i = 0; i < d; ++i) {
      spec[static_cast<std::size_t>(i)][idx] -= static_cast<double>(layout.k[idx][static_cast<std::size_t>(i)]) * factor;
    }
  }
  return VelocityField::from_spectral(field.grid(), std::move(spec), field.time(), field.nu());
}

ScalarStat energy(const VelocityField& field) {
  const double s = detail::spectral_sum(field.grid(), [&](std::size_t idx) {
    double acc = 0.0;
    for (int i = 0; i < field.dim(); ++i) acc += std::norm(field.spectral(i)[idx]);
    return acc;
  });
  return {s * field.grid().volume(), "E"};
}

ScalarStat h1_seminorm_sq(const VelocityField& field) {
  const auto& layout = SpectralLayout::of(field.grid());
  const double s = detail::spectral_sum(field.grid(), [&](std::size_t idx) {
    double acc = 0.0;
    for (int i = 0; i < field.dim(); ++i) acc += std::norm(field.spectral(i)[idx]);
    return layout.k2[idx] * acc;
  });
  return {s * field.grid().volume(), "H1_seminorm"};
}

VelocityField shift_eval(const VelocityField& field, const Vec3& offset) {
  const auto& layout = SpectralLayout::of(field.grid());
  auto spec = field.spectral_components();
  for (std::size_t idx = 0; idx < layout.size(); ++idx) {
    double phase = 0.0;
    for (int a = 0; a < field.dim(); ++a) {
      phase += layout.k[idx][static_cast<std::size_t>(a)] * offset[static_cast<std::size_t>(a)];
    }
    const cplx rot = std::polar(1.0, phase);
    for (auto& c : spec) c[idx] *= rot;
  }
  return VelocityField::from_spectral(field.grid(), std::move(spec), field.time(), field.nu());
}

VelocityField dealias(const VelocityField& field) {
  const auto& layout = SpectralLayout::of(field.grid());
  auto spec = field.spectral_components();
  for (std::size_t idx = 0; idx < layout.size(); ++idx) {
    if (layout.outside_dealias_band(idx)) {
      for (auto& c : spec) c[idx] = 0.0;
    }
  }
  return VelocityField::from_spectral(field.grid(), std::move(spec), field.time(), field.nu());
}

double divergence_ratio(const VelocityField& field) {
  const auto& layout = SpectralLayout::of(field.grid());
  double max_div = 0.0;
  double max_amp = 0.0;
  for (std::size_t idx = 0; idx < layout.size(); ++idx) {
    cplx kdotu = 0.0;
    double amp = 0.0;
    for (int i = 0; i < field.dim(); ++i) {
      const cplx c = field.spectral(i)[idx];
      kdotu += static_cast<double>(layout.k[idx][static_cast<std::size_t>(i)]) * c;
      amp = std::max(amp, std::abs(c));
    }
    max_div = std::max(max_div, std::abs(kdotu));
    max_amp = std::max(max_amp, amp);
  }
  return max_amp == 0.0 ? 0.0 : max_div / max_amp;
}

double mean_mode_magnitude(const VelocityField& field) {
  double s = 0.0;
  for (int i = 0; i < field.dim(); ++i) s += std::abs(field.spectral(i)[0]);
  return s;
}

double inner_product(const VelocityField& u, const VelocityField& v) {
  require_same_grid(u, v);
  const double s = detail::spectral_sum(u.grid(), [&](std::size_t idx) {
    double acc = 0.0;
    for (int i = 0; i < u.dim(); ++i) acc += (std::conj(u.spectral(i)[idx]) * v.spectral(i)[idx]).real();
    return acc;
  });
  return s * u.grid().volume();
}

double real_space_energy(const VelocityField& field) {
  double s = 0.0;
  for (const auto& c : field.components()) {
    for (double v : c) s += v * v;
  }
  return s * field.grid().cell_volume();
}

double max_abs_difference(const VelocityField& a, const VelocityField& b) {
  require_same_grid(a, b);
  double m = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    const auto ca = a.component(i);
    const auto cb = b.component(i);
    for (std::size_t j = 0; j < ca.size(); ++j) m = std::max(m, std::abs(ca[j] - cb[j]));
  }
  return m;
}

double l2_distance(const VelocityField& a, const VelocityField& b) {
  return std::sqrt(std::max(0.0, real_space_energy(add(a, b, -1.0))));
}

VelocityField add(const VelocityField& a, const VelocityField& b, double b_scale) {
  require_same_grid(a, b);
  auto comps = a.components();
  for (int i = 0; i < a.dim(); ++i) {
    const auto cb = b.component(i);
    auto& ca = comps[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < ca.size(); ++j) ca[j] += b_scale * cb[j];
  }
  return VelocityField(a.grid(), std::move(comps), a.time(), a.nu());
}

VelocityField gradient_of_scalar(const Grid& grid, std::span<const double> psi) {
  if (psi.size() != grid.points()) throw PreconditionError("scalar size does not match the grid");
  const auto& plan = FftPlan::of(grid);
  const auto& layout = SpectralLayout::of(grid);
  std::vector<cplx> hat(grid.spectral_size());
  plan.forward(psi, hat);
  std::vector<std::vector<cplx>> spec(static_cast<std::size_t>(grid.dim),
                                      std::vector<cplx>(grid.spectral_size()));
  const cplx I(0.0, 1.0);
  for (std::size_t idx = 0; idx < layout.size(); ++idx) {
    if (layout.is_nyquist(idx)) continue;
    for (int a = 0; a < grid.dim; ++a) {
      spec[static_cast<std::size_t>(a)][idx] = I * static_cast<double>(layout.k[idx][static_cast<std::size_t>(a)]) * hat[idx];
    }
  }
  return VelocityField::from_spectral(grid, std::move(spec));
}

std::vector<std::vector<std::vector<double>>> velocity_gradient(const VelocityField& field) {
  const auto& grid = field.grid();
  const auto& plan = FftPlan::of(grid);
  const auto& layout = SpectralLayout::of(grid);
  const auto d = static_cast<std::size_t>(grid.dim);
  std::vector<std::vector<std::vector<double>>> out(d, std::vector<std::vector<double>>(d));
  std::vector<cplx> tmp(grid.spectral_size());
  const cplx I(0.0, 1.0);
  for (std::size_t i = 0; i < d; ++i) {
    const auto src = field.spectral(static_cast<int>(i));
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t idx = 0; idx < layout.size(); ++idx) {
        tmp[idx] = layout.is_nyquist(idx) ? cplx(0.0)
                                          : I * static_cast<double>(layout.k[idx][j]) * src[idx];
      }
      out[i][j].resize(grid.points());
      plan.inverse(tmp, out[i][j]);
    }
  }
  return out;
}

VelocityField laplacian(const VelocityField& field) {
  const auto& layout = SpectralLayout::of(field.grid());
  auto spec = field.spectral_components();
  for (std::size_t idx = 0; idx < layout.size(); ++idx) {
    for (auto& c : spec) c[idx] *= -layout.k2[idx];
  }
  return VelocityField::from_spectral(field.grid(), std::move(spec), field.time(), field.nu());
}

}  // namespace nsstat
