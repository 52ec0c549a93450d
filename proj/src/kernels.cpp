#include "nsstat/kernels.hpp"

#include <cmath>

#include "nsstat/error.hpp"
#include "nsstat/fft.hpp"

namespace nsstat {

int pair_index(int i, int j, int dim) {
  if (i > j) std::swap(i, j);
  // Row-major upper triangle: (0,0),(0,1),..,(0,d-1),(1,1),...
  return i * dim - i * (i - 1) / 2 + (j - i);
}

CorrelationSpectrum::CorrelationSpectrum(const Grid& grid, bool cubic)
    : grid_(grid), cubic_(cubic), pairs_(grid.dim * (grid.dim + 1) / 2) {
  const auto d = static_cast<std::size_t>(grid.dim);
  const std::size_t size = grid.spectral_size();
  s2_.assign(d * d, std::vector<cplx>(size));
  if (cubic_) s3_.assign(static_cast<std::size_t>(pairs_) * d, std::vector<cplx>(size));
  support_.assign(size, 0);
}

void CorrelationSpectrum::accumulate(const VelocityField& field, double weight) {
  if (!(field.grid() == grid_)) throw PreconditionError("field grid does not match spectrum grid");
  const int d = grid_.dim;
  const std::size_t size = grid_.spectral_size();
  // Modes below 1e-13 of the peak amplitude are FFT roundoff; skipping them
  // keeps evaluation proportional to the true spectral support.
  double peak = 0.0;
  for (int i = 0; i < d; ++i)
    for (const cplx& c : field.spectral(i)) peak = std::max(peak, std::norm(c));
  const double cutoff = 1e-26 * peak;
  for (int i = 0; i < d; ++i) {
    const auto ui = field.spectral(i);
    for (std::size_t idx = 0; idx < size; ++idx) {
      if (std::norm(ui[idx]) > cutoff) support_[idx] = 1;
    }
    for (int j = 0; j < d; ++j) {
      const auto uj = field.spectral(j);
      auto& acc = s2_[static_cast<std::size_t>(i * d + j)];
      for (std::size_t idx = 0; idx < size; ++idx) acc[idx] += weight * std::conj(ui[idx]) * uj[idx];
    }
  }
  if (cubic_) {
    const auto& fft = FftPlan::of(grid_);
    std::vector<double> prod(grid_.points());
    std::vector<cplx> phat(size);
    for (int i = 0; i < d; ++i) {
      for (int j = i; j < d; ++j) {
        const auto ui = field.component(i);
        const auto uj = field.component(j);
        for (std::size_t p = 0; p < prod.size(); ++p) prod[p] = ui[p] * uj[p];
        fft.forward(prod, phat);
        const int pr = pair_index(i, j, d);
        for (int k = 0; k < d; ++k) {
          const auto uk = field.spectral(k);
          auto& acc = s3_[static_cast<std::size_t>(pr * d + k)];
          for (std::size_t idx = 0; idx < size; ++idx) acc[idx] += weight * std::conj(phat[idx]) * uk[idx];
        }
      }
    }
  }
  total_weight_ += weight;
  refresh_active();
}

void CorrelationSpectrum::merge(const CorrelationSpectrum& other) {
  if (!(other.grid_ == grid_) || other.cubic_ != cubic_) {
    throw PreconditionError("cannot merge spectra of different shape");
  }
  for (std::size_t a = 0; a < s2_.size(); ++a)
    for (std::size_t idx = 0; idx < s2_[a].size(); ++idx) s2_[a][idx] += other.s2_[a][idx];
  for (std::size_t a = 0; a < s3_.size(); ++a)
    for (std::size_t idx = 0; idx < s3_[a].size(); ++idx) s3_[a][idx] += other.s3_[a][idx];
  for (std::size_t idx = 0; idx < support_.size(); ++idx) support_[idx] |= other.support_[idx];
  total_weight_ += other.total_weight_;
  refresh_active();
}

void CorrelationSpectrum::refresh_active() {
  active_.clear();
  for (std::size_t idx = 0; idx < support_.size(); ++idx) {
    if (support_[idx]) active_.push_back(idx);
  }
  const auto& layout = SpectralLayout::of(grid_);
  const auto d = static_cast<std::size_t>(grid_.dim);
  r_ = Mat3{};
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (std::size_t idx : active_) s += layout.weight[idx] * s2_[i * d + j][idx].real();
      r_[i][j] = grid_.volume() * s;
    }
  }
}

IncrementMoments CorrelationSpectrum::at(const Vec3& h) const {
  const auto& layout = SpectralLayout::of(grid_);
  const int n = grid_.n;
  const int d = grid_.dim;
  const auto du = static_cast<std::size_t>(d);
  const double vol = grid_.volume();

  // e^{i k h_a} for k in [−n/2, n/2], per axis.
  std::array<std::vector<cplx>, 3> table;
  for (std::size_t a = 0; a < 3; ++a) {
    table[a].resize(static_cast<std::size_t>(n + 1));
    for (int k = -n / 2; k <= n / 2; ++k) {
      table[a][static_cast<std::size_t>(k + n / 2)] = a < du ? std::polar(1.0, k * h[a]) : cplx(1.0);
    }
  }
  const std::size_t n2 = du * du;
  const std::size_t n3 = cubic_ ? static_cast<std::size_t>(pairs_) * du : 0;
  std::vector<double> a2(n2, 0.0), c2(n2, 0.0), ag(n2, 0.0), cg(n2, 0.0);
  std::vector<double> a3(n3, 0.0), c3(n3, 0.0);
  const std::size_t off = static_cast<std::size_t>(n / 2);
  for (std::size_t idx : active_) {
    const auto& q = layout.k[idx];
    const cplx e = table[0][static_cast<std::size_t>(q[0]) + off] * table[1][static_cast<std::size_t>(q[1]) + off] *
                   table[2][static_cast<std::size_t>(q[2]) + off];
    const double w = layout.weight[idx];
    const double wc = w * e.real();
    const double ws = w * e.imag();
    const double k2 = layout.k2[idx];
    for (std::size_t a = 0; a < n2; ++a) {
      const cplx s = s2_[a][idx];
      const double x = s.real() * wc;
      const double y = s.imag() * ws;
      a2[a] += x;
      c2[a] += y;
      ag[a] += k2 * x;
      cg[a] += k2 * y;
    }
    for (std::size_t a = 0; a < n3; ++a) {
      const cplx s = s3_[a][idx];
      a3[a] += s.real() * wc;
      c3[a] += s.imag() * ws;
    }
  }

  IncrementMoments m;
  m.h = h;
  const Mat3& r = r_;
  for (std::size_t i = 0; i < du; ++i) {
    for (std::size_t j = 0; j < du; ++j) {
      const std::size_t a = i * du + j;
      m.B[i][j] = vol * (a2[a] - c2[a]);
      m.G[i][j] = vol * (ag[a] - cg[a]);
    }
  }
  for (std::size_t i = 0; i < du; ++i) {
    for (std::size_t j = 0; j < du; ++j) {
      // B_ij(−h) = B_ji(h).
      m.D[i][j] = 2.0 * r[i][j] - m.B[i][j] - m.B[j][i];
    }
  }
  if (cubic_) {
    for (std::size_t i = 0; i < du; ++i) {
      for (std::size_t j = 0; j < du; ++j) {
        const auto pr = static_cast<std::size_t>(pair_index(static_cast<int>(i), static_cast<int>(j), d));
        for (std::size_t k = 0; k < du; ++k) {
          const std::size_t a = pr * du + k;
          m.T_plus[i][j][k] = vol * (a3[a] - c3[a]);
          m.T_minus[i][j][k] = vol * (a3[a] + c3[a]);
        }
      }
    }
    for (std::size_t i = 0; i < du; ++i) {
      for (std::size_t j = 0; j < du; ++j) {
        for (std::size_t k = 0; k < du; ++k) {
          m.M[i][j][k] = (m.T_plus[i][j][k] - m.T_minus[i][j][k]) + (m.T_plus[i][k][j] - m.T_minus[i][k][j]) +
                         (m.T_plus[j][k][i] - m.T_minus[j][k][i]);
        }
      }
    }
  }
  return m;
}

std::vector<IncrementMoments> CorrelationSpectrum::at(std::span<const Vec3> offsets) const {
  std::vector<IncrementMoments> out(offsets.size());
  const auto count = static_cast<std::ptrdiff_t>(offsets.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t a = 0; a < count; ++a) {
    out[static_cast<std::size_t>(a)] = at(offsets[static_cast<std::size_t>(a)]);
  }
  return out;
}

namespace {

void check_weights(std::span<const VelocityField> fields, std::span<const double> weights) {
  if (fields.size() != weights.size()) throw PreconditionError("one weight per field required");
  for (const auto& f : fields) {
    if (!(f.grid() == fields.front().grid())) throw PreconditionError("fields on different grids");
  }
}

double power_sum(const VelocityField& u, std::span<const std::vector<double>> shifted, double p) {
  const int d = u.dim();
  const std::size_t pts = u.grid().points();
  double s = 0.0;
  for (std::size_t x = 0; x < pts; ++x) {
    double mag2 = 0.0;
    for (int i = 0; i < d; ++i) {
      const double delta = shifted[static_cast<std::size_t>(i)][x] - u.component(i)[x];
      mag2 += delta * delta;
    }
    s += p == 2.0 ? mag2 : std::pow(mag2, 0.5 * p);
  }
  return s * u.grid().cell_volume();
}

}  // namespace

std::vector<double> increment_power(std::span<const VelocityField> fields,
                                    std::span<const double> weights,
                                    std::span<const Vec3> offsets, double p) {
  check_weights(fields, weights);
  if (!(p > 0.0)) throw ConfigError("increment power p must be > 0");
  std::vector<double> out(offsets.size(), 0.0);
  if (fields.empty()) return out;
  const Grid grid = fields.front().grid();
  const auto& layout = SpectralLayout::of(grid);
  const auto& fft = FftPlan::of(grid);
  const int d = grid.dim;
  const auto count = static_cast<std::ptrdiff_t>(offsets.size());
#pragma omp parallel
  {
    std::vector<cplx> rotated(grid.spectral_size());
    std::vector<cplx> phase(grid.spectral_size());
    std::vector<std::vector<double>> shifted(static_cast<std::size_t>(d), std::vector<double>(grid.points()));
#pragma omp for schedule(dynamic)
    for (std::ptrdiff_t a = 0; a < count; ++a) {
      const Vec3& h = offsets[static_cast<std::size_t>(a)];
      for (std::size_t idx = 0; idx < layout.size(); ++idx) {
        double ph = 0.0;
        for (int c = 0; c < d; ++c) ph += layout.k[idx][static_cast<std::size_t>(c)] * h[static_cast<std::size_t>(c)];
        phase[idx] = std::polar(1.0, ph);
      }
      double total = 0.0;
      for (std::size_t m = 0; m < fields.size(); ++m) {
        for (int i = 0; i < d; ++i) {
          const auto ui = fields[m].spectral(i);
          for (std::size_t idx = 0; idx < rotated.size(); ++idx) rotated[idx] = ui[idx] * phase[idx];
          fft.inverse(rotated, shifted[static_cast<std::size_t>(i)]);
        }
        total += weights[m] * power_sum(fields[m], shifted, p);
      }
      out[static_cast<std::size_t>(a)] = total;
    }
  }
  return out;
}

namespace reference {

IncrementMoments increment_moments(std::span<const VelocityField> fields,
                                   std::span<const double> weights, const Vec3& h) {
  check_weights(fields, weights);
  IncrementMoments m;
  m.h = h;
  if (fields.empty()) return m;
  const auto d = static_cast<std::size_t>(fields.front().dim());
  const double cell = fields.front().grid().cell_volume();
  for (std::size_t f = 0; f < fields.size(); ++f) {
    const auto& u = fields[f];
    const VelocityField up = shift_eval(u, h);
    const VelocityField um = shift_eval(u, {-h[0], -h[1], -h[2]});
    const auto gu = velocity_gradient(u);
    const auto gp = velocity_gradient(up);
    const double w = weights[f] * cell;
    for (std::size_t x = 0; x < u.grid().points(); ++x) {
      std::array<double, 3> a{}, b{}, c{}, delta{};
      for (std::size_t i = 0; i < d; ++i) {
        a[i] = u.component(static_cast<int>(i))[x];
        b[i] = up.component(static_cast<int>(i))[x];
        c[i] = um.component(static_cast<int>(i))[x];
        delta[i] = b[i] - a[i];
      }
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          m.B[i][j] += w * a[i] * b[j];
          m.D[i][j] += w * delta[i] * delta[j];
          double g = 0.0;
          for (std::size_t l = 0; l < d; ++l) g += gu[i][l][x] * gp[j][l][x];
          m.G[i][j] += w * g;
          for (std::size_t k = 0; k < d; ++k) {
            m.T_plus[i][j][k] += w * a[i] * a[j] * b[k];
            m.T_minus[i][j][k] += w * a[i] * a[j] * c[k];
            m.M[i][j][k] += w * delta[i] * delta[j] * delta[k];
          }
        }
      }
    }
  }
  return m;
}

std::vector<double> increment_power(std::span<const VelocityField> fields,
                                    std::span<const double> weights,
                                    std::span<const Vec3> offsets, double p) {
  check_weights(fields, weights);
  std::vector<double> out(offsets.size(), 0.0);
  for (std::size_t a = 0; a < offsets.size(); ++a) {
    for (std::size_t f = 0; f < fields.size(); ++f) {
      const VelocityField v = shift_eval(fields[f], offsets[a]);
      out[a] += weights[f] * power_sum(fields[f], v.components(), p);
    }
  }
  return out;
}

}  // namespace reference

}  // namespace nsstat
