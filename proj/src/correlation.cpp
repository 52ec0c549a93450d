#include "nsstat/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

#include "nsstat/error.hpp"
#include "nsstat/kernels.hpp"
#include "nsstat/quadrature.hpp"

namespace nsstat {

namespace {

Vec3 value_at(const VelocityField& u, std::size_t x) {
  Vec3 v{};
  for (int i = 0; i < u.dim(); ++i) v[static_cast<std::size_t>(i)] = u.component(i)[x];
  return v;
}

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

std::vector<double> member_weights(std::size_t M) {
  return std::vector<double>(M, M == 0 ? 0.0 : 1.0 / static_cast<double>(M));
}

CorrelationSpectrum mean_spectrum(std::span<const VelocityField> fields, bool cubic) {
  CorrelationSpectrum spec(fields.front().grid(), cubic);
  for (const auto& u : fields) spec.accumulate(u, 1.0 / static_cast<double>(fields.size()));
  return spec;
}

}  // namespace

double pair_observable(const Ensemble& ensemble,
                       const std::function<double(const Vec3& x, const Vec3& xi)>& g) {
  if (ensemble.members.empty()) return 0.0;
  const Grid& grid = ensemble.grid();
  double total = 0.0;
  for (const auto& u : ensemble.members) {
    double s = 0.0;
    for (std::size_t x = 0; x < grid.points(); ++x) s += g(grid_point(grid, x), value_at(u, x));
    total += s * grid.cell_volume();
  }
  return total / static_cast<double>(ensemble.size());
}

std::vector<double> pair_observable(
    const Ensemble& ensemble,
    const std::function<double(const Vec3& x1, const Vec3& x2, const Vec3& xi1, const Vec3& xi2)>& g,
    std::span<const Vec3> offsets) {
  std::vector<double> out(offsets.size(), 0.0);
  if (ensemble.members.empty()) return out;
  const Grid& grid = ensemble.grid();
  for (std::size_t a = 0; a < offsets.size(); ++a) {
    const Vec3& h = offsets[a];
    for (const auto& u : ensemble.members) {
      const VelocityField v = shift_eval(u, h);
      double s = 0.0;
      for (std::size_t x = 0; x < grid.points(); ++x) {
        const Vec3 x1 = grid_point(grid, x);
        s += g(x1, {x1[0] + h[0], x1[1] + h[1], x1[2] + h[2]}, value_at(u, x), value_at(v, x));
      }
      out[a] += s * grid.cell_volume();
    }
    out[a] /= static_cast<double>(ensemble.size());
  }
  return out;
}

TwoPointStat two_point_correlation(const Ensemble& ensemble, std::span<const Vec3> offsets) {
  TwoPointStat stat;
  stat.observable = "two_point_correlation";
  stat.time = ensemble.time;
  stat.separations.assign(offsets.begin(), offsets.end());
  std::stable_sort(stat.separations.begin(), stat.separations.end(),
                   [](const Vec3& a, const Vec3& b) { return norm(a) < norm(b); });
  for (const auto& h : stat.separations) stat.radii.push_back(norm(h));
  stat.values.assign(offsets.size(), 0.0);
  if (ensemble.members.empty()) return stat;
  const auto spec = mean_spectrum(ensemble.members, false);
  const auto moments = spec.at(stat.separations);
  const int d = ensemble.grid().dim;
  for (std::size_t a = 0; a < moments.size(); ++a) {
    for (int i = 0; i < d; ++i) stat.values[a] += moments[a].B[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
  }
  return stat;
}

std::vector<Vec3> ball_offsets(const Grid& grid, double r) {
  const double dx = grid.dx();
  const int reach = static_cast<int>(std::ceil(r / dx));
  std::vector<Vec3> lattice;
  const int zr = grid.dim == 3 ? reach : 0;
  for (int k = -zr; k <= zr; ++k) {
    for (int j = -reach; j <= reach; ++j) {
      for (int i = -reach; i <= reach; ++i) {
        const Vec3 y{i * dx, j * dx, k * dx};
        if (norm(y) < r) lattice.push_back(y);
      }
    }
  }
  if (lattice.size() >= 8) return lattice;
  std::vector<Vec3> out;
  const int count = 32;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double s = r * std::pow((i + 0.5) / count, 1.0 / grid.dim);
    const double a = golden * i;
    if (grid.dim == 2) {
      out.push_back({s * std::cos(a), s * std::sin(a), 0.0});
    } else {
      const double z = 1.0 - 2.0 * (i + 0.5) / count;
      const double rho = std::sqrt(1.0 - z * z);
      out.push_back({s * rho * std::cos(a), s * rho * std::sin(a), s * z});
    }
  }
  return out;
}

double dc_modulus(std::span<const VelocityField> fields, double r, double p) {
  if (!(r > 0.0) || r > std::numbers::pi) throw DomainError("DC radius must lie in (0, π]");
  if (fields.empty()) return 0.0;
  const auto offsets = ball_offsets(fields.front().grid(), r);
  double total = 0.0;
  if (p == 2.0) {
    const auto spec = mean_spectrum(fields, false);
    const auto moments = spec.at(offsets);
    for (const auto& m : moments) {
      for (int i = 0; i < fields.front().dim(); ++i) total += m.D[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
    }
  } else {
    const auto w = member_weights(fields.size());
    for (double v : increment_power(fields, w, offsets, p)) total += v;
  }
  return total / static_cast<double>(offsets.size());
}

double dc_modulus(const Ensemble& ensemble, double r, double p) {
  return dc_modulus(std::span<const VelocityField>(ensemble.members), r, p);
}

double TimeProfile::value(double t) const {
  switch (kind) {
    case Kind::Constant: return 1.0;
    case Kind::RaisedCosine: return 0.5 * (1.0 + std::cos(std::numbers::pi * t / T));
    case Kind::FlatStep: {
      const double x = std::clamp(t / T, 0.0, 1.0);
      auto phi = [](double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; };
      return 1.0 - phi(x) / (phi(x) + phi(1.0 - x));
    }
  }
  return 0.0;
}

double TimeProfile::derivative(double t) const {
  switch (kind) {
    case Kind::Constant: return 0.0;
    case Kind::RaisedCosine: return -0.5 * std::numbers::pi / T * std::sin(std::numbers::pi * t / T);
    case Kind::FlatStep: {
      const double x = t / T;
      if (x <= 0.0 || x >= 1.0) return 0.0;
      const double a = std::exp(-1.0 / x);
      const double b = std::exp(-1.0 / (1.0 - x));
      const double da = a / (x * x);
      const double db = b / ((1.0 - x) * (1.0 - x));
      // s = a/(a+b), ds/dx = (da·b + a·db)/(a+b)².
      return -(da * b + a * db) / ((a + b) * (a + b)) / T;
    }
  }
  return 0.0;
}

std::string FKTestFunction::describe() const {
  std::ostringstream out;
  out << (theta.kind == TimeProfile::Kind::RaisedCosine ? "raised_cosine"
          : theta.kind == TimeProfile::Kind::FlatStep   ? "flat_step"
                                                        : "constant")
      << "(T=" << theta.T << ")";
  auto modes = [&](const std::vector<FourierMode>& list) {
    for (const auto& m : list) out << " k=(" << m.k[0] << "," << m.k[1] << "," << m.k[2] << ")";
  };
  modes(psi1);
  if (!psi2.empty()) {
    out << " |";
    modes(psi2);
  }
  return out.str();
}

VelocityField fourier_test_field(const Grid& grid, std::span<const FourierMode> modes) {
  for (const auto& m : modes) {
    const Vec3 k{static_cast<double>(m.k[0]), static_cast<double>(m.k[1]), static_cast<double>(m.k[2])};
    const double tol = 1e-12 * norm(k) * (norm(m.cos_amp) + norm(m.sin_amp));
    if (std::abs(dot(k, m.cos_amp)) > tol || std::abs(dot(k, m.sin_amp)) > tol) {
      throw PreconditionError("test function mode is not divergence free");
    }
    if (grid.dim == 2 && m.k[2] != 0) throw PreconditionError("2D test mode with nonzero k_z");
  }
  return VelocityField::from_function(grid, [&](const Vec3& x) {
    Vec3 v{};
    for (const auto& m : modes) {
      const double ph = m.k[0] * x[0] + m.k[1] * x[1] + m.k[2] * x[2];
      const double c = std::cos(ph), s = std::sin(ph);
      for (std::size_t i = 0; i < 3; ++i) v[i] += m.cos_amp[i] * c + m.sin_amp[i] * s;
    }
    return v;
  });
}

FKProbe::FKProbe(const Grid& grid, const FKTestFunction& test, std::size_t members,
                 std::span<const double> times)
    : test_(test),
      times_(times.begin(), times.end()),
      psi1_(fourier_test_field(grid, test.psi1)),
      psi2_(fourier_test_field(grid, test.psi2.empty() ? test.psi1 : test.psi2)),
      grad1_(velocity_gradient(psi1_)),
      grad2_(velocity_gradient(psi2_)),
      lap1_(laplacian(psi1_)),
      lap2_(laplacian(psi2_)),
      values_(members, std::vector<Sample>(times.size())),
      counters_(members, 0) {
  if (times_.size() < 2) throw ConfigError("FK probe needs at least two output times");
}

namespace {

/// ∫ u_i u_j ∂_j ψ_i dx by grid quadrature.
double advection_pairing(const VelocityField& u, const std::vector<std::vector<std::vector<double>>>& grad) {
  const int d = u.dim();
  double s = 0.0;
  for (std::size_t x = 0; x < u.grid().points(); ++x) {
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        s += u.component(i)[x] * u.component(j)[x] *
             grad[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)][x];
      }
    }
  }
  return s * u.grid().cell_volume();
}

}  // namespace

void FKProbe::observe(std::size_t member, const VelocityField& field) {
  const std::size_t j = counters_.at(member)++;
  if (j >= times_.size()) throw PreconditionError("more snapshots than probe times");
  Sample& s = values_[member][j];
  s.p1 = inner_product(field, psi1_);
  s.a1 = advection_pairing(field, grad1_);
  s.l1 = inner_product(field, lap1_);
  s.p2 = inner_product(field, psi2_);
  s.a2 = advection_pairing(field, grad2_);
  s.l2 = inner_product(field, lap2_);
}

bool FKProbe::complete() const {
  return std::all_of(counters_.begin(), counters_.end(), [&](std::size_t c) { return c == times_.size(); });
}

FKResidual fk_residual(const FKProbe& probe, int k, double nu, bool inviscid) {
  if (k != 1 && k != 2) throw ConfigError("FK residual implemented for k = 1, 2");
  if (!probe.complete()) throw PreconditionError("FK probe has missing snapshots");
  const auto& times = probe.times();
  const auto w = trapezoid_weights(times);
  const auto& theta = probe.test().theta;
  const std::size_t last = times.size() - 1;
  double time_term = 0.0, initial = 0.0, terminal = 0.0, advection = 0.0, viscous = 0.0;
  for (std::size_t m = 0; m < probe.members(); ++m) {
    for (std::size_t j = 0; j < times.size(); ++j) {
      const auto& s = probe.sample(m, j);
      const double th = theta.value(times[j] - times.front());
      const double dth = theta.derivative(times[j] - times.front());
      const double moment = k == 1 ? s.p1 : s.p1 * s.p2;
      const double adv = k == 1 ? s.a1 : s.a1 * s.p2 + s.p1 * s.a2;
      const double lap = k == 1 ? s.l1 : s.l1 * s.p2 + s.p1 * s.l2;
      time_term += w[j] * dth * moment;
      advection += w[j] * th * adv;
      viscous += w[j] * th * nu * lap;
      if (j == 0) initial += th * moment;
      if (j == last) terminal -= th * moment;
    }
  }
  const double Minv = 1.0 / static_cast<double>(probe.members());
  FKResidual out;
  out.k = k;
  out.test_function = probe.test().describe();
  out.terms["time_derivative"] = time_term * Minv;
  out.terms["initial"] = initial * Minv;
  out.terms["advection"] = advection * Minv;
  if (theta.value(times[last] - times.front()) != 0.0) out.terms["terminal"] = terminal * Minv;
  if (!inviscid) out.terms["viscous"] = viscous * Minv;
  for (const auto& [name, v] : out.terms) {
    out.residual += v;
    out.scale = std::max(out.scale, std::abs(v));
  }
  return out;
}

FKResidual fk_residual(std::span<const Ensemble> ensembles, int k, const FKTestFunction& test, double nu,
                       bool inviscid) {
  if (ensembles.empty()) throw PreconditionError("no ensembles given");
  std::vector<double> times;
  for (const auto& e : ensembles) times.push_back(e.time);
  FKProbe probe(ensembles.front().grid(), test, ensembles.front().size(), times);
  for (const auto& e : ensembles) {
    if (e.size() != probe.members()) throw PreconditionError("ensembles must share their members");
    for (std::size_t m = 0; m < e.size(); ++m) probe.observe(m, e.members[m]);
  }
  return fk_residual(probe, k, nu, inviscid);
}

DivergenceResidual divergence_constraint_residual(const Ensemble& ensemble, const DivergenceTest& test) {
  if (test.k < 1 || test.k > 2 || test.ell < 1 || test.ell > test.k) {
    throw ConfigError("divergence constraint implemented for 1 <= ell <= k <= 2");
  }
  DivergenceResidual out;
  if (ensemble.members.empty()) return out;
  const Grid& grid = ensemble.grid();
  const int d = grid.dim;
  auto sample = [&](const std::function<double(const Vec3&)>& f) {
    if (!f) throw ConfigError("divergence test is missing a scalar factor");
    std::vector<double> v(grid.points());
    for (std::size_t x = 0; x < v.size(); ++x) v[x] = f(grid_point(grid, x));
    return v;
  };
  // (∫ u·∇f, ∫ |u||∇f|) for one member.
  auto grad_pairing = [&](const VelocityField& u, const VelocityField& grad) {
    double s = 0.0, a = 0.0;
    for (std::size_t x = 0; x < grid.points(); ++x) {
      double dp = 0.0, uu = 0.0, gg = 0.0;
      for (int i = 0; i < d; ++i) {
        dp += u.component(i)[x] * grad.component(i)[x];
        uu += u.component(i)[x] * u.component(i)[x];
        gg += grad.component(i)[x] * grad.component(i)[x];
      }
      s += dp;
      a += std::sqrt(uu * gg);
    }
    return std::pair{s * grid.cell_volume(), a * grid.cell_volume()};
  };
  const VelocityField grad_f = gradient_of_scalar(grid, sample(test.f));
  std::optional<VelocityField> grad_g;
  if (test.k == 2 && test.ell == 2) grad_g = gradient_of_scalar(grid, sample(test.g));
  if (test.k == 2 && test.ell == 1 && !test.g_vec) throw ConfigError("ell = 1, k = 2 needs a vector factor");

  for (const auto& u : ensemble.members) {
    const auto [pf, sf] = grad_pairing(u, grad_f);
    if (test.k == 1) {
      out.value += pf;
      out.scale += sf;
    } else if (test.ell == 2) {
      const auto [pg, sg] = grad_pairing(u, *grad_g);
      out.value += pf * pg;
      out.scale += sf * sg;
    } else {
      double s = 0.0, a = 0.0;
      for (std::size_t x = 0; x < grid.points(); ++x) {
        Vec3 xi = value_at(u, x);
        if (test.alpha) xi = test.alpha(xi);
        const Vec3 g = test.g_vec(grid_point(grid, x));
        s += dot(xi, g);
        a += norm(xi) * norm(g);
      }
      out.value += pf * s * grid.cell_volume();
      out.scale += sf * a * grid.cell_volume();
    }
  }
  out.value /= static_cast<double>(ensemble.size());
  out.scale /= static_cast<double>(ensemble.size());
  return out;
}

std::vector<double> gradient_two_point(const Ensemble& ensemble, std::span<const double> h_list) {
  std::vector<double> out(h_list.size(), 0.0);
  if (ensemble.members.empty()) return out;
  const int d = ensemble.grid().dim;
  const auto spec = mean_spectrum(ensemble.members, false);
  for (std::size_t a = 0; a < h_list.size(); ++a) {
    const double h = h_list[a];
    if (!(h > 0.0)) throw DomainError("gradient offsets must be positive");
    for (int j = 0; j < d; ++j) {
      Vec3 e{};
      e[static_cast<std::size_t>(j)] = h;
      const auto m = spec.at(e);
      for (int i = 0; i < d; ++i) out[a] += m.D[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
    }
    out[a] /= h * h;
  }
  return out;
}

double mean_h1(const Ensemble& ensemble) {
  if (ensemble.members.empty()) return 0.0;
  double s = 0.0;
  for (const auto& u : ensemble.members) s += h1_seminorm_sq(u).value;
  return s / static_cast<double>(ensemble.size());
}

double mean_energy(const Ensemble& ensemble) {
  if (ensemble.members.empty()) return 0.0;
  double s = 0.0;
  for (const auto& u : ensemble.members) s += energy(u).value;
  return s / static_cast<double>(ensemble.size());
}

}  // namespace nsstat
