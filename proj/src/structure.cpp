#include "nsstat/structure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nsstat/error.hpp"
#include "nsstat/quadrature.hpp"

namespace nsstat {

namespace {

// Azimuth counts per Gauss-Legendre level summing to n, or empty if m levels
// cannot take n directions with even, mirror-symmetric counts >= 4.
std::vector<int> level_counts(int m, int n) {
  const auto gl = gauss_legendre(m, -1.0, 1.0);
  const int pairs = m / 2;
  std::vector<double> share(static_cast<std::size_t>(m));
  double total = 0.0;
  for (int a = 0; a < m; ++a) {
    // Azimuthal error at a level scales with J_q(k r sin θ), so the share keeps
    // an offset near the poles. The lower mirror node keeps halves identical.
    const double z = gl.nodes[static_cast<std::size_t>(std::min(a, m - 1 - a))];
    share[static_cast<std::size_t>(a)] = std::sqrt(1.0 - z * z) + 0.5;
    total += share[static_cast<std::size_t>(a)];
  }
  std::vector<double> ideal(static_cast<std::size_t>(m));
  std::vector<int> q(static_cast<std::size_t>(m));
  int sum = 0;
  for (std::size_t a = 0; a < q.size(); ++a) {
    ideal[a] = n * share[a] / total;
    q[a] = std::max(4, 2 * static_cast<int>(std::lround(ideal[a] / 2.0)));
    sum += q[a];
  }
  // Fix the total by ±2 per level, mirror pairs moving together.
  auto adjust = [&](std::size_t a, int step) {
    q[a] += step;
    sum += step;
    const std::size_t mirror = q.size() - 1 - a;
    if (mirror != a) {
      q[mirror] += step;
      sum += step;
    }
  };
  const std::size_t middle = m % 2 == 1 ? static_cast<std::size_t>(pairs) : q.size();
  while (sum != n) {
    const int need = n - sum;
    std::size_t pick = q.size();
    double score = 0.0;
    for (std::size_t a = 0; a < static_cast<std::size_t>(pairs) + (m % 2); ++a) {
      const int cost = a == middle ? 2 : 4;
      if (std::abs(need) < cost) continue;
      if (need < 0 && q[a] - 2 < 4) continue;
      const double s = need > 0 ? ideal[a] - q[a] : q[a] - ideal[a];
      if (pick == q.size() || s > score) {
        pick = a;
        score = s;
      }
    }
    if (pick == q.size()) return {};
    adjust(pick, need > 0 ? 2 : -2);
  }
  return q;
}

}  // namespace

DirectionSet DirectionSet::make(int dim, int n_dirs) {
  if (dim != 2 && dim != 3) throw ConfigError("direction set dimension must be 2 or 3");
  if (n_dirs < 8 || n_dirs % 2 != 0) throw ConfigError("n_dirs must be even and >= 8");
  DirectionSet set;
  set.dim = dim;
  if (dim == 2) {
    for (int k = 0; k < n_dirs; ++k) {
      const double a = kTwoPi * k / n_dirs;
      set.dirs.push_back({std::cos(a), std::sin(a), 0.0});
    }
    set.weights.assign(set.dirs.size(), 1.0 / static_cast<double>(n_dirs));
    return set;
  }
  // Reduced Gauss grid: m Gauss-Legendre levels in z, level a carrying an even
  // number q_a >= 4 of equispaced azimuths with q_a ~ sin(theta_a) + 1/2, so both
  // angular spacings shrink as n_dirs grows. Mirror levels share q_a, which
  // keeps the set closed under n -> -n. Most balanced m wins, ties to more levels.
  int best_m = 0, best_gap = 0;
  std::vector<int> best_q;
  for (int m = 2; m * 4 <= n_dirs; ++m) {
    const auto q = level_counts(m, n_dirs);
    if (q.empty()) continue;
    const int gap = std::abs(*std::max_element(q.begin(), q.end()) - 2 * m);
    if (best_m == 0 || gap <= best_gap) {
      best_m = m;
      best_gap = gap;
      best_q = q;
    }
  }
  if (best_m > 0) {
    const auto gl = gauss_legendre(best_m, -1.0, 1.0);
    for (int a = 0; a < best_m; ++a) {
      const double z = gl.nodes[static_cast<std::size_t>(a)];
      const double rho = std::sqrt(1.0 - z * z);
      const int q = best_q[static_cast<std::size_t>(a)];
      for (int b = 0; b < q; ++b) {
        const double phi = kTwoPi * b / q;
        set.dirs.push_back({rho * std::cos(phi), rho * std::sin(phi), z});
        set.weights.push_back(0.5 * gl.weights[static_cast<std::size_t>(a)] / q);
      }
    }
    return set;
  }
  // Counts without such a factorisation: Fibonacci hemisphere plus antipodes.
  const int half = n_dirs / 2;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<Vec3> upper;
  for (int i = 0; i < half; ++i) {
    const double z = (i + 0.5) / half;
    const double rho = std::sqrt(1.0 - z * z);
    const double a = golden * i;
    upper.push_back({rho * std::cos(a), rho * std::sin(a), z});
  }
  for (const auto& v : upper) set.dirs.push_back(v);
  for (const auto& v : upper) set.dirs.push_back({-v[0], -v[1], -v[2]});
  set.weights.assign(set.dirs.size(), 1.0 / static_cast<double>(n_dirs));
  return set;
}

BallRule ball_rule(const DirectionSet& dirs, double r, int radial_nodes) {
  if (!(r > 0.0)) throw DomainError("ball radius must be > 0");
  const auto rule = gauss_legendre(radial_nodes, 0.0, r);
  const double d = dirs.dim;
  BallRule ball;
  for (std::size_t a = 0; a < rule.nodes.size(); ++a) {
    const double s = rule.nodes[a];
    // ⨍_{B_r} f = (d / r^d) ∫₀^r s^{d-1} ⨍_S f(s n) dS ds.
    const double w = rule.weights[a] * std::pow(s, d - 1.0) * d / std::pow(r, d);
    for (std::size_t b = 0; b < dirs.size(); ++b) {
      ball.offsets.push_back({s * dirs.dirs[b][0], s * dirs.dirs[b][1], s * dirs.dirs[b][2]});
      ball.weights.push_back(w * dirs.weights[b]);
    }
  }
  return ball;
}

namespace {

void check_radius(double r) {
  if (!(r > 0.0) || r > std::numbers::pi) throw DomainError("r must lie in (0, π]");
}

}  // namespace

StructureFunctionTable structure_functions(const CorrelationSpectrum& integrated, double tau,
                                           double E0, std::span<const double> r_grid,
                                           const DirectionSet& dirs, std::span<const int> p_list) {
  if (!integrated.has_cubic()) throw PreconditionError("structure functions need cubic moments");
  if (dirs.dim != integrated.grid().dim) throw PreconditionError("direction set dimension mismatch");
  for (int p : p_list) {
    if (p != 2 && p != 3) throw ConfigError("solver-path structure functions support p = 2, 3");
  }
  const auto d = static_cast<std::size_t>(dirs.dim);
  StructureFunctionTable table;
  table.tau = tau;
  table.E0 = E0;
  table.r_grid.assign(r_grid.begin(), r_grid.end());
  std::vector<Vec3> offsets;
  for (double r : r_grid) {
    check_radius(r);
    for (const auto& n : dirs.dirs) offsets.push_back({r * n[0], r * n[1], r * n[2]});
  }
  const auto moments = integrated.at(offsets);
  std::vector<double> s2(r_grid.size(), 0.0), s3(r_grid.size(), 0.0), s0(r_grid.size(), 0.0);
  for (std::size_t a = 0; a < r_grid.size(); ++a) {
    for (std::size_t b = 0; b < dirs.size(); ++b) {
      const auto& m = moments[a * dirs.size() + b];
      const auto& n = dirs.dirs[b];
      double par2 = 0.0, par3 = 0.0, zero3 = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          par2 += m.D[i][j] * n[i] * n[j];
          for (std::size_t k = 0; k < d; ++k) par3 += m.M[i][j][k] * n[i] * n[j] * n[k];
        }
        for (std::size_t k = 0; k < d; ++k) zero3 += m.M[i][i][k] * n[k];
      }
      s2[a] += dirs.weights[b] * par2;
      s3[a] += dirs.weights[b] * par3;
      s0[a] += dirs.weights[b] * zero3;
    }
  }
  for (int p : p_list) table.S_par[p] = p == 2 ? s2 : s3;
  table.S0_3 = s0;
  table.S_perp_3.resize(s0.size());
  for (std::size_t a = 0; a < s0.size(); ++a) table.S_perp_3[a] = s0[a] - s3[a];
  return table;
}

StructureFunctionTable structure_functions(std::span<const Ensemble> ensembles,
                                           std::span<const double> r_grid, const DirectionSet& dirs,
                                           std::span<const int> p_list) {
  if (ensembles.empty()) throw PreconditionError("no ensembles given");
  std::vector<double> times;
  for (const auto& e : ensembles) times.push_back(e.time);
  const auto w = trapezoid_weights(times);
  const Grid grid = ensembles.front().grid();
  const std::size_t M = ensembles.front().size();
  CorrelationSpectrum spec(grid, true);
  for (std::size_t j = 0; j < ensembles.size(); ++j) {
    if (ensembles[j].size() != M) throw PreconditionError("ensembles must share their members");
    if (w[j] == 0.0) continue;
    for (const auto& u : ensembles[j].members) spec.accumulate(u, w[j] / static_cast<double>(M));
  }
  double E0 = 0.0;
  for (const auto& u : ensembles.front().members) E0 += energy(u).value;
  E0 /= static_cast<double>(M);
  return structure_functions(spec, times.back() - times.front(), E0, r_grid, dirs, p_list);
}

SpectrumStream::SpectrumStream(const Grid& grid, std::size_t members, std::span<const double> times,
                               bool cubic)
    : grid_(grid), cubic_(cubic), times_(times.begin(), times.end()) {
  if (members == 0) throw PreconditionError("stream needs at least one member");
  weights_ = trapezoid_weights(times_);
  for (auto& w : weights_) w /= static_cast<double>(members);
  per_member_.assign(members, CorrelationSpectrum(grid, cubic));
  first_.assign(members, CorrelationSpectrum(grid, false));
  last_.assign(members, CorrelationSpectrum(grid, false));
  counters_.assign(members, 0);
}

void SpectrumStream::observe(std::size_t member, const VelocityField& field) {
  const std::size_t j = counters_.at(member)++;
  if (j >= times_.size()) throw PreconditionError("more snapshots than stream times");
  const double scale = 1.0 / static_cast<double>(per_member_.size());
  if (weights_[j] != 0.0) per_member_[member].accumulate(field, weights_[j]);
  if (j == 0) first_[member].accumulate(field, scale);
  if (j + 1 == times_.size()) last_[member].accumulate(field, scale);
}

namespace {

CorrelationSpectrum merged(const std::vector<CorrelationSpectrum>& parts, const Grid& grid, bool cubic) {
  CorrelationSpectrum out(grid, cubic);
  for (const auto& p : parts) out.merge(p);
  return out;
}

}  // namespace

CorrelationSpectrum SpectrumStream::integrated() const { return merged(per_member_, grid_, cubic_); }
CorrelationSpectrum SpectrumStream::initial() const { return merged(first_, grid_, false); }
CorrelationSpectrum SpectrumStream::last() const { return merged(last_, grid_, false); }

BoundCheck bound_check(const StructureFunctionTable& table, double tol) {
  BoundCheck out;
  const auto it = table.S_par.find(3);
  double worst_s0 = 0.0, worst_par = 0.0;
  for (std::size_t a = 0; a < table.r_grid.size(); ++a) {
    const double r = table.r_grid[a];
    if (a < table.S0_3.size()) worst_s0 = std::max(worst_s0, std::abs(table.S0_3[a] / r));
    if (it != table.S_par.end()) worst_par = std::max(worst_par, std::abs(it->second[a] / r));
  }
  if (table.E0 == 0.0) {
    if (worst_s0 > 0.0 || worst_par > 0.0) {
      throw DegenerateInputError("E0 = 0 but third-order structure functions are nonzero");
    }
    return out;
  }
  out.ratio_S0 = worst_s0 / (2.0 * table.E0);
  out.ratio_par = worst_par / (2.0 * table.E0);
  out.violated = out.ratio_S0 > 1.0 + tol || out.ratio_par > 1.0 + tol;
  return out;
}

AnisotropyResult weak_anisotropy_residual(std::span<const VelocityField> fields, double r,
                                          const DirectionSet& dirs, int radial_nodes) {
  check_radius(r);
  AnisotropyResult out;
  if (fields.empty()) return out;
  const Grid grid = fields.front().grid();
  if (dirs.dim != grid.dim) throw PreconditionError("direction set dimension mismatch");
  CorrelationSpectrum spec(grid, false);
  for (const auto& u : fields) {
    if (divergence_ratio(u) > 1e-10) throw PreconditionError("weak anisotropy needs divergence-free fields");
    spec.accumulate(u, 1.0);
  }
  const auto d = static_cast<std::size_t>(grid.dim);
  std::vector<Vec3> sphere;
  for (const auto& n : dirs.dirs) sphere.push_back({r * n[0], r * n[1], r * n[2]});
  const auto on_sphere = spec.at(sphere);
  for (std::size_t b = 0; b < dirs.size(); ++b) {
    double v = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) v += on_sphere[b].D[i][j] * dirs.dirs[b][i] * dirs.dirs[b][j];
    out.lhs += dirs.weights[b] * v;
  }
  out.lhs *= static_cast<double>(d);
  const auto ball = ball_rule(dirs, r, radial_nodes);
  const auto in_ball = spec.at(ball.offsets);
  for (std::size_t a = 0; a < ball.offsets.size(); ++a) {
    double tr = 0.0;
    for (std::size_t i = 0; i < d; ++i) tr += in_ball[a].D[i][i];
    out.rhs += ball.weights[a] * tr;
  }
  const double scale = std::max(std::abs(out.lhs), std::abs(out.rhs));
  out.residual = scale > 0.0 ? std::abs(out.lhs - out.rhs) / scale : 0.0;
  return out;
}

double she_leveque(double p) { return p / 9.0 + 2.0 * (1.0 - std::pow(2.0 / 3.0, p / 3.0)); }

ScalingFit scaling_fit(std::span<const double> r_grid, const std::map<int, std::vector<double>>& S_par,
                       double r_lo, double r_hi, double floor) {
  if (!(r_lo < r_hi)) throw ConfigError("fit range must have r_lo < r_hi");
  ScalingFit fit;
  fit.r_lo = r_lo;
  fit.r_hi = r_hi;
  std::vector<std::size_t> in_range;
  for (std::size_t a = 0; a < r_grid.size(); ++a) {
    if (r_grid[a] >= r_lo && r_grid[a] <= r_hi) in_range.push_back(a);
  }
  auto usable = [&](const std::vector<double>& s) {
    std::vector<std::size_t> keep;
    for (std::size_t a : in_range) {
      if (std::abs(s.at(a)) > floor) keep.push_back(a);
    }
    return keep;
  };
  const auto s3 = S_par.find(3);
  if (s3 != S_par.end()) {
    int sign = 0;
    for (std::size_t a : in_range) {
      const int sa = s3->second.at(a) > 0.0 ? 1 : (s3->second.at(a) < 0.0 ? -1 : 0);
      if (sa != 0 && sign != 0 && sa != sign) fit.degraded = true;
      if (sa != 0) sign = sa;
    }
  }
  for (const auto& [p, values] : S_par) {
    const auto keep = usable(values);
    if (keep.size() < in_range.size()) fit.degraded = true;
    if (keep.size() < 6) throw ConfigError("scaling fit needs at least 6 usable points in range");
    std::vector<double> x, y;
    for (std::size_t a : keep) {
      x.push_back(std::log(r_grid[a]));
      y.push_back(std::log(std::abs(values[a])));
    }
    const auto line = least_squares(x, y);
    fit.zeta[p] = line.slope;
    fit.zeta_r_squared[p] = line.r_squared;
    fit.she_leveque[p] = she_leveque(p);
    fit.points = std::max(fit.points, keep.size());
  }
  const auto s2 = S_par.find(2);
  if (s2 != S_par.end() && s3 != S_par.end()) {
    std::vector<double> x, y;
    for (std::size_t a : in_range) {
      if (std::abs(s2->second[a]) > floor && std::abs(s3->second[a]) > floor) {
        x.push_back(std::log(std::abs(s3->second[a])));
        y.push_back(std::log(std::abs(s2->second[a])));
      }
    }
    if (x.size() < 6) throw ConfigError("alpha fit needs at least 6 usable points in range");
    const auto line = least_squares(x, y);
    fit.alpha = line.slope;
    fit.alpha_r_squared = line.r_squared;
  }
  return fit;
}

std::vector<double> log_spaced(double lo, double hi, int n) {
  if (n < 2 || !(lo > 0.0) || !(hi > lo)) throw ConfigError("log_spaced needs n >= 2 and 0 < lo < hi");
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  return out;
}

}  // namespace nsstat
