#include "nsstat/vvlimit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "nsstat/error.hpp"
#include "nsstat/quadrature.hpp"

namespace nsstat {

namespace {

long stride_of(double coarse, double fine) { return std::lround(coarse / fine); }

std::vector<double> uniform_times(double t_end, double dt) {
  std::vector<double> times;
  const long count = std::lround(t_end / dt);
  for (long i = 0; i <= count; ++i) times.push_back(static_cast<double>(i) * dt);
  times.back() = t_end;
  return times;
}

}  // namespace

void SweepPlan::validate() const {
  if (nus.empty()) throw ConfigError("nu ladder must not be empty");
  for (std::size_t i = 0; i < nus.size(); ++i) {
    if (!(nus[i] > 0.0)) throw ConfigError("ladder viscosities must be > 0");
    if (i > 0 && nus[i] > nus[i - 1]) throw ConfigError("nu ladder must be non-increasing");
  }
  if (members < 1) throw ConfigError("members must be >= 1");
  if (!(t_end > 0.0)) throw ConfigError("t_end must be > 0");
  if (!(fk_interval > 0.0) || !(snapshot_interval > 0.0)) throw ConfigError("intervals must be > 0");
  const long stride = stride_of(snapshot_interval, fk_interval);
  if (stride < 1 || std::abs(stride * fk_interval - snapshot_interval) > 1e-9 * snapshot_interval) {
    throw ConfigError("snapshot_interval must be an integer multiple of fk_interval");
  }
  const long steps = stride_of(t_end, snapshot_interval);
  if (steps < 1 || std::abs(steps * snapshot_interval - t_end) > 1e-9 * t_end) {
    throw ConfigError("t_end must be an integer multiple of snapshot_interval");
  }
  for (double r : r_grid) {
    if (!(r > 0.0) || r > std::numbers::pi) throw DomainError("r_grid entries must lie in (0, π]");
  }
  spec.validate(grid);
}

std::vector<double> SweepPlan::fine_times() const { return uniform_times(t_end, fk_interval); }
std::vector<double> SweepPlan::snapshot_times() const { return uniform_times(t_end, snapshot_interval); }

std::vector<double> correlation_curve(std::span<const VelocityField> fields, std::span<const double> r_grid,
                                      const DirectionSet& dirs) {
  std::vector<double> out(r_grid.size(), 0.0);
  if (fields.empty()) return out;
  CorrelationSpectrum spec(fields.front().grid(), false);
  for (const auto& u : fields) spec.accumulate(u, 1.0 / static_cast<double>(fields.size()));
  std::vector<Vec3> offsets;
  for (double r : r_grid)
    for (const auto& n : dirs.dirs) offsets.push_back({r * n[0], r * n[1], r * n[2]});
  const auto moments = spec.at(offsets);
  const auto d = static_cast<std::size_t>(dirs.dim);
  for (std::size_t a = 0; a < r_grid.size(); ++a) {
    for (std::size_t b = 0; b < dirs.size(); ++b) {
      double tr = 0.0;
      for (std::size_t i = 0; i < d; ++i) tr += moments[a * dirs.size() + b].B[i][i];
      out[a] += dirs.weights[b] * tr;
    }
  }
  return out;
}

NuReport run_single(const SweepPlan& plan, double nu) {
  plan.validate();
  NuReport rep;
  rep.nu = nu;
  rep.resolved = plan.grid.dealias_cutoff() >= 1.0 / std::sqrt(nu);

  const auto fine = plan.fine_times();
  const auto snaps = plan.snapshot_times();
  const auto stride = static_cast<std::size_t>(stride_of(plan.snapshot_interval, plan.fk_interval));
  const auto M = static_cast<std::size_t>(plan.members);
  const Ensemble initial = sample_initial(plan.spec, plan.members, plan.grid, nu);

  FKProbe probe(plan.grid, plan.fk_test, M, fine);
  SpectrumStream stream(plan.grid, M, snaps, true);
  std::vector<std::vector<double>> energies(M, std::vector<double>(fine.size())),
      seminorms(M, std::vector<double>(fine.size()));
  std::vector<std::size_t> counter(M, 0);
  MemberObserver observer = [&](std::size_t m, const VelocityField& u) {
    const std::size_t j = counter[m]++;
    probe.observe(m, u);
    energies[m][j] = energy(u).value;
    seminorms[m][j] = h1_seminorm_sq(u).value;
    if (j % stride == 0) stream.observe(m, u);
  };

  SolverConfig cfg;
  cfg.nu = nu;
  cfg.cfl = plan.cfl;
  cfg.t_end = plan.t_end;
  cfg.snapshot_interval = plan.fk_interval;
  const std::vector<double> sample{plan.t_end};
  try {
    rep.final_ensemble = evolve(initial, cfg, sample, fine, observer).front();
  } catch (const BlowUpError& e) {
    rep.failed = true;
    rep.blowups.push_back({e.member(), e.time(), e.what()});
    return rep;
  }

  rep.times = fine;
  rep.mean_energy.assign(fine.size(), 0.0);
  std::vector<double> mean_h1(fine.size(), 0.0);
  for (std::size_t j = 0; j < fine.size(); ++j) {
    for (std::size_t m = 0; m < M; ++m) {
      rep.mean_energy[j] += energies[m][j] / static_cast<double>(M);
      mean_h1[j] += seminorms[m][j] / static_cast<double>(M);
    }
  }
  double cumulative = 0.0;
  const double e0 = rep.mean_energy.front();
  rep.energy_defect = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < fine.size(); ++j) {
    if (j > 0) cumulative += 0.5 * (fine[j] - fine[j - 1]) * (mean_h1[j] + mean_h1[j - 1]);
    const double defect = rep.mean_energy[j] + 2.0 * nu * cumulative - e0;
    rep.energy_defect = std::max(rep.energy_defect, e0 > 0.0 ? defect / e0 : defect);
  }

  rep.fk1 = fk_residual(probe, 1, nu);
  rep.fk2 = fk_residual(probe, 2, nu);
  rep.fk1_inviscid = fk_residual(probe, 1, nu, true);
  rep.fk2_inviscid = fk_residual(probe, 2, nu, true);

  const auto integrated = stream.integrated();
  const auto dirs = DirectionSet::make(plan.grid.dim, plan.directions);
  for (double r : plan.r_grid) {
    const auto offsets = ball_offsets(plan.grid, r);
    const auto moments = integrated.at(offsets);
    double total = 0.0;
    for (const auto& mo : moments)
      for (int i = 0; i < plan.grid.dim; ++i) total += mo.D[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
    rep.dc_integrated.push_back(total / static_cast<double>(offsets.size()));
  }
  const std::vector<int> p_list{2, 3};
  rep.structure = structure_functions(integrated, plan.t_end, e0, plan.r_grid, dirs, p_list);
  rep.bounds = bound_check(rep.structure);
  if (plan.khm_omega.support() > 0.0) {
    rep.khm = khm_budget(stream.initial(), stream.last(), integrated, plan.t_end, nu,
                         tensor_for(KHMForm::Trace, plan.khm_omega, plan.grid.dim), KHMForm::Trace);
  }
  rep.correlation_curve = correlation_curve(rep.final_ensemble.members, plan.r_grid, dirs);
  return rep;
}

SweepReport run_sweep(const SweepPlan& plan, const SweepLog& log) {
  plan.validate();
  SweepReport report;
  report.plan = plan;
  for (double nu : plan.nus) {
    if (log) {
      std::ostringstream msg;
      msg << "nu=" << nu << ": running " << plan.members << " members to t=" << plan.t_end;
      log(msg.str());
    }
    report.runs.push_back(run_single(plan, nu));
  }
  for (std::size_t i = 0; i + 1 < report.runs.size(); ++i) {
    if (report.runs[i].failed || report.runs[i + 1].failed) {
      report.distances.push_back({});
      continue;
    }
    report.distances.push_back(statistic_distance(report, i, i + 1));
  }
  bool any_failed = false;
  for (const auto& r : report.runs) any_failed = any_failed || r.failed;
  if (!any_failed) {
    report.dc = dc_uniformity(report);
    report.inviscid_k1 = inviscid_fk_residual(report.runs, 1);
    report.inviscid_k2 = inviscid_fk_residual(report.runs, 2);
  }
  return report;
}

DCUniformity dc_uniformity(std::span<const double> nus, std::span<const double> r_grid,
                           const std::vector<std::vector<double>>& curves) {
  if (r_grid.size() < 4) throw ConfigError("DC uniformity needs at least 4 r points");
  if (curves.size() != nus.size()) throw PreconditionError("one DC curve per viscosity required");
  DCUniformity out;
  out.envelope.assign(r_grid.size(), 0.0);
  std::vector<std::size_t> attained(nus.size(), 0);
  for (std::size_t a = 0; a < r_grid.size(); ++a) {
    std::size_t best = 0;
    for (std::size_t v = 0; v < curves.size(); ++v) {
      if (curves[v].size() != r_grid.size()) throw PreconditionError("DC curve length mismatch");
      if (curves[v][a] > out.envelope[a]) {
        out.envelope[a] = curves[v][a];
        best = v;
      }
    }
    ++attained[best];
  }
  if (!nus.empty()) {
    out.worst_nu = nus[static_cast<std::size_t>(std::max_element(attained.begin(), attained.end()) - attained.begin())];
  }
  out.nu_monotone = true;
  for (std::size_t v = 1; v < curves.size(); ++v) {
    for (std::size_t a = 0; a < r_grid.size(); ++a) {
      if (curves[v][a] < curves[v - 1][a]) out.nu_monotone = false;
    }
  }
  out.envelope_nondecreasing = true;
  for (std::size_t a = 1; a < r_grid.size(); ++a) {
    if (out.envelope[a] < out.envelope[a - 1]) out.envelope_nondecreasing = false;
  }
  if (std::all_of(out.envelope.begin(), out.envelope.end(), [](double e) { return e <= 0.0; })) {
    out.fit_skipped = true;
    return out;
  }
  std::vector<double> x, y;
  for (std::size_t a = 0; a < r_grid.size(); ++a) {
    if (out.envelope[a] > 0.0) {
      x.push_back(std::log(r_grid[a]));
      y.push_back(std::log(out.envelope[a]));
    }
  }
  if (x.size() < 4) {
    out.fit_skipped = true;
    return out;
  }
  const auto line = least_squares(x, y);
  out.alpha = line.slope;
  out.C = std::exp(line.intercept);
  out.r_squared = line.r_squared;
  return out;
}

DCUniformity dc_uniformity(const SweepReport& report) {
  std::vector<std::vector<double>> curves;
  for (const auto& r : report.runs) curves.push_back(r.dc_integrated);
  return dc_uniformity(report.plan.nus, report.plan.r_grid, curves);
}

InviscidScaling inviscid_fk_residual(const std::vector<NuReport>& runs, int k) {
  InviscidScaling out;
  out.k = k;
  std::vector<double> x, y;
  for (const auto& r : runs) {
    const double res = std::abs((k == 1 ? r.fk1_inviscid : r.fk2_inviscid).residual);
    out.nus.push_back(r.nu);
    out.residuals.push_back(res);
    if (res > 0.0) {
      x.push_back(std::log(r.nu));
      y.push_back(std::log(res));
    }
  }
  std::vector<double> distinct(x);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() >= 2) {
    const auto line = least_squares(x, y);
    out.slope = line.slope;
    out.r_squared = line.r_squared;
  }
  return out;
}

double wasserstein1(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw PreconditionError("empirical distributions must be non-empty");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  // ∫ |F_a − F_b| over the merged support.
  std::vector<double> pts(a);
  pts.insert(pts.end(), b.begin(), b.end());
  std::sort(pts.begin(), pts.end());
  double w = 0.0;
  std::size_t ia = 0, ib = 0;
  for (std::size_t p = 0; p + 1 < pts.size(); ++p) {
    while (ia < a.size() && a[ia] <= pts[p]) ++ia;
    while (ib < b.size() && b[ib] <= pts[p]) ++ib;
    const double fa = static_cast<double>(ia) / static_cast<double>(a.size());
    const double fb = static_cast<double>(ib) / static_cast<double>(b.size());
    w += std::abs(fa - fb) * (pts[p + 1] - pts[p]);
  }
  return w;
}

namespace {

std::vector<std::size_t> probe_points(const Grid& grid) {
  std::vector<std::size_t> out;
  const auto n = static_cast<std::size_t>(grid.n);
  for (std::size_t p = 0; p < 8; ++p) {
    const std::size_t ix = (p * n / 8 + n / 16) % n;
    const std::size_t iy = ((3 * p + 1) * n / 8 + n / 32) % n;
    const std::size_t iz = grid.dim == 3 ? ((5 * p + 2) * n / 8) % n : 0;
    out.push_back(ix + n * (iy + n * iz));
  }
  return out;
}

struct RawDistances {
  double mean_field, correlation, wasserstein;
};

RawDistances raw_distances(std::span<const VelocityField> a, std::span<const VelocityField> b,
                           std::span<const double> r_grid, const DirectionSet& dirs) {
  const Grid& grid = a.front().grid();
  auto mean_field = [&](std::span<const VelocityField> fields) {
    VelocityField s = VelocityField::zero(grid);
    for (const auto& u : fields) s = add(s, u, 1.0 / static_cast<double>(fields.size()));
    return s;
  };
  const VelocityField ma = mean_field(a), mb = mean_field(b);
  const double na = std::sqrt(energy(ma).value), nb = std::sqrt(energy(mb).value);
  RawDistances d{};
  const double denom = std::max(na, nb);
  d.mean_field = denom > 0.0 ? l2_distance(ma, mb) / denom : 0.0;

  const auto ca = correlation_curve(a, r_grid, dirs);
  const auto cb = correlation_curve(b, r_grid, dirs);
  double diff = 0.0, sup = 0.0;
  for (std::size_t i = 0; i < ca.size(); ++i) {
    diff = std::max(diff, std::abs(ca[i] - cb[i]));
    sup = std::max({sup, std::abs(ca[i]), std::abs(cb[i])});
  }
  d.correlation = sup > 0.0 ? diff / sup : 0.0;

  const auto probes = probe_points(grid);
  double w = 0.0;
  for (std::size_t x : probes) {
    std::vector<double> va, vb;
    for (const auto& u : a) va.push_back(u.component(0)[x]);
    for (const auto& u : b) vb.push_back(u.component(0)[x]);
    w += wasserstein1(va, vb);
  }
  d.wasserstein = w / static_cast<double>(probes.size());
  return d;
}

}  // namespace

StatisticDistances statistic_distance(const Ensemble& a, const Ensemble& b, std::span<const double> r_grid,
                                      const DirectionSet& dirs) {
  if (a.members.empty() || b.members.empty()) throw PreconditionError("empty ensemble");
  if (!(a.grid() == b.grid())) throw PreconditionError("statistic distance needs a common grid");
  StatisticDistances out;
  const auto full = raw_distances(a.members, b.members, r_grid, dirs);
  out.mean_field = full.mean_field;
  out.correlation = full.correlation;
  out.wasserstein = full.wasserstein;
  const std::size_t M = a.size();
  if (M != b.size() || M < 2) return out;
  // Paired leave-one-out jackknife.
  std::vector<RawDistances> loo;
  for (std::size_t skip = 0; skip < M; ++skip) {
    std::vector<VelocityField> ra, rb;
    for (std::size_t m = 0; m < M; ++m) {
      if (m == skip) continue;
      ra.push_back(a.members[m]);
      rb.push_back(b.members[m]);
    }
    loo.push_back(raw_distances(ra, rb, r_grid, dirs));
  }
  auto se = [&](double RawDistances::*field) {
    double mean = 0.0;
    for (const auto& d : loo) mean += d.*field;
    mean /= static_cast<double>(M);
    double s = 0.0;
    for (const auto& d : loo) s += (d.*field - mean) * (d.*field - mean);
    return std::sqrt(static_cast<double>(M - 1) / static_cast<double>(M) * s);
  };
  out.se_mean_field = se(&RawDistances::mean_field);
  out.se_correlation = se(&RawDistances::correlation);
  out.se_wasserstein = se(&RawDistances::wasserstein);
  return out;
}

StatisticDistances statistic_distance(const SweepReport& report, std::size_t i, std::size_t j) {
  const auto dirs = DirectionSet::make(report.plan.grid.dim, report.plan.directions);
  return statistic_distance(report.runs.at(i).final_ensemble, report.runs.at(j).final_ensemble,
                            report.plan.r_grid, dirs);
}

}  // namespace nsstat
