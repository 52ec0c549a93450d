#include "nsstat/checks.hpp"

#include <cmath>
#include <random>

#include "nsstat/correlation.hpp"
#include "nsstat/ensemble.hpp"
#include "nsstat/error.hpp"
#include "nsstat/khm.hpp"
#include "nsstat/solver.hpp"
#include "nsstat/structure.hpp"

namespace nsstat {

namespace {

CheckResult below(const std::string& suite, const std::string& name, double value, double tol) {
  return {suite, name, value <= tol, value, tol, {}};
}

VelocityField random_field(const Grid& grid, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<std::vector<double>> comps(static_cast<std::size_t>(grid.dim), std::vector<double>(grid.points()));
  for (auto& c : comps)
    for (auto& v : c) v = normal(rng);
  return VelocityField(grid, std::move(comps));
}

double norm(const VelocityField& u) { return std::sqrt(energy(u).value); }

std::vector<CheckResult> leray_suite() {
  std::mt19937_64 rng(20240601);
  std::normal_distribution<double> normal;
  double idem = 0.0, adj = 0.0, grad = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Grid grid = Grid::make(trial % 2 == 0 ? 2 : 3, 16);
    const auto u = random_field(grid, rng);
    const auto v = random_field(grid, rng);
    const auto pu = leray_project(u);
    idem = std::max(idem, l2_distance(leray_project(pu), pu) / norm(pu));
    adj = std::max(adj, std::abs(inner_product(pu, v) - inner_product(u, leray_project(v))) / (norm(u) * norm(v)));
    std::vector<double> phi(grid.points());
    for (auto& p : phi) p = normal(rng);
    const auto g = gradient_of_scalar(grid, phi);
    grad = std::max(grad, norm(leray_project(g)) / norm(g));
  }
  return {below("leray", "idempotence", idem, 1e-10), below("leray", "self_adjointness", adj, 1e-10),
          below("leray", "gradient_annihilation", grad, 1e-10)};
}

std::vector<CheckResult> energy_suite() {
  MeasureSpec spec;
  spec.k_max = 5;
  spec.seed = 7;
  const Grid grid = Grid::make(2, 32);
  const auto ens = sample_initial(spec, 3, grid, 0.02);
  SolverConfig cfg;
  cfg.nu = 0.02;
  cfg.dt = 2e-3;
  cfg.t_end = 0.2;
  cfg.snapshot_interval = 0.05;
  double worst = 0.0;
  for (const auto& u0 : ens.members) worst = std::max(worst, energy_budget(run(u0, cfg)));
  const auto times = cfg.output_times();
  const auto ensembles = evolve(ens, cfg, times);
  const auto stat = statistical_energy_check(ensembles, 2);
  std::vector<CheckResult> out{below("energy", "trajectory_budget", worst, 1e-6)};
  for (const auto& c : stat) {
    out.push_back(below("energy", "statistical_inequality_k" + std::to_string(c.k), c.worst_relative, 1e-3));
  }
  return out;
}

std::vector<CheckResult> anisotropy_suite() {
  MeasureSpec spec;
  spec.k_max = 10;
  spec.seed = 11;
  const auto ens = sample_initial(spec, 4, Grid::make(2, 64));
  const auto dirs = DirectionSet::make(2, 128);
  std::vector<CheckResult> out;
  for (double r : {0.2, 0.5}) {
    const auto res = weak_anisotropy_residual(ens.members, r, dirs, 16);
    out.push_back(below("anisotropy", "r=" + std::to_string(r).substr(0, 3), res.residual, 0.02));
  }
  return out;
}

std::vector<CheckResult> taylor_green_suite() {
  const Grid grid = Grid::make(2, 32);
  const double nu = 0.01;
  SolverConfig cfg;
  cfg.nu = nu;
  cfg.dt = 1e-3;
  cfg.t_end = 0.5;
  cfg.snapshot_interval = 0.5;
  const auto u0 = taylor_green(grid);
  const auto traj = run(u0, cfg);
  const auto exact = u0.scaled(std::exp(-2.0 * nu * cfg.t_end));
  const double err = l2_distance(traj.snapshots.back(), exact) / norm(exact);
  return {below("taylor-green", "l2_error", err, 1e-6), below("taylor-green", "energy_budget", energy_budget(traj), 1e-6)};
}

std::vector<CheckResult> khm_shear_suite() {
  const Grid grid = Grid::make(2, 32);
  Ensemble ens;
  ens.members = {shear_flow(grid)};
  ens.nu = 0.05;
  ens.spec.kind = MeasureKind::PerturbedBase;
  ens.spec.base = BaseFlow::Shear;
  ens.spec.perturbation_amp = 0.0;
  SolverConfig cfg;
  cfg.nu = ens.nu;
  cfg.dt = 1e-3;
  cfg.t_end = 0.5;
  cfg.snapshot_interval = 0.01;
  const auto times = cfg.output_times();
  const auto ensembles = evolve(ens, cfg, times);
  const auto tensor = tensor_for(KHMForm::Trace, RadialProfile::bump(0.8), 2);
  const auto budget = khm_budget(ensembles, tensor, KHMForm::Trace);
  return {below("khm-shear", "trace_residual", budget.relative(), 1e-4),
          below("khm-shear", "viscous_agreement", budget.viscous_agreement(), 1e-6)};
}

std::vector<CheckResult> gradient_rep_suite() {
  MeasureSpec spec;
  spec.k_max = 4;
  spec.seed = 3;
  const Grid grid = Grid::make(2, 64);
  const auto ens = sample_initial(spec, 4, grid);
  const double h1 = mean_h1(ens);
  std::vector<double> hs;
  for (int m : {8, 4, 2, 1}) hs.push_back(grid.dx() * m);
  const auto G = gradient_two_point(ens, hs);
  bool decreasing = true;
  for (std::size_t i = 1; i < G.size(); ++i) decreasing = decreasing && std::abs(G[i] - h1) < std::abs(G[i - 1] - h1);
  CheckResult mono{"gradient-rep", "strictly_decreasing", decreasing, decreasing ? 1.0 : 0.0, 1.0, {}};
  return {mono, below("gradient-rep", "terminal_relative", std::abs(G.back() - h1) / h1, 0.05)};
}

}  // namespace

const std::vector<std::string>& check_suites() {
  static const std::vector<std::string> names = {"leray", "energy", "anisotropy", "taylor-green", "khm-shear",
                                                 "gradient-rep"};
  return names;
}

std::vector<CheckResult> run_check_suite(const std::string& suite) {
  if (suite == "leray") return leray_suite();
  if (suite == "energy") return energy_suite();
  if (suite == "anisotropy") return anisotropy_suite();
  if (suite == "taylor-green") return taylor_green_suite();
  if (suite == "khm-shear") return khm_shear_suite();
  if (suite == "gradient-rep") return gradient_rep_suite();
  throw ConfigError("unknown check suite '" + suite + "'");
}

}  // namespace nsstat
