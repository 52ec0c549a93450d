#include <cmath>

#include "doctest.h"
#include "nsstat/ensemble.hpp"
#include "nsstat/error.hpp"
#include "nsstat/solver.hpp"
#include "oracles.hpp"

using namespace nsstat;

TEST_CASE("Taylor-Green decays as exp(-2 nu t)") {
  const auto g = Grid::make(2, 32);
  SolverConfig cfg;
  cfg.nu = 0.05;
  cfg.dt = 5e-3;
  cfg.t_end = 1.0;
  cfg.snapshot_interval = 0.25;
  const auto u0 = taylor_green(g);
  const auto traj = run(u0, cfg);
  REQUIRE(traj.times.size() == 5);
  for (std::size_t j = 0; j < traj.times.size(); ++j) {
    const auto exact = u0.scaled(std::exp(-2.0 * cfg.nu * traj.times[j]));
    CHECK(l2_distance(traj.snapshots[j], exact) < 1e-10);
  }
  CHECK(energy_budget(traj) < 1e-7);
}

TEST_CASE("zero field stays zero") {
  SolverConfig cfg;
  cfg.nu = 0.1;
  const auto traj = run(VelocityField::zero(Grid::make(2, 16)), cfg);
  for (const auto& s : traj.snapshots) CHECK(std::sqrt(energy(s).value) == 0.0);
  CHECK(energy_budget(traj) == 0.0);
}

TEST_CASE("nonlinear term of a shear flow vanishes") {
  const auto g = Grid::make(2, 32);
  const auto r = rhs_eval(shear_flow(g));
  CHECK(std::sqrt(energy(r).value) < 1e-12);
}

TEST_CASE("nonlinear term conserves energy and stays solenoidal") {
  const auto g = Grid::make(2, 32);
  const auto u = oracle::random_solenoidal(g, 6, 17);
  const auto r = rhs_eval(u, true);
  CHECK(std::abs(inner_product(u, r)) < 1e-10 * energy(u).value * std::sqrt(energy(r).value));
  CHECK(divergence_ratio(r) < 1e-12);
}

TEST_CASE("inviscid energy conservation and viscous budget") {
  const auto g = Grid::make(2, 32);
  MeasureSpec spec;
  spec.k_max = 6;
  spec.seed = 4;
  const auto u0 = sample_initial(spec, 1, g).members[0];
  SolverConfig cfg;
  cfg.nu = 0.0;
  cfg.t_end = 0.5;
  cfg.snapshot_interval = 0.25;
  cfg.cfl = 0.3;
  const auto traj = run(u0, cfg);
  CHECK(energy_budget(traj) < 1e-5);
  cfg.nu = 0.02;
  CHECK(energy_budget(run(u0, cfg)) < 1e-5);
}

TEST_CASE("runs stop exactly at output times") {
  SolverConfig cfg;
  cfg.nu = 0.01;
  cfg.t_end = 0.3;
  cfg.snapshot_interval = 0.1;
  const auto traj = run(taylor_green(Grid::make(2, 16)), cfg);
  REQUIRE(traj.times.size() == 4);
  CHECK(traj.times[3] == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(traj.snapshots[2].time() == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("solver configuration and blow-up errors") {
  SolverConfig cfg;
  cfg.nu = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.nu = 0.0;
  cfg.dt = 0.5;
  cfg.t_end = 5.0;
  cfg.snapshot_interval = 1.0;
  MeasureSpec spec;
  spec.k_max = 10;
  spec.support_radius = 1e6;
  spec.perturbation_amp = 1e3;
  const auto u0 = sample_initial(spec, 1, Grid::make(2, 32)).members[0];
  CHECK_THROWS_AS(run(u0, cfg), BlowUpError);
}
