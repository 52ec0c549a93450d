#include <cmath>

#include "doctest.h"
#include "nsstat/ensemble.hpp"
#include "nsstat/error.hpp"
#include "oracles.hpp"

using namespace nsstat;

TEST_CASE("sampling is reproducible and seed dependent") {
  MeasureSpec spec;
  spec.seed = 123;
  const auto g = Grid::make(2, 32);
  const auto a = sample_initial(spec, 4, g);
  const auto b = sample_initial(spec, 4, g);
  for (std::size_t m = 0; m < 4; ++m) CHECK(max_abs_difference(a.members[m], b.members[m]) == 0.0);
  CHECK(max_abs_difference(a.members[0], a.members[1]) > 0.1);
  spec.seed = 124;
  const auto c = sample_initial(spec, 4, g);
  CHECK(max_abs_difference(a.members[0], c.members[0]) > 0.1);
  // A member does not depend on the ensemble size.
  const auto d = sample_initial(spec, 2, g);
  CHECK(max_abs_difference(c.members[1], d.members[1]) == 0.0);
}

TEST_CASE("samples are solenoidal, band limited and inside the support") {
  MeasureSpec spec;
  spec.k_min = 2;
  spec.k_max = 6;
  spec.support_radius = 5.0;
  spec.perturbation_amp = 3.0;
  for (int dim : {2, 3}) {
    const auto g = Grid::make(dim, dim == 2 ? 32 : 16);
    spec.k_max = dim == 2 ? 6 : 4;
    const auto ens = sample_initial(spec, 3, g);
    ens.validate();
    for (const auto& u : ens.members) {
      CHECK(divergence_ratio(u) < 1e-12);
      CHECK(std::sqrt(energy(u).value) <= 5.0);
      const auto shells = shell_spectrum(u);
      for (std::size_t s = 0; s < shells.size(); ++s) {
        if (s < 2 || s > static_cast<std::size_t>(spec.k_max) + 1) CHECK(shells[s] < 1e-20);
      }
    }
  }
}

TEST_CASE("mean shell spectrum follows the prescribed slope") {
  MeasureSpec spec;
  spec.k_min = 1;
  spec.k_max = 20;
  spec.spectrum_slope = 2.0;
  spec.support_radius = 1e9;
  const auto g = Grid::make(2, 64);
  const auto ens = sample_initial(spec, 8, g);
  std::vector<double> mean(40, 0.0);
  for (const auto& u : ens.members) {
    const auto s = shell_spectrum(u);
    for (std::size_t i = 0; i < s.size() && i < mean.size(); ++i) mean[i] += s[i];
  }
  // Amplitudes are fixed per shell, so the slope is exact on interior shells.
  std::vector<double> x, y;
  for (int k = 3; k <= 18; ++k) {
    x.push_back(std::log(k));
    y.push_back(std::log(mean[static_cast<std::size_t>(k)]));
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double n = static_cast<double>(x.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope == doctest::Approx(-2.0).epsilon(0.05));
}

TEST_CASE("measure validation") {
  const auto g = Grid::make(2, 32);
  MeasureSpec spec;
  spec.k_max = 11;
  CHECK_THROWS_AS(spec.validate(g), ConfigError);
  spec.k_max = 10;
  CHECK_NOTHROW(spec.validate(g));
  spec.kind = MeasureKind::PerturbedBase;
  CHECK_THROWS_AS(spec.validate(g), ConfigError);
  spec.base = BaseFlow::TaylorGreen;
  CHECK_NOTHROW(spec.validate(g));
  spec.support_radius = -1.0;
  CHECK_THROWS_AS(spec.validate(g), ConfigError);
}

TEST_CASE("singleton Taylor-Green ensemble equals the deterministic run") {
  const auto g = Grid::make(2, 32);
  MeasureSpec spec;
  spec.kind = MeasureKind::PerturbedBase;
  spec.base = BaseFlow::TaylorGreen;
  spec.perturbation_amp = 0.0;
  const auto ens = sample_initial(spec, 1, g, 0.02);
  CHECK(max_abs_difference(ens.members[0], taylor_green(g)) < 1e-14);
  SolverConfig cfg;
  cfg.nu = 0.02;
  cfg.dt = 1e-2;
  cfg.t_end = 0.4;
  cfg.snapshot_interval = 0.2;
  const auto times = cfg.output_times();
  const auto evolved = evolve(ens, cfg, times);
  const auto traj = run(taylor_green(g), cfg);
  REQUIRE(evolved.size() == traj.snapshots.size());
  for (std::size_t j = 0; j < evolved.size(); ++j) {
    CHECK(evolved[j].time == doctest::Approx(traj.times[j]));
    CHECK(max_abs_difference(evolved[j].members[0], traj.snapshots[j]) == 0.0);
  }
}

TEST_CASE("statistical energy inequality holds with equality for smooth runs") {
  MeasureSpec spec;
  spec.k_max = 5;
  const auto ens = sample_initial(spec, 3, Grid::make(2, 32), 0.05);
  SolverConfig cfg;
  cfg.nu = 0.05;
  cfg.dt = 2e-3;
  cfg.t_end = 0.2;
  cfg.snapshot_interval = 0.02;
  const auto times = cfg.output_times();
  const auto ensembles = evolve(ens, cfg, times);
  for (const auto& c : statistical_energy_check(ensembles, 3)) CHECK(std::abs(c.worst_relative) < 1e-3);
}

TEST_CASE("zero-amplitude measure gives the base flow for every member") {
  MeasureSpec spec;
  spec.kind = MeasureKind::PerturbedBase;
  spec.base = BaseFlow::Shear;
  spec.perturbation_amp = 0.0;
  spec.k_max = 4;
  const auto g = Grid::make(2, 16);
  const auto ens = sample_initial(spec, 3, g);
  for (const auto& u : ens.members) CHECK(max_abs_difference(u, shear_flow(g)) < 1e-14);
}
