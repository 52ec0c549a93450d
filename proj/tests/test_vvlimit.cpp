#include <cmath>

#include "doctest.h"
#include "nsstat/error.hpp"
#include "nsstat/vvlimit.hpp"
#include "oracles.hpp"

using namespace nsstat;

namespace {

SweepPlan tiny_plan() {
  SweepPlan p;
  p.nus = {0.05, 0.02};
  p.grid = Grid::make(2, 16);
  p.spec.k_max = 4;
  p.spec.seed = 5;
  p.members = 2;
  p.t_end = 0.2;
  p.snapshot_interval = 0.05;
  p.fk_interval = 0.01;
  p.r_grid = log_spaced(0.2, 1.2, 6);
  p.directions = 16;
  p.fk_test.theta = {TimeProfile::Kind::RaisedCosine, 0.2};
  p.fk_test.psi1 = {FourierMode{{1, 1, 0}, {1.0, -1.0, 0.0}, {0.0, 0.0, 0.0}}};
  p.khm_omega = RadialProfile::bump(0.8);
  return p;
}

}  // namespace

TEST_CASE("Wasserstein-1 on small empirical measures") {
  CHECK(wasserstein1({0.0, 1.0}, {1.0, 2.0}) == doctest::Approx(1.0));
  CHECK(wasserstein1({0.0}, {0.0, 2.0}) == doctest::Approx(1.0));
  CHECK(wasserstein1({3.0, 1.0, 2.0}, {1.0, 2.0, 3.0}) == 0.0);
  // Mean absolute difference of sorted samples for equal sizes.
  CHECK(wasserstein1({0.0, 4.0, 1.0}, {2.0, 2.0, 2.0}) == doctest::Approx((2.0 + 1.0 + 2.0) / 3.0));
  CHECK_THROWS_AS(wasserstein1({}, {1.0}), PreconditionError);
}

TEST_CASE("DC uniformity recovers a power-law envelope") {
  const auto r = log_spaced(0.1, 1.0, 8);
  const std::vector<double> nus{0.01, 0.005, 0.0025};
  std::vector<std::vector<double>> curves;
  for (double scale : {0.5, 0.8, 1.0}) {
    std::vector<double> c;
    for (double x : r) c.push_back(scale * 2.0 * std::pow(x, 0.7));
    curves.push_back(c);
  }
  const auto u = dc_uniformity(nus, r, curves);
  CHECK(!u.fit_skipped);
  CHECK(u.alpha == doctest::Approx(0.7).epsilon(1e-10));
  CHECK(u.C == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(u.worst_nu == 0.0025);
  CHECK(u.nu_monotone);
  CHECK(u.envelope_nondecreasing);
  CHECK_THROWS_AS(dc_uniformity(nus, std::vector<double>(r.begin(), r.begin() + 3), curves), ConfigError);
}

TEST_CASE("sweep plan validation") {
  auto p = tiny_plan();
  CHECK_NOTHROW(p.validate());
  p.nus = {0.01, 0.02};
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.nus = {0.01, 0.01};
  CHECK_NOTHROW(p.validate());
  p.fk_interval = 0.03;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = tiny_plan();
  p.r_grid = {0.5, 3.5};
  CHECK_THROWS_AS(p.validate(), DomainError);
  CHECK(tiny_plan().fine_times().size() == 21);
  CHECK(tiny_plan().snapshot_times().size() == 5);
}

TEST_CASE("statistic distances vanish between identical ensembles") {
  MeasureSpec spec;
  spec.k_max = 4;
  const auto e = sample_initial(spec, 4, Grid::make(2, 16));
  const auto r = log_spaced(0.2, 1.0, 5);
  const auto d = statistic_distance(e, e, r, DirectionSet::make(2, 16));
  CHECK(d.mean_field == 0.0);
  CHECK(d.correlation == 0.0);
  CHECK(d.wasserstein == 0.0);
}

TEST_CASE("a tiny sweep produces a complete report") {
  const auto p = tiny_plan();
  std::vector<std::string> log;
  const auto rep = run_sweep(p, [&](const std::string& s) { log.push_back(s); });
  REQUIRE(rep.runs.size() == 2);
  CHECK(!log.empty());
  CHECK(rep.distances.size() == 1);
  for (const auto& run : rep.runs) {
    CHECK(!run.failed);
    CHECK(run.times.size() == 21);
    CHECK(run.energy_defect < 1e-4);
    CHECK(run.dc_integrated.size() == p.r_grid.size());
    CHECK(run.fk1.relative() < 0.05);
    CHECK(!run.bounds.violated);
    CHECK(run.final_ensemble.size() == 2);
  }
  // Resolution flag: n/3 = 5.33 ≥ ν^{-1/2} = 4.47 for 0.05, < 7.07 for 0.02.
  CHECK(rep.runs[0].resolved);
  CHECK(!rep.runs[1].resolved);
  CHECK(rep.inviscid_k1.residuals.size() == 2);
  CHECK(rep.dc.envelope.size() == p.r_grid.size());
}

TEST_CASE("repeated viscosities give identical sub-reports") {
  auto p = tiny_plan();
  p.nus = {0.05, 0.05};
  const auto rep = run_sweep(p);
  REQUIRE(rep.runs.size() == 2);
  const auto& a = rep.runs[0];
  const auto& b = rep.runs[1];
  CHECK(a.energy_defect == b.energy_defect);
  CHECK(a.fk1.residual == b.fk1.residual);
  CHECK(a.fk2.residual == b.fk2.residual);
  CHECK(a.dc_integrated == b.dc_integrated);
  CHECK(a.structure.S_par.at(3) == b.structure.S_par.at(3));
  CHECK(a.khm.residual == b.khm.residual);
  REQUIRE(rep.distances.size() == 1);
  CHECK(rep.distances[0].mean_field == 0.0);
  CHECK(rep.distances[0].correlation == 0.0);
  CHECK(rep.distances[0].wasserstein == 0.0);
}
