#include <cmath>

#include "doctest.h"
#include "nsstat/error.hpp"
#include "nsstat/solver.hpp"
#include "nsstat/structure.hpp"
#include "oracles.hpp"
#include "tg_oracle.hpp"

using namespace nsstat;

namespace {

// u = (ψ_y, −ψ_x) with ψ = cos y + 0.5 sin(2x + y) + 0.3 cos(x − 3y).
Vec3 analytic(double x, double y) {
  const double psi_x = std::cos(2 * x + y) - 0.3 * std::sin(x - 3 * y);
  const double psi_y = -std::sin(y) + 0.5 * std::cos(2 * x + y) + 0.9 * std::sin(x - 3 * y);
  return {psi_y, -psi_x, 0.0};
}

}  // namespace

TEST_CASE("direction sets integrate n⊗n to I/d") {
  for (int dim : {2, 3}) {
    for (int count : {8, 64, 128}) {
      const auto dirs = DirectionSet::make(dim, count);
      REQUIRE(dirs.size() == static_cast<std::size_t>(count));
      double wsum = 0.0;
      Mat3 nn{};
      for (std::size_t a = 0; a < dirs.size(); ++a) {
        wsum += dirs.weights[a];
        CHECK(std::hypot(dirs.dirs[a][0], dirs.dirs[a][1], dirs.dirs[a][2]) == doctest::Approx(1.0));
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) nn[i][j] += dirs.weights[a] * dirs.dirs[a][i] * dirs.dirs[a][j];
      }
      CHECK(wsum == doctest::Approx(1.0));
      const double tol = 1e-13;
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) CHECK(std::abs(nn[i][j] - (i == j ? 1.0 / dim : 0.0)) < tol);
    }
  }
  // 10 = 2·5 has no even azimuth count: Fibonacci fallback, still antipodal.
  const auto fib = DirectionSet::make(3, 10);
  REQUIRE(fib.size() == 10);
  CHECK(fib.dirs[0][2] == doctest::Approx(-fib.dirs[5][2]));
  CHECK_THROWS_AS(DirectionSet::make(2, 7), ConfigError);
  CHECK_THROWS_AS(DirectionSet::make(3, 6), ConfigError);
}

TEST_CASE("ball rule moments") {
  for (int dim : {2, 3}) {
    const auto dirs = DirectionSet::make(dim, 64);
    const double r = 0.7;
    const auto rule = ball_rule(dirs, r, 8);
    double w = 0.0, m2 = 0.0;
    for (std::size_t a = 0; a < rule.offsets.size(); ++a) {
      const auto& y = rule.offsets[a];
      w += rule.weights[a];
      m2 += rule.weights[a] * (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]);
      CHECK(std::hypot(y[0], y[1], y[2]) <= r);
    }
    CHECK(w == doctest::Approx(1.0));
    CHECK(m2 == doctest::Approx(dim * r * r / (dim + 2.0)).epsilon(1e-12));
  }
}

TEST_CASE("weak anisotropy identity for solenoidal fields") {
  for (int dim : {2, 3}) {
    const auto g = Grid::make(dim, dim == 2 ? 32 : 16);
    const std::vector<VelocityField> f{oracle::random_solenoidal(g, dim == 2 ? 5 : 3, 9)};
    const auto dirs = DirectionSet::make(dim, 128);
    for (double r : {0.2, 0.5}) {
      const auto res = weak_anisotropy_residual(f, r, dirs, 16);
      CHECK(res.lhs > 0.0);
      CHECK(res.residual < 0.02);
    }
  }
  // A gradient field breaks the identity and is rejected.
  const auto g = Grid::make(2, 16);
  const std::vector<VelocityField> bad{oracle::random_field(g, 1)};
  CHECK_THROWS_AS(weak_anisotropy_residual(bad, 0.3, DirectionSet::make(2, 32)), PreconditionError);
}

TEST_CASE("structure functions match direct analytic quadrature") {
  const auto g = Grid::make(2, 32);
  const auto u = VelocityField::from_function(g, [](const Vec3& x) { return analytic(x[0], x[1]); });
  Ensemble e0, e1;
  e0.members = {u};
  e1.members = {u.with_metadata(1.0, 0.0)};
  e1.time = 1.0;
  const std::vector<Ensemble> ens{e0, e1};
  const auto dirs = DirectionSet::make(2, 16);
  const std::vector<double> r{0.3, 0.9};
  const std::vector<int> ps{2, 3};
  const auto table = structure_functions(ens, r, dirs, ps);
  CHECK(table.tau == 1.0);
  for (std::size_t a = 0; a < r.size(); ++a) {
    double s2 = 0.0, s3 = 0.0, s0 = 0.0;
    for (std::size_t b = 0; b < dirs.size(); ++b) {
      const auto& n = dirs.dirs[b];
      const auto moments = [&](double x, double y, double z, int which) {
        (void)z;
        const auto p = analytic(x, y), q = analytic(x + r[a] * n[0], y + r[a] * n[1]);
        const double dx = q[0] - p[0], dy = q[1] - p[1];
        const double l = dx * n[0] + dy * n[1];
        return which == 2 ? l * l : which == 3 ? l * l * l : (dx * dx + dy * dy) * l;
      };
      s2 += dirs.weights[b] * oracle::grid_integral(2, 32, [&](double x, double y, double z) { return moments(x, y, z, 2); });
      s3 += dirs.weights[b] * oracle::grid_integral(2, 32, [&](double x, double y, double z) { return moments(x, y, z, 3); });
      s0 += dirs.weights[b] * oracle::grid_integral(2, 32, [&](double x, double y, double z) { return moments(x, y, z, 0); });
    }
    CHECK(table.S_par.at(2)[a] == doctest::Approx(s2).epsilon(1e-11));
    CHECK(table.S_par.at(3)[a] == doctest::Approx(s3).epsilon(1e-9).scale(s2));
    CHECK(table.S0_3[a] == doctest::Approx(s0).epsilon(1e-9).scale(s2));
    CHECK(table.S_perp_3[a] == doctest::Approx(s0 - s3).epsilon(1e-9).scale(s2));
  }
  CHECK_THROWS_AS(structure_functions(ens, std::vector<double>{4.0}, dirs, ps), DomainError);
  CHECK_THROWS_AS(structure_functions(ens, r, dirs, std::vector<int>{4}), ConfigError);
}

TEST_CASE("Taylor-Green S2 against the brute-force oracle") {
  const auto g = Grid::make(2, 32);
  const double nu = 0.01;
  SolverConfig cfg;
  cfg.nu = nu;
  cfg.dt = 1e-3;
  cfg.t_end = 0.5;
  cfg.snapshot_interval = 0.01;
  const auto traj = run(taylor_green(g), cfg);
  std::vector<Ensemble> ens;
  for (const auto& s : traj.snapshots) {
    Ensemble e;
    e.members = {s};
    e.time = s.time();
    ens.push_back(e);
  }
  const std::vector<double> r{0.1, 0.5, 1.2};
  const auto table = structure_functions(ens, r, DirectionSet::make(2, 64), std::vector<int>{2, 3});
  const auto ref = taylor_green_s2par(nu, 0.5, r, 32, 360);
  for (std::size_t a = 0; a < r.size(); ++a) CHECK(table.S_par.at(2)[a] == doctest::Approx(ref[a]).epsilon(1e-4));
  const auto b = bound_check(table);
  CHECK(!b.violated);
}

TEST_CASE("bound check arithmetic") {
  StructureFunctionTable t;
  t.r_grid = {0.1, 0.2};
  t.E0 = 2.0;
  t.S_par[3] = {-0.3, 0.4};
  t.S0_3 = {0.1, -1.0};
  t.S_perp_3 = {0.4, -1.4};
  const auto b = bound_check(t);
  CHECK(b.ratio_par == doctest::Approx(0.75));  // 0.3/0.1/4
  CHECK(b.ratio_S0 == doctest::Approx(1.25));   // 1.0/0.2/4
  CHECK(b.violated);
  t.S0_3 = {0.1, -0.82};
  CHECK(!bound_check(t).violated);
  t.E0 = 0.0;
  CHECK_THROWS_AS(bound_check(t), DegenerateInputError);
}

TEST_CASE("She-Leveque exponents and scaling fits") {
  CHECK(she_leveque(3) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(she_leveque(2) == doctest::Approx(2.0 / 9.0 + 2 * (1 - std::pow(2.0 / 3.0, 2.0 / 3.0))).epsilon(1e-14));
  const auto r = log_spaced(0.05, 1.0, 12);
  CHECK(r.front() == doctest::Approx(0.05));
  CHECK(r.back() == doctest::Approx(1.0));
  std::map<int, std::vector<double>> S;
  for (double x : r) {
    S[2].push_back(3.0 * std::pow(x, she_leveque(2)));
    S[3].push_back(-0.8 * x);
  }
  const auto fit = scaling_fit(r, S, 0.05, 1.0);
  CHECK(fit.zeta.at(2) == doctest::Approx(she_leveque(2)).epsilon(1e-10));
  CHECK(fit.zeta.at(3) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(fit.alpha == doctest::Approx(she_leveque(2)).epsilon(1e-10));
  CHECK(!fit.degraded);
  CHECK_THROWS_AS(scaling_fit(r, S, 0.5, 1.0), ConfigError);
  S[3][4] = -S[3][4];
  CHECK(scaling_fit(r, S, 0.05, 1.0).degraded);
}
