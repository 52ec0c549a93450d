#include <cmath>

#include "doctest.h"
#include "nsstat/correlation.hpp"
#include "nsstat/error.hpp"
#include "nsstat/solver.hpp"
#include "oracles.hpp"

using namespace nsstat;

namespace {

Ensemble singleton(const VelocityField& u, double nu = 0.0) {
  Ensemble e;
  e.members = {u};
  e.nu = nu;
  e.time = u.time();
  return e;
}

FourierMode shear_mode() { return FourierMode{{0, 1, 0}, {0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}}; }

}  // namespace

TEST_CASE("pair observables reproduce energy and the two-point correlation") {
  const auto g = Grid::make(2, 32);
  Ensemble e;
  e.members = {oracle::random_solenoidal(g, 3, 1), oracle::random_solenoidal(g, 3, 2)};
  const double E = pair_observable(e, [](const Vec3&, const Vec3& xi) { return xi[0] * xi[0] + xi[1] * xi[1]; });
  CHECK(E == doctest::Approx(mean_energy(e)).epsilon(1e-12));
  const std::vector<Vec3> offsets{{0.5, 0.0, 0.0}, {0.0, 0.25, 0.0}, {0.3, -0.4, 0.0}};
  const auto direct = pair_observable(
      e, [](const Vec3&, const Vec3&, const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1]; }, offsets);
  const auto tp = two_point_correlation(e, offsets);
  // two_point_correlation sorts by |h|: 0.25, 0.5, 0.5.
  CHECK(tp.radii[0] == doctest::Approx(0.25));
  CHECK(tp.values[0] == doctest::Approx(direct[1]).epsilon(1e-10));
}

TEST_CASE("shear flow two-point correlation") {
  const auto g = Grid::make(2, 32);
  const auto e = singleton(shear_flow(g));
  const std::vector<Vec3> offsets{{0.0, 0.7, 0.0}, {1.1, 0.0, 0.0}};
  const auto tp = two_point_correlation(e, offsets);
  const double pi2 = oracle::pi * oracle::pi;
  CHECK(tp.values[0] == doctest::Approx(2 * pi2 * std::cos(0.7)).epsilon(1e-12));
  CHECK(tp.values[1] == doctest::Approx(2 * pi2).epsilon(1e-12));
}

TEST_CASE("DC modulus of a shear flow against the Bessel closed form") {
  // ω_r² = 4π²(1 − 2J₁(r)/r) for u = (sin y, 0).
  const auto g = Grid::make(2, 128);
  const auto e = singleton(shear_flow(g));
  for (double r : {0.5, 1.0, 2.0}) {
    const double exact = 4 * oracle::pi * oracle::pi * (1 - 2 * std::cyl_bessel_j(1.0, r) / r);
    CHECK(dc_modulus(e, r, 2.0) == doctest::Approx(exact).epsilon(0.01));
  }
  // Small radius falls back to off-lattice offsets and still converges.
  const double r = 0.02;
  const double exact = 4 * oracle::pi * oracle::pi * (1 - 2 * std::cyl_bessel_j(1.0, r) / r);
  CHECK(dc_modulus(e, r, 2.0) == doctest::Approx(exact).epsilon(0.05));
  CHECK_THROWS_AS(dc_modulus(e, 0.0), DomainError);
  CHECK_THROWS_AS(dc_modulus(e, 3.5), DomainError);
}

TEST_CASE("DC modulus for general p matches the spectral p = 2 path") {
  const auto g = Grid::make(2, 32);
  Ensemble e;
  e.members = {oracle::random_solenoidal(g, 4, 8)};
  const double two = dc_modulus(e, 0.6, 2.0);
  const double two_general = dc_modulus(e, 0.6, 2.0000000001);
  CHECK(two_general == doctest::Approx(two).epsilon(1e-6));
  CHECK(dc_modulus(e, 0.6, 3.0) > 0.0);
}

TEST_CASE("time profiles") {
  for (auto kind : {TimeProfile::Kind::RaisedCosine, TimeProfile::Kind::FlatStep}) {
    const TimeProfile th{kind, 2.0};
    CHECK(th.value(0.0) == doctest::Approx(1.0));
    CHECK(std::abs(th.value(2.0)) < 1e-15);
    for (double t : {0.3, 1.0, 1.7}) {
      const double eps = 1e-6;
      const double fd = (th.value(t + eps) - th.value(t - eps)) / (2 * eps);
      CHECK(th.derivative(t) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
  const TimeProfile c{TimeProfile::Kind::Constant, 1.0};
  CHECK(c.value(0.7) == 1.0);
  CHECK(c.derivative(0.7) == 0.0);
}

TEST_CASE("FK test fields must be divergence free") {
  const auto g = Grid::make(2, 16);
  const std::vector<FourierMode> bad{FourierMode{{1, 0, 0}, {1.0, 0.0, 0.0}, {0.0, 0.0, 0.0}}};
  CHECK_THROWS_AS(fourier_test_field(g, bad), PreconditionError);
  const std::vector<FourierMode> good{shear_mode()};
  const auto psi = fourier_test_field(g, good);
  CHECK(max_abs_difference(psi, shear_flow(g)) < 1e-14);
}

TEST_CASE("FK residual closes on the decaying shear flow") {
  const auto g = Grid::make(2, 16);
  const double nu = 0.1;
  SolverConfig cfg;
  cfg.nu = nu;
  cfg.dt = 1e-3;
  cfg.t_end = 1.0;
  cfg.snapshot_interval = 1e-3;
  const auto traj = run(shear_flow(g), cfg);
  std::vector<Ensemble> ens;
  for (const auto& s : traj.snapshots) ens.push_back(singleton(s, nu));
  FKTestFunction test;
  test.theta = {TimeProfile::Kind::FlatStep, 1.0};
  test.psi1 = {shear_mode(), FourierMode{{1, 1, 0}, {1.0, -1.0, 0.0}, {0.0, 0.0, 0.0}}};
  for (int k : {1, 2}) {
    const auto r = fk_residual(ens, k, test, nu);
    CHECK(r.relative() < 1e-6);
    CHECK(r.terms.count("terminal") == 0);
    // Without the viscous term the balance is visibly broken.
    CHECK(fk_residual(ens, k, test, nu, true).relative() > 1e-3);
  }
}

TEST_CASE("divergence constraint vanishes for solenoidal ensembles only") {
  const auto g = Grid::make(2, 32);
  Ensemble e;
  e.members = {oracle::random_solenoidal(g, 4, 1), oracle::random_solenoidal(g, 4, 2)};
  DivergenceTest t1;
  t1.f = [](const Vec3& x) { return std::sin(x[0]) * std::cos(2 * x[1]); };
  t1.g = [](const Vec3& x) { return std::cos(3 * x[0] + x[1]); };
  t1.g_vec = [](const Vec3& x) { return Vec3{std::sin(x[1]), std::cos(x[0]), 0.0}; };
  for (auto [k, ell] : {std::pair{1, 1}, std::pair{2, 1}, std::pair{2, 2}}) {
    t1.k = k;
    t1.ell = ell;
    const auto r = divergence_constraint_residual(e, t1);
    CHECK(r.scale > 0.0);
    CHECK(r.relative() < 1e-12);
  }
  // Adding the gradient of f makes the pairing nonzero.
  const auto grad = VelocityField::from_function(g, [](const Vec3& x) -> Vec3 {
    return {std::cos(x[0]) * std::cos(2 * x[1]), -2 * std::sin(x[0]) * std::sin(2 * x[1]), 0.0};
  });
  Ensemble bad;
  bad.members = {add(e.members[0], grad)};
  t1.k = 1;
  t1.ell = 1;
  CHECK(divergence_constraint_residual(bad, t1).relative() > 0.1);
}

TEST_CASE("gradient two-point representation converges to the H1 seminorm") {
  const auto g = Grid::make(2, 64);
  Ensemble e;
  e.members = {oracle::random_solenoidal(g, 3, 4), oracle::random_solenoidal(g, 3, 5)};
  const double h1 = mean_h1(e);
  std::vector<double> hs;
  for (int m : {8, 4, 2, 1}) hs.push_back(g.dx() * m);
  const auto G = gradient_two_point(e, hs);
  for (std::size_t i = 1; i < G.size(); ++i) CHECK(std::abs(G[i] - h1) < std::abs(G[i - 1] - h1));
  CHECK(std::abs(G.back() - h1) < 0.05 * h1);
  // Second-order convergence: error ratio near 4 per halving.
  CHECK(std::abs(G[2] - h1) / std::abs(G[3] - h1) == doctest::Approx(4.0).epsilon(0.05));
}
