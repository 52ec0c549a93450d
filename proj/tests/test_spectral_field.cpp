#include <cmath>

#include "doctest.h"
#include "nsstat/error.hpp"
#include "nsstat/fft.hpp"
#include "nsstat/field.hpp"
#include "oracles.hpp"

using namespace nsstat;

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(Grid::make(4, 32), ConfigError);
  CHECK_THROWS_AS(Grid::make(2, 24), ConfigError);
  CHECK_THROWS_AS(Grid::make(2, 4), ConfigError);
  const auto g = Grid::make(3, 16);
  CHECK(g.points() == 16 * 16 * 16);
  CHECK(g.spectral_size() == 9 * 16 * 16);
}

TEST_CASE("hermitian weights count the full spectrum") {
  for (int dim : {2, 3}) {
    const auto g = Grid::make(dim, 16);
    const auto& layout = SpectralLayout::of(g);
    double total = 0.0;
    for (double w : layout.weight) total += w;
    // n^{d-1}·(1 + 1 + 2·(n/2 − 1)) = n^d.
    CHECK(total == doctest::Approx(static_cast<double>(g.points())));
  }
}

TEST_CASE("forward FFT matches a direct DFT") {
  const auto g = Grid::make(2, 16);
  const auto u = oracle::random_field(g, 3);
  const std::vector<double> f(u.component(0).begin(), u.component(0).end());
  const auto& layout = SpectralLayout::of(g);
  for (std::size_t idx : {std::size_t{0}, std::size_t{3}, std::size_t{9 * 5 + 2}, std::size_t{9 * 13 + 7}}) {
    const auto& k = layout.k[idx];
    const auto ref = oracle::dft_coefficient(g, f, k[0], k[1]);
    CHECK(std::abs(u.spectral(0)[idx] - ref) < 1e-13);
  }
}

TEST_CASE("FFT round trip and Parseval") {
  for (int dim : {2, 3}) {
    const auto g = Grid::make(dim, 16);
    const auto u = oracle::random_field(g, 11 + dim);
    CHECK(max_abs_difference(fft_roundtrip(u), u) < 1e-12);
    CHECK(energy(u).value == doctest::Approx(real_space_energy(u)).epsilon(1e-12));
  }
}

TEST_CASE("leray projection on analytic fields") {
  const auto g = Grid::make(2, 32);
  // ∇(sin x cos 2y) is removed entirely.
  const auto grad = VelocityField::from_function(g, [](const Vec3& x) -> Vec3 {
    return {std::cos(x[0]) * std::cos(2 * x[1]), -2 * std::sin(x[0]) * std::sin(2 * x[1]), 0.0};
  });
  CHECK(std::sqrt(energy(leray_project(grad)).value) < 1e-12);
  // A divergence-free field is unchanged.
  const auto sol = oracle::random_solenoidal(g, 5, 2);
  CHECK(l2_distance(leray_project(sol), sol) < 1e-11 * std::sqrt(energy(sol).value));
  CHECK(divergence_ratio(sol) < 1e-12);
  // A constant field is a pure mean and is removed.
  const auto c = VelocityField::from_function(g, [](const Vec3&) -> Vec3 { return {1.0, 2.0, 0.0}; });
  CHECK(std::sqrt(energy(leray_project(c)).value) < 1e-12);
}

TEST_CASE("leray projection properties on random 3D fields") {
  const auto g = Grid::make(3, 16);
  const auto u = oracle::random_field(g, 5);
  const auto v = oracle::random_field(g, 6);
  const auto pu = leray_project(u);
  const double nu_ = std::sqrt(energy(u).value), nv = std::sqrt(energy(v).value);
  CHECK(l2_distance(leray_project(pu), pu) < 1e-12 * nu_);
  CHECK(std::abs(inner_product(pu, v) - inner_product(u, leray_project(v))) < 1e-12 * nu_ * nv);
  CHECK(divergence_ratio(pu) < 1e-12);
}

TEST_CASE("spectral shift matches the analytic translate") {
  const auto g = Grid::make(2, 32);
  const auto u = VelocityField::from_function(g, [](const Vec3& x) -> Vec3 {
    return {std::sin(3 * x[1]), std::cos(x[0] - 2 * x[1]), 0.0};
  });
  const Vec3 h{0.37, -1.21, 0.0};
  const auto shifted = shift_eval(u, h);
  const auto exact = VelocityField::from_function(g, [&](const Vec3& x) -> Vec3 {
    return {std::sin(3 * (x[1] + h[1])), std::cos(x[0] + h[0] - 2 * (x[1] + h[1])), 0.0};
  });
  CHECK(max_abs_difference(shifted, exact) < 1e-12);
}

TEST_CASE("derivatives and dealiasing") {
  const auto g = Grid::make(2, 32);
  const auto u = VelocityField::from_function(g, [](const Vec3& x) -> Vec3 {
    return {std::sin(2 * x[0]) * std::cos(x[1]), std::sin(15 * x[1]), 0.0};
  });
  const auto lap = laplacian(u);
  const auto exact = VelocityField::from_function(g, [](const Vec3& x) -> Vec3 {
    return {-5 * std::sin(2 * x[0]) * std::cos(x[1]), -225 * std::sin(15 * x[1]), 0.0};
  });
  CHECK(max_abs_difference(lap, exact) < 1e-9);
  // H¹ seminorm: ∫|∇u|² = (4+1)·π² (first) + 225·2π² (second).
  const double pi2 = oracle::pi * oracle::pi;
  CHECK(h1_seminorm_sq(u).value == doctest::Approx(5 * pi2 + 450 * pi2).epsilon(1e-12));
  // k = 15 > 32/3 is removed, k = 2 kept.
  const auto d = dealias(u);
  CHECK(energy(d).value == doctest::Approx(pi2).epsilon(1e-12));
}
