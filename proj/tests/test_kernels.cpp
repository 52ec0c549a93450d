#include <cmath>

#include "doctest.h"
#include "nsstat/ensemble.hpp"
#include "nsstat/kernels.hpp"
#include "oracles.hpp"

using namespace nsstat;

namespace {

double max_entry_diff(const Mat3& a, const Mat3& b) {
  double m = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m = std::max(m, std::abs(a[i][j] - b[i][j]));
  return m;
}

double max_entry_diff(const Tensor3& a, const Tensor3& b) {
  double m = 0.0;
  for (int i = 0; i < 3; ++i) m = std::max(m, max_entry_diff(a[i], b[i]));
  return m;
}

}  // namespace

TEST_CASE("spectral moments equal the direct shifted quadrature") {
  for (int dim : {2, 3}) {
    const auto g = Grid::make(dim, dim == 2 ? 32 : 16);
    std::vector<VelocityField> fields{oracle::random_solenoidal(g, 4, 1), oracle::random_bandlimited(g, (g.n - 1) / 3, 2)};
    const std::vector<double> w{0.3, 0.7};
    CorrelationSpectrum s(g);
    for (std::size_t m = 0; m < fields.size(); ++m) s.accumulate(fields[m], w[m]);
    CHECK(s.total_weight() == doctest::Approx(1.0));
    for (const Vec3& h : {Vec3{0.0, 0.0, 0.0}, Vec3{0.31, -0.77, 0.12}, Vec3{2.0, 1.0, -0.5}}) {
      const auto fast = s.at(h);
      const auto ref = reference::increment_moments(fields, w, h);
      const double scale = std::abs(ref.B[0][0]) + 1.0;
      CHECK(max_entry_diff(fast.B, ref.B) < 1e-11 * scale);
      CHECK(max_entry_diff(fast.D, ref.D) < 1e-11 * scale);
      CHECK(max_entry_diff(fast.G, ref.G) < 1e-9 * scale * 100);
      CHECK(max_entry_diff(fast.T_plus, ref.T_plus) < 1e-10 * scale * 10);
      CHECK(max_entry_diff(fast.T_minus, ref.T_minus) < 1e-10 * scale * 10);
      CHECK(max_entry_diff(fast.M, ref.M) < 1e-10 * scale * 10);
    }
  }
}

TEST_CASE("shear flow correlations are analytic") {
  const auto g = Grid::make(2, 16);
  CorrelationSpectrum s(g);
  s.accumulate(VelocityField::from_function(g, [](const Vec3& x) -> Vec3 { return {std::sin(x[1]), 0.0, 0.0}; }),
               1.0);
  const double pi2 = oracle::pi * oracle::pi;
  for (double hy : {0.0, 0.4, 1.3, 3.0}) {
    const auto m = s.at(Vec3{0.7, hy, 0.0});
    CHECK(m.B[0][0] == doctest::Approx(2 * pi2 * std::cos(hy)).epsilon(1e-12));
    CHECK(m.D[0][0] == doctest::Approx(4 * pi2 * (1 - std::cos(hy))).epsilon(1e-12).scale(1));
    CHECK(m.G[0][0] == doctest::Approx(2 * pi2 * std::cos(hy)).epsilon(1e-12));
    CHECK(std::abs(m.B[1][1]) < 1e-12);
    CHECK(std::abs(m.M[0][0][0]) < 1e-11);
  }
  CHECK(s.zero_offset()[0][0] == doctest::Approx(2 * pi2));
}

TEST_CASE("merge equals joint accumulation") {
  const auto g = Grid::make(2, 16);
  const auto a = oracle::random_solenoidal(g, 3, 5), b = oracle::random_solenoidal(g, 3, 6);
  CorrelationSpectrum joint(g), pa(g), pb(g);
  joint.accumulate(a, 0.5);
  joint.accumulate(b, 0.5);
  pa.accumulate(a, 0.5);
  pb.accumulate(b, 0.5);
  pa.merge(pb);
  const Vec3 h{0.2, 0.9, 0.0};
  CHECK(max_entry_diff(pa.at(h).M, joint.at(h).M) < 1e-12);
  CHECK(max_entry_diff(pa.at(h).D, joint.at(h).D) < 1e-12);
}

TEST_CASE("increment powers match an analytic oracle") {
  const auto g = Grid::make(2, 64);
  const std::vector<VelocityField> f{
      VelocityField::from_function(g, [](const Vec3& x) -> Vec3 { return {std::sin(x[1]), 0.0, 0.0}; })};
  const std::vector<double> w{1.0};
  const std::vector<Vec3> offsets{{0.0, 0.5, 0.0}, {0.3, 1.7, 0.0}};
  const auto p3 = increment_power(f, w, offsets, 3.0);
  const auto p2 = increment_power(f, w, offsets, 2.0);
  const auto p3_ref = reference::increment_power(f, w, offsets, 3.0);
  for (std::size_t a = 0; a < offsets.size(); ++a) {
    const double hy = offsets[a][1];
    // ∫∫|sin(y+a) − sin y|³ = 2π·8|sin(a/2)|³·8/3
    const double exact3 = 2 * oracle::pi * 8 * std::pow(std::abs(std::sin(hy / 2)), 3) * 8.0 / 3.0;
    CHECK(p3[a] == doctest::Approx(exact3).epsilon(1e-3));
    CHECK(p3[a] == doctest::Approx(p3_ref[a]).epsilon(1e-12));
    CHECK(p2[a] == doctest::Approx(4 * oracle::pi * oracle::pi * (1 - std::cos(hy))).epsilon(1e-12));
  }
}

TEST_CASE("pair indices enumerate the symmetric products") {
  CHECK(pair_index(0, 0, 2) == 0);
  CHECK(pair_index(0, 1, 2) == pair_index(1, 0, 2));
  std::vector<int> seen;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) seen.push_back(pair_index(i, j, 3));
  std::sort(seen.begin(), seen.end());
  CHECK(seen == std::vector<int>{0, 1, 2, 3, 4, 5});
}
