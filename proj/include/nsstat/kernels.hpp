#pragma once

#include <array>
#include <span>
#include <vector>

#include "nsstat/field.hpp"

namespace nsstat {

using Mat3 = std::array<std::array<double, 3>, 3>;
using Tensor3 = std::array<Mat3, 3>;

/// Weighted two- and three-point moments of a set of fields at one offset h.
/// Every entry is a weighted sum over fields of a spatial integral.
struct IncrementMoments {
  Vec3 h{};
  /// B[i][j] = ∫ u_i(x) u_j(x+h) dx.
  Mat3 B{};
  /// D[i][j] = ∫ δu_i δu_j dx with δu = u(x+h) − u(x).
  Mat3 D{};
  /// G[i][j] = ∫ ∇u_i(x)·∇u_j(x+h) dx.
  Mat3 G{};
  /// T_plus[i][j][k] = ∫ u_i u_j(x) u_k(x+h) dx, T_minus the same at −h.
  Tensor3 T_plus{};
  Tensor3 T_minus{};
  /// M[i][j][k] = ∫ δu_i δu_j δu_k dx.
  Tensor3 M{};
};

/// Weighted sums of spectral correlation tensors of a collection of fields.
///
/// For a field with coefficients û and products P_ij = FFT(u_i u_j) this
/// accumulates conj(û_i)û_j and conj(P_ij)û_k. Any moment in IncrementMoments
/// is then a single phase-weighted sum over the retained modes. Quadratic
/// moments are exact at any real offset; cubic ones need 3·k_max < n so the
/// products do not alias, which holds for dealiased fields.
/// Accumulate is not thread safe; evaluation is.
class CorrelationSpectrum {
 public:
  explicit CorrelationSpectrum(const Grid& grid, bool cubic = true);

  void accumulate(const VelocityField& field, double weight);
  /// Adds another spectrum accumulated on the same grid.
  void merge(const CorrelationSpectrum& other);

  const Grid& grid() const { return grid_; }
  bool has_cubic() const { return cubic_; }
  double total_weight() const { return total_weight_; }
  std::size_t active_modes() const { return active_.size(); }

  /// Weighted ∫ u_i u_j dx.
  Mat3 zero_offset() const { return r_; }
  IncrementMoments at(const Vec3& h) const;
  /// Evaluates many offsets in parallel; results keep the input order.
  std::vector<IncrementMoments> at(std::span<const Vec3> offsets) const;

 private:
  void refresh_active();

  Grid grid_;
  bool cubic_;
  int pairs_;
  double total_weight_ = 0.0;
  std::vector<std::vector<cplx>> s2_;  // [i*d + j][idx]
  std::vector<std::vector<cplx>> s3_;  // [pair*d + k][idx]
  std::vector<char> support_;
  std::vector<std::size_t> active_;
  Mat3 r_{};
};

/// Index of the unordered pair (i, j) among the d(d+1)/2 products.
int pair_index(int i, int j, int dim);

/// ∫ |δ_h u|^p dx summed over fields with weights, for many offsets.
/// General p uses explicit shifted fields.
std::vector<double> increment_power(std::span<const VelocityField> fields,
                                    std::span<const double> weights,
                                    std::span<const Vec3> offsets, double p);

namespace reference {

/// Serial direct evaluation: shift each field spectrally and integrate products
/// by grid quadrature. Used to validate CorrelationSpectrum.
IncrementMoments increment_moments(std::span<const VelocityField> fields,
                                   std::span<const double> weights, const Vec3& h);

std::vector<double> increment_power(std::span<const VelocityField> fields,
                                    std::span<const double> weights,
                                    std::span<const Vec3> offsets, double p);

}  // namespace reference

}  // namespace nsstat
