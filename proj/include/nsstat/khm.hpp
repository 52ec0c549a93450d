#pragma once

#include <map>
#include <span>
#include <string>

#include "nsstat/ensemble.hpp"
#include "nsstat/kernels.hpp"

namespace nsstat {

/// ω(s) = A·exp(1 − 1/(1 − (s/s0)²)) for s < s0, else 0. Kind::Zero is ω ≡ 0.
struct RadialProfile {
  enum class Kind { Zero, Bump };
  Kind kind = Kind::Zero;
  double s0 = 0.4;
  double amplitude = 1.0;

  static RadialProfile zero() { return {}; }
  static RadialProfile bump(double s0, double amplitude = 1.0);
  double value(double s) const;
  double d1(double s) const;
  double d2(double s) const;
  double support() const { return kind == Kind::Zero ? 0.0 : s0; }
};

/// σ(h) = ω₁(|h|) I + ω₂(|h|) ĥ⊗ĥ.
struct TestTensor {
  RadialProfile omega1;
  RadialProfile omega2;
  int dim = 2;

  double support() const;
  Mat3 sigma(const Vec3& h) const;
  /// grad[i][j][k] = ∂σ_ij/∂h_k.
  Tensor3 grad(const Vec3& h) const;
  /// Δ_h σ_ij.
  Mat3 laplacian(const Vec3& h) const;
};

enum class KHMForm { Full, Trace, Longitudinal };
std::string to_string(KHMForm form);
KHMForm khm_form_from_string(const std::string& s);

/// Trace: σ = ωI. Longitudinal: σ = ω ĥ⊗ĥ. Full: ω₁ = ω₂ = ω.
TestTensor tensor_for(KHMForm form, const RadialProfile& omega, int dim);

struct KHMQuadrature {
  int radial_nodes = 48;
  int directions = 64;
};

struct KHMBudget {
  KHMForm form = KHMForm::Trace;
  double s0 = 0.0;
  double nu = 0.0;
  double tau = 0.0;
  /// T_corr_tau, T_corr_0, T_cubic, T_viscous, T_viscous_alt and the radial
  /// moments (m2_* and v for trace, m2_tilde_* and v_tilde for longitudinal).
  std::map<std::string, double> terms;
  /// T_corr_tau − T_corr_0 + T_cubic − T_viscous.
  double residual = 0.0;
  double scale = 0.0;
  double relative() const { return scale > 0.0 ? std::abs(residual) / scale : 0.0; }
  /// |T_viscous − T_viscous_alt| / max.
  double viscous_agreement() const;
};

/// Budget from the member-mean spectra at 0 and τ and the (1/M)·trapezoid
/// time-integrated spectrum (with cubic moments) over [0, τ].
KHMBudget khm_budget(const CorrelationSpectrum& at_zero, const CorrelationSpectrum& at_tau,
                     const CorrelationSpectrum& integrated, double tau, double nu, const TestTensor& tensor,
                     KHMForm form, const KHMQuadrature& quad = {});

/// Time-ordered ensembles from 0 to τ.
KHMBudget khm_budget(std::span<const Ensemble> ensembles, const TestTensor& tensor, KHMForm form,
                     const KHMQuadrature& quad = {});

struct CubicIdentity {
  double lhs = 0.0;
  double rhs = 0.0;
  double relative = 0.0;
};

/// −2∫Σ ∫u_i(x)u_j(x+h)(u_k(x) − u_k(x+h)) dx ∂_kσ_ij dh against
/// ∫Σ ∫(u(x) − u(x+h))_i(..)_j(..)_k dx ∂_kσ_ij dh for member means at one time.
CubicIdentity cubic_identity_check(std::span<const VelocityField> fields, const TestTensor& tensor,
                                   const KHMQuadrature& quad = {});

}  // namespace nsstat
