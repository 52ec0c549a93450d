#include "nsstat/khm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nsstat/error.hpp"
#include "nsstat/quadrature.hpp"
#include "nsstat/structure.hpp"

namespace nsstat {

RadialProfile RadialProfile::bump(double s0, double amplitude) {
  if (!(s0 > 0.0)) throw ConfigError("bump support s0 must be > 0");
  RadialProfile p;
  p.kind = Kind::Bump;
  p.s0 = s0;
  p.amplitude = amplitude;
  return p;
}

namespace {

// g(x) = 1 − 1/(1 − x²) and its x-derivatives.
struct BumpParts {
  double value, g1, g2;
};

BumpParts bump_parts(double x) {
  const double q = 1.0 - x * x;
  return {std::exp(1.0 - 1.0 / q), -2.0 * x / (q * q), -2.0 / (q * q) - 8.0 * x * x / (q * q * q)};
}

}  // namespace

double RadialProfile::value(double s) const {
  if (kind == Kind::Zero || s >= s0) return 0.0;
  return amplitude * bump_parts(s / s0).value;
}

double RadialProfile::d1(double s) const {
  if (kind == Kind::Zero || s >= s0) return 0.0;
  const auto b = bump_parts(s / s0);
  return amplitude * b.value * b.g1 / s0;
}

double RadialProfile::d2(double s) const {
  if (kind == Kind::Zero || s >= s0) return 0.0;
  const auto b = bump_parts(s / s0);
  return amplitude * b.value * (b.g1 * b.g1 + b.g2) / (s0 * s0);
}

double TestTensor::support() const { return std::max(omega1.support(), omega2.support()); }

namespace {

double radius(const Vec3& h) { return std::sqrt(h[0] * h[0] + h[1] * h[1] + h[2] * h[2]); }

}  // namespace

Mat3 TestTensor::sigma(const Vec3& h) const {
  const double r = radius(h);
  const auto d = static_cast<std::size_t>(dim);
  Mat3 s{};
  const double w1 = omega1.value(r);
  const double w2 = r > 0.0 ? omega2.value(r) : 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      s[i][j] = (i == j ? w1 : 0.0) + (r > 0.0 ? w2 * h[i] * h[j] / (r * r) : 0.0);
    }
  }
  return s;
}

Tensor3 TestTensor::grad(const Vec3& h) const {
  Tensor3 g{};
  const double r = radius(h);
  if (r == 0.0) return g;
  const auto d = static_cast<std::size_t>(dim);
  Vec3 e{h[0] / r, h[1] / r, h[2] / r};
  const double a1 = omega1.d1(r);
  const double a2 = omega2.d1(r);
  const double w2 = omega2.value(r);
  auto delta = [](std::size_t a, std::size_t b) { return a == b ? 1.0 : 0.0; };
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t k = 0; k < d; ++k) {
        g[i][j][k] = a1 * e[k] * delta(i, j) + a2 * e[k] * e[i] * e[j] +
                     w2 / r * ((delta(i, k) - e[i] * e[k]) * e[j] + e[i] * (delta(j, k) - e[j] * e[k]));
      }
    }
  }
  return g;
}

Mat3 TestTensor::laplacian(const Vec3& h) const {
  Mat3 l{};
  const double r = radius(h);
  if (r == 0.0) return l;
  const auto d = static_cast<std::size_t>(dim);
  const double dd = dim;
  const double w2 = omega2.value(r);
  const double iso = omega1.d2(r) + (dd - 1.0) * omega1.d1(r) / r + 2.0 * w2 / (r * r);
  const double aniso = omega2.d2(r) + (dd - 1.0) * omega2.d1(r) / r - 2.0 * dd * w2 / (r * r);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      l[i][j] = (i == j ? iso : 0.0) + aniso * h[i] * h[j] / (r * r);
    }
  }
  return l;
}

std::string to_string(KHMForm form) {
  switch (form) {
    case KHMForm::Full: return "full";
    case KHMForm::Trace: return "trace";
    default: return "longitudinal";
  }
}

KHMForm khm_form_from_string(const std::string& s) {
  if (s == "full") return KHMForm::Full;
  if (s == "trace") return KHMForm::Trace;
  if (s == "longitudinal") return KHMForm::Longitudinal;
  throw ConfigError("unknown KHM form '" + s + "'");
}

TestTensor tensor_for(KHMForm form, const RadialProfile& omega, int dim) {
  TestTensor t;
  t.dim = dim;
  if (form != KHMForm::Longitudinal) t.omega1 = omega;
  if (form != KHMForm::Trace) t.omega2 = omega;
  return t;
}

double KHMBudget::viscous_agreement() const {
  const double a = terms.at("T_viscous");
  const double b = terms.at("T_viscous_alt");
  const double s = std::max(std::abs(a), std::abs(b));
  return s > 0.0 ? std::abs(a - b) / s : 0.0;
}

namespace {

struct PolarRule {
  std::vector<Vec3> nodes;
  std::vector<double> weights;
  std::vector<double> radii;
};

/// ∫_{|h|<s_max} f dh ≈ Σ w f(h).
PolarRule polar_rule(int dim, double s_max, const KHMQuadrature& quad) {
  const auto dirs = DirectionSet::make(dim, quad.directions);
  const auto radial = gauss_legendre(quad.radial_nodes, 0.0, s_max);
  const double area = dim == 2 ? kTwoPi : 2.0 * kTwoPi;
  PolarRule rule;
  for (std::size_t a = 0; a < radial.nodes.size(); ++a) {
    const double s = radial.nodes[a];
    const double w = radial.weights[a] * std::pow(s, dim - 1) * area;
    for (std::size_t b = 0; b < dirs.size(); ++b) {
      rule.nodes.push_back({s * dirs.dirs[b][0], s * dirs.dirs[b][1], s * dirs.dirs[b][2]});
      rule.weights.push_back(w * dirs.weights[b]);
      rule.radii.push_back(s);
    }
  }
  return rule;
}

double contract2(const Mat3& a, const Mat3& b, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) s += a[i][j] * b[i][j];
  return s;
}

void check_support(const TestTensor& tensor) {
  const double s = tensor.support();
  if (s > std::numbers::pi) throw DomainError("test tensor support exceeds the half period π");
  if (!(s > 0.0)) throw ConfigError("test tensor is identically zero");
}

}  // namespace

KHMBudget khm_budget(const CorrelationSpectrum& at_zero, const CorrelationSpectrum& at_tau,
                     const CorrelationSpectrum& integrated, double tau, double nu, const TestTensor& tensor,
                     KHMForm form, const KHMQuadrature& quad) {
  check_support(tensor);
  if (!integrated.has_cubic()) throw PreconditionError("KHM budget needs cubic moments");
  const int dim = integrated.grid().dim;
  if (tensor.dim != dim) throw PreconditionError("test tensor dimension mismatch");
  const auto d = static_cast<std::size_t>(dim);
  const auto rule = polar_rule(dim, tensor.support(), quad);
  const auto m0 = at_zero.at(rule.nodes);
  const auto mt = at_tau.at(rule.nodes);
  const auto mi = integrated.at(rule.nodes);

  double corr_tau = 0.0, corr_0 = 0.0, cubic = 0.0, viscous = 0.0, viscous_alt = 0.0;
  double m2_tau = 0.0, m2_0 = 0.0, v = 0.0;
  const bool longitudinal = form == KHMForm::Longitudinal;
  const RadialProfile& omega = longitudinal ? tensor.omega2 : tensor.omega1;
  for (std::size_t a = 0; a < rule.nodes.size(); ++a) {
    const Vec3& h = rule.nodes[a];
    const double w = rule.weights[a];
    const Mat3 sig = tensor.sigma(h);
    const Tensor3 gs = tensor.grad(h);
    const Mat3 lap = tensor.laplacian(h);
    corr_tau += w * contract2(sig, mt[a].B, d);
    corr_0 += w * contract2(sig, m0[a].B, d);
    double c = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t k = 0; k < d; ++k) c += mi[a].M[i][j][k] * gs[i][j][k];
    cubic += 0.5 * w * c;
    viscous += -nu * w * contract2(mi[a].D, lap, d);
    viscous_alt += -2.0 * nu * w * contract2(sig, mi[a].G, d);

    // Radial moments: w already carries s^{d-1}|S|, so dividing by |S| gives
    // ∫ s^{d-1} ω(s) ⨍_S (...) ds.
    const double wr = w * omega.value(rule.radii[a]) / (dim == 2 ? kTwoPi : 2.0 * kTwoPi);
    Vec3 e{h[0] / rule.radii[a], h[1] / rule.radii[a], h[2] / rule.radii[a]};
    auto project = [&](const Mat3& m) {
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        if (!longitudinal) s += m[i][i];
        if (longitudinal)
          for (std::size_t j = 0; j < d; ++j) s += m[i][j] * e[i] * e[j];
      }
      return s;
    };
    m2_tau += wr * project(mt[a].B);
    m2_0 += wr * project(m0[a].B);
    v += wr * project(mi[a].G);
  }

  KHMBudget b;
  b.form = form;
  b.s0 = omega.kind == RadialProfile::Kind::Zero ? tensor.support() : omega.s0;
  b.nu = nu;
  b.tau = tau;
  b.terms["T_corr_tau"] = corr_tau;
  b.terms["T_corr_0"] = corr_0;
  b.terms["T_cubic"] = cubic;
  b.terms["T_viscous"] = viscous;
  b.terms["T_viscous_alt"] = viscous_alt;
  const std::string suffix = longitudinal ? "_tilde" : "";
  b.terms["m2" + suffix + "_tau"] = m2_tau;
  b.terms["m2" + suffix + "_0"] = m2_0;
  b.terms["v" + suffix] = v;
  b.residual = corr_tau - corr_0 + cubic - viscous;
  b.scale = std::max({std::abs(corr_tau), std::abs(corr_0), std::abs(cubic), std::abs(viscous)});
  return b;
}

KHMBudget khm_budget(std::span<const Ensemble> ensembles, const TestTensor& tensor, KHMForm form,
                     const KHMQuadrature& quad) {
  if (ensembles.size() < 2) throw PreconditionError("KHM budget needs at least two snapshot times");
  std::vector<double> times;
  for (const auto& e : ensembles) times.push_back(e.time);
  const Grid grid = ensembles.front().grid();
  SpectrumStream stream(grid, ensembles.front().size(), times, true);
  for (const auto& e : ensembles) {
    if (e.size() != ensembles.front().size()) throw PreconditionError("ensembles must share their members");
    for (std::size_t m = 0; m < e.size(); ++m) stream.observe(m, e.members[m]);
  }
  return khm_budget(stream.initial(), stream.last(), stream.integrated(), times.back() - times.front(),
                    ensembles.front().nu, tensor, form, quad);
}

CubicIdentity cubic_identity_check(std::span<const VelocityField> fields, const TestTensor& tensor,
                                   const KHMQuadrature& quad) {
  check_support(tensor);
  CubicIdentity out;
  if (fields.empty()) return out;
  const Grid grid = fields.front().grid();
  const auto d = static_cast<std::size_t>(grid.dim);
  CorrelationSpectrum spec(grid, true);
  for (const auto& u : fields) spec.accumulate(u, 1.0 / static_cast<double>(fields.size()));
  const auto rule = polar_rule(grid.dim, tensor.support(), quad);
  const auto moments = spec.at(rule.nodes);
  double grad_mass = 0.0;
  for (std::size_t a = 0; a < rule.nodes.size(); ++a) {
    const Tensor3 gs = tensor.grad(rule.nodes[a]);
    const auto& m = moments[a];
    double l = 0.0, r = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t k = 0; k < d; ++k) {
          // ∫u_i(x)u_j(x+h)u_k(x) = T_ik,j(h); ∫u_i(x)u_j(x+h)u_k(x+h) = T_jk,i(−h).
          l += -2.0 * (m.T_plus[i][k][j] - m.T_minus[j][k][i]) * gs[i][j][k];
          // (u(x) − u(x+h))³ = −(δu)³.
          r += -m.M[i][j][k] * gs[i][j][k];
          grad_mass += rule.weights[a] * std::abs(gs[i][j][k]);
        }
      }
    }
    out.lhs += rule.weights[a] * l;
    out.rhs += rule.weights[a] * r;
  }
  // Roundoff floor: |u|³ mass against ∫|∂σ|.
  const Mat3 r0 = spec.zero_offset();
  double e = 0.0;
  for (std::size_t i = 0; i < d; ++i) e += r0[i][i];
  const double floor = 1e-12 * std::pow(e, 1.5) / std::sqrt(grid.volume()) * grad_mass;
  const double scale = std::max(std::abs(out.lhs), std::abs(out.rhs));
  out.relative = scale > floor ? std::abs(out.lhs - out.rhs) / scale : 0.0;
  return out;
}

}  // namespace nsstat
