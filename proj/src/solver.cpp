#include "nsstat/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nsstat/error.hpp"
#include "nsstat/fft.hpp"

namespace nsstat {

void SolverConfig::validate() const {
  if (nu < 0.0) throw ConfigError("nu must be >= 0");
  if (dt && *dt <= 0.0) throw ConfigError("dt must be > 0");
  if (!dt && cfl <= 0.0) throw ConfigError("cfl must be > 0");
  if (t_end < 0.0) throw ConfigError("t_end must be >= 0");
  if (snapshot_interval <= 0.0) throw ConfigError("snapshot_interval must be > 0");
  if (dt && snapshot_interval < *dt) throw ConfigError("snapshot_interval must be >= dt");
}

std::vector<double> SolverConfig::output_times() const {
  std::vector<double> times{0.0};
  const auto count = static_cast<long>(std::floor(t_end / snapshot_interval + 1e-9));
  for (long i = 1; i <= count; ++i) times.push_back(static_cast<double>(i) * snapshot_interval);
  if (t_end - times.back() > 1e-9 * std::max(1.0, t_end)) times.push_back(t_end);
  else times.back() = std::max(times.back(), t_end);
  if (times.size() > 1 && times.back() < times[times.size() - 2]) times.pop_back();
  return times;
}

namespace {

using Spectrum = std::vector<std::vector<cplx>>;

/// Workspace for the spectral right-hand side on one grid.
class NonlinearTerm {
 public:
  NonlinearTerm(const Grid& grid, bool dealias)
      : grid_(grid),
        layout_(SpectralLayout::of(grid)),
        plan_(FftPlan::of(grid)),
        dealias_(dealias),
        velocity_(static_cast<std::size_t>(grid.dim), std::vector<double>(grid.points())),
        product_(grid.points()),
        product_hat_(grid.spectral_size()) {}

  /// out = −P[∇·(u⊗u)] for the spectral state u.
  void operator()(const Spectrum& u, Spectrum& out) {
    const auto d = static_cast<std::size_t>(grid_.dim);
    for (std::size_t i = 0; i < d; ++i) plan_.inverse(u[i], velocity_[i]);
    for (auto& c : out) std::fill(c.begin(), c.end(), cplx(0.0));
    const cplx I(0.0, 1.0);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = i; j < d; ++j) {
        for (std::size_t p = 0; p < product_.size(); ++p) product_[p] = velocity_[i][p] * velocity_[j][p];
        plan_.forward(product_, product_hat_);
        // ∂_j(u_i u_j) contributes to component i, ∂_i(u_i u_j) to component j.
        for (std::size_t idx = 0; idx < layout_.size(); ++idx) {
          const cplx c = I * product_hat_[idx];
          out[i][idx] += static_cast<double>(layout_.k[idx][j]) * c;
          if (j != i) out[j][idx] += static_cast<double>(layout_.k[idx][i]) * c;
        }
      }
    }
    for (std::size_t idx = 0; idx < layout_.size(); ++idx) {
      if (layout_.k2[idx] == 0.0 || layout_.is_nyquist(idx) ||
          (dealias_ && layout_.outside_dealias_band(idx))) {
        for (std::size_t i = 0; i < d; ++i) out[i][idx] = 0.0;
        continue;
      }
      cplx kdot = 0.0;
      for (std::size_t i = 0; i < d; ++i) kdot += static_cast<double>(layout_.k[idx][i]) * out[i][idx];
      const cplx f = kdot / layout_.k2[idx];
      for (std::size_t i = 0; i < d; ++i) {
        out[i][idx] = -(out[i][idx] - static_cast<double>(layout_.k[idx][i]) * f);
      }
    }
  }

  double max_speed(const Spectrum& u) {
    const auto d = static_cast<std::size_t>(grid_.dim);
    for (std::size_t i = 0; i < d; ++i) plan_.inverse(u[i], velocity_[i]);
    double m = 0.0;
    for (std::size_t p = 0; p < product_.size(); ++p) {
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) s += velocity_[i][p] * velocity_[i][p];
      m = std::max(m, s);
    }
    return std::sqrt(m);
  }

 private:
  Grid grid_;
  const SpectralLayout& layout_;
  const FftPlan& plan_;
  bool dealias_;
  std::vector<std::vector<double>> velocity_;
  std::vector<double> product_;
  std::vector<cplx> product_hat_;
};

class IfRk4 {
 public:
  IfRk4(const Grid& grid, double nu, bool dealias)
      : grid_(grid),
        layout_(SpectralLayout::of(grid)),
        nu_(nu),
        rhs_(grid, dealias),
        k1_(make()),
        k2_(make()),
        k3_(make()),
        k4_(make()),
        stage_(make()) {}

  void advance(Spectrum& u, double dt) {
    if (dt != cached_dt_) {
      half_.resize(layout_.size());
      full_.resize(layout_.size());
      for (std::size_t idx = 0; idx < layout_.size(); ++idx) {
        half_[idx] = std::exp(-nu_ * layout_.k2[idx] * 0.5 * dt);
        full_[idx] = half_[idx] * half_[idx];
      }
      cached_dt_ = dt;
    }
    const std::size_t d = u.size();
    const std::size_t m = layout_.size();
    rhs_(u, k1_);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t p = 0; p < m; ++p) stage_[i][p] = half_[p] * (u[i][p] + 0.5 * dt * k1_[i][p]);
    rhs_(stage_, k2_);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t p = 0; p < m; ++p) stage_[i][p] = half_[p] * u[i][p] + 0.5 * dt * k2_[i][p];
    rhs_(stage_, k3_);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t p = 0; p < m; ++p) stage_[i][p] = full_[p] * u[i][p] + dt * half_[p] * k3_[i][p];
    rhs_(stage_, k4_);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t p = 0; p < m; ++p) {
        u[i][p] = full_[p] * u[i][p] +
                  dt / 6.0 *
                      (full_[p] * k1_[i][p] + 2.0 * half_[p] * (k2_[i][p] + k3_[i][p]) + k4_[i][p]);
      }
    }
  }

  NonlinearTerm& rhs() { return rhs_; }

 private:
  Spectrum make() const {
    return Spectrum(static_cast<std::size_t>(grid_.dim), std::vector<cplx>(grid_.spectral_size()));
  }

  Grid grid_;
  const SpectralLayout& layout_;
  double nu_;
  NonlinearTerm rhs_;
  Spectrum k1_, k2_, k3_, k4_, stage_;
  std::vector<double> half_, full_;
  double cached_dt_ = -1.0;
};

double spectral_energy(const Grid& grid, const Spectrum& u, bool gradient) {
  const auto& layout = SpectralLayout::of(grid);
  double s = 0.0;
  for (std::size_t idx = 0; idx < layout.size(); ++idx) {
    double a = 0.0;
    for (const auto& c : u) a += std::norm(c[idx]);
    s += layout.weight[idx] * a * (gradient ? layout.k2[idx] : 1.0);
  }
  return s * grid.volume();
}

bool has_nan(const Spectrum& u) {
  for (const auto& c : u)
    for (const auto& v : c)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return true;
  return false;
}

}  // namespace

VelocityField rhs_eval(const VelocityField& field, bool dealias) {
  NonlinearTerm rhs(field.grid(), dealias);
  Spectrum out(static_cast<std::size_t>(field.dim()), std::vector<cplx>(field.grid().spectral_size()));
  rhs(field.spectral_components(), out);
  return VelocityField::from_spectral(field.grid(), std::move(out), field.time(), field.nu());
}

VelocityField step(const VelocityField& field, double nu, double dt, bool dealias) {
  IfRk4 stepper(field.grid(), nu, dealias);
  Spectrum u = field.spectral_components();
  stepper.advance(u, dt);
  return VelocityField::from_spectral(field.grid(), std::move(u), field.time() + dt, nu);
}

Trajectory run(const VelocityField& u0, const SolverConfig& config,
               const SnapshotObserver& observer) {
  const auto times = config.output_times();
  return run(u0, config, times, observer);
}

Trajectory run(const VelocityField& u0, const SolverConfig& config,
               std::span<const double> output_times, const SnapshotObserver& observer) {
  config.validate();
  if (output_times.empty()) throw ConfigError("at least one output time is required");
  for (std::size_t i = 1; i < output_times.size(); ++i) {
    if (output_times[i] <= output_times[i - 1]) throw ConfigError("output times must increase");
  }
  const Grid& grid = u0.grid();
  Trajectory traj;
  traj.config = config;
  double t = u0.time();
  if (std::abs(output_times.front() - t) > 1e-12 * std::max(1.0, std::abs(t))) {
    throw ConfigError("first output time must equal the initial time");
  }

  IfRk4 stepper(grid, config.nu, config.dealias);
  Spectrum u = u0.spectral_components();
  const double e0 = spectral_energy(grid, u, false);
  double h1_prev = spectral_energy(grid, u, true);
  double dissipation = 0.0;
  traj.energy_series.push_back({t, e0, 0.0});

  auto emit = [&](double when) {
    VelocityField snap = VelocityField::from_spectral(grid, u, when, config.nu);
    if (observer) observer(snap);
    traj.times.push_back(when);
    if (config.keep_snapshots) traj.snapshots.push_back(std::move(snap));
  };
  emit(output_times.front());

  for (std::size_t next = 1; next < output_times.size(); ++next) {
    const double target = output_times[next];
    while (t < target) {
      double dt;
      if (config.dt) {
        dt = *config.dt;
      } else {
        const double speed = stepper.rhs().max_speed(u);
        dt = speed > 0.0 ? config.cfl * grid.dx() / speed : target - t;
      }
      if (t + dt >= target - 1e-12 * std::max(1.0, target)) dt = target - t;
      stepper.advance(u, dt);
      t = (dt == target - t) ? target : t + dt;
      ++traj.steps;
      const double e = spectral_energy(grid, u, false);
      const double h1 = spectral_energy(grid, u, true);
      dissipation += config.nu * (h1_prev + h1) * dt;  // trapezoid of 2ν|∇u|²
      h1_prev = h1;
      traj.energy_series.push_back({t, e, dissipation});
      if (has_nan(u) || !std::isfinite(e) || (e0 > 0.0 && e > 10.0 * e0)) {
        std::ostringstream msg;
        msg << "solver blow-up at t=" << t;
        throw BlowUpError(msg.str(), t);
      }
    }
    emit(target);
  }
  return traj;
}

double energy_budget(const Trajectory& trajectory) {
  if (trajectory.energy_series.empty()) return 0.0;
  const double e0 = trajectory.energy_series.front().energy;
  double worst = 0.0;
  for (const auto& s : trajectory.energy_series) {
    worst = std::max(worst, std::abs(s.energy + s.dissipation - e0));
  }
  if (e0 == 0.0) {
    if (worst > 0.0) throw DegenerateInputError("zero initial energy with nonzero budget defect");
    return 0.0;
  }
  return worst / e0;
}

}  // namespace nsstat
