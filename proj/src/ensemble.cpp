#include "nsstat/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <optional>

#include "nsstat/error.hpp"
#include "nsstat/quadrature.hpp"
#include "nsstat/snapshot_io.hpp"

namespace nsstat {

void MeasureSpec::validate(const Grid& grid) const {
  if (!(support_radius > 0.0)) throw ConfigError("support_radius must be > 0");
  if (k_min < 1) throw ConfigError("k_min must be >= 1");
  if (k_max < k_min) throw ConfigError("k_max must be >= k_min");
  if (k_max > grid.dealias_cutoff()) {
    throw ConfigError("k_max exceeds the dealiasing band n/3 = " +
                      std::to_string(grid.dealias_cutoff()));
  }
  if (!std::isfinite(spectrum_slope)) throw ConfigError("spectrum_slope must be finite");
  if (kind == MeasureKind::PerturbedBase && base == BaseFlow::None) {
    throw ConfigError("perturbed_base measure needs a base flow");
  }
}

std::string to_string(MeasureKind kind) {
  return kind == MeasureKind::RandomFourier ? "random_fourier" : "perturbed_base";
}

std::string to_string(BaseFlow base) {
  switch (base) {
    case BaseFlow::TaylorGreen: return "taylor_green";
    case BaseFlow::Shear: return "shear";
    default: return "none";
  }
}

MeasureKind measure_kind_from_string(const std::string& s) {
  if (s == "random_fourier") return MeasureKind::RandomFourier;
  if (s == "perturbed_base") return MeasureKind::PerturbedBase;
  throw ConfigError("unknown measure kind '" + s + "'");
}

BaseFlow base_flow_from_string(const std::string& s) {
  if (s == "none") return BaseFlow::None;
  if (s == "taylor_green") return BaseFlow::TaylorGreen;
  if (s == "shear") return BaseFlow::Shear;
  throw ConfigError("unknown base flow '" + s + "'");
}

const Grid& Ensemble::grid() const {
  if (members.empty()) throw PreconditionError("empty ensemble has no grid");
  return members.front().grid();
}

void Ensemble::validate(double divergence_tol) const {
  for (std::size_t m = 0; m < members.size(); ++m) {
    const auto& u = members[m];
    if (!(u.grid() == grid())) throw PreconditionError("ensemble members on different grids");
    if (std::abs(u.time() - time) > 1e-12 * std::max(1.0, std::abs(time)) || u.nu() != nu) {
      throw PreconditionError("ensemble members disagree on time or viscosity");
    }
    if (divergence_ratio(u) > divergence_tol) {
      throw PreconditionError("ensemble member " + std::to_string(m) + " is not divergence free");
    }
    if (std::sqrt(energy(u).value) > spec.support_radius * (1.0 + 1e-12)) {
      throw PreconditionError("ensemble member " + std::to_string(m) + " leaves the support ball");
    }
  }
}

VelocityField taylor_green(const Grid& grid) {
  return VelocityField::from_function(grid, [&](const Vec3& x) -> Vec3 {
    if (grid.dim == 2) return {std::cos(x[0]) * std::sin(x[1]), -std::sin(x[0]) * std::cos(x[1]), 0.0};
    return {std::cos(x[0]) * std::sin(x[1]) * std::cos(x[2]),
            -std::sin(x[0]) * std::cos(x[1]) * std::cos(x[2]), 0.0};
  });
}

VelocityField shear_flow(const Grid& grid) {
  return VelocityField::from_function(grid, [](const Vec3& x) -> Vec3 { return {std::sin(x[1]), 0.0, 0.0}; });
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

double uniform(std::uint64_t member_key, std::uint64_t mode, std::uint64_t stream) {
  const std::uint64_t h = mix64(member_key ^ mix64(mode * 8 + stream));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

/// Random-phase divergence-free field with the requested shell spectrum,
/// normalised to ∫|w|² = (2π)^d.
VelocityField random_fourier_field(const MeasureSpec& spec, const Grid& grid, std::uint64_t member_key) {
  const auto& layout = SpectralLayout::of(grid);
  const int n = grid.n;
  const auto d = static_cast<std::size_t>(grid.dim);

  std::vector<double> shell_count(static_cast<std::size_t>(spec.k_max) + 1, 0.0);
  auto shell_of = [&](std::size_t idx) { return static_cast<int>(std::lround(std::sqrt(layout.k2[idx]))); };
  auto in_band = [&](std::size_t idx) {
    const int s = shell_of(idx);
    return s >= spec.k_min && s <= spec.k_max && !layout.is_nyquist(idx);
  };
  for (std::size_t idx = 0; idx < layout.size(); ++idx) {
    if (in_band(idx)) shell_count[static_cast<std::size_t>(shell_of(idx))] += layout.weight[idx];
  }

  std::vector<std::vector<cplx>> spec_hat(d, std::vector<cplx>(grid.spectral_size()));
  const std::size_t hx = grid.half_x();
  for (std::size_t idx = 0; idx < layout.size(); ++idx) {
    if (!in_band(idx)) continue;
    const auto& q = layout.k[idx];
    if (q[0] == 0) {
      // kx = 0 plane: draw the canonical half and mirror it below.
      if (q[1] < 0 || (q[1] == 0 && q[2] < 0)) continue;
    }
    const int s = shell_of(idx);
    const double amp = std::sqrt(std::pow(static_cast<double>(s), -spec.spectrum_slope) /
                                 shell_count[static_cast<std::size_t>(s)]);
    const double kn = std::sqrt(layout.k2[idx]);
    std::array<cplx, 3> c{};
    const double two_pi = kTwoPi;
    if (d == 2) {
      const cplx ph = std::polar(amp, two_pi * uniform(member_key, idx, 0));
      c[0] = -q[1] / kn * ph;
      c[1] = q[0] / kn * ph;
    } else {
      const std::array<double, 3> kh{q[0] / kn, q[1] / kn, q[2] / kn};
      // e1 ⟂ k̂ built from the axis least aligned with k̂, e2 = k̂ × e1.
      std::array<double, 3> ref{0, 0, 0};
      int axis = 0;
      for (int a = 1; a < 3; ++a)
        if (std::abs(kh[static_cast<std::size_t>(a)]) < std::abs(kh[static_cast<std::size_t>(axis)])) axis = a;
      ref[static_cast<std::size_t>(axis)] = 1.0;
      const double dot = kh[0] * ref[0] + kh[1] * ref[1] + kh[2] * ref[2];
      std::array<double, 3> e1{ref[0] - dot * kh[0], ref[1] - dot * kh[1], ref[2] - dot * kh[2]};
      const double e1n = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
      for (auto& v : e1) v /= e1n;
      const std::array<double, 3> e2{kh[1] * e1[2] - kh[2] * e1[1], kh[2] * e1[0] - kh[0] * e1[2],
                                     kh[0] * e1[1] - kh[1] * e1[0]};
      const double beta = two_pi * uniform(member_key, idx, 0);
      const cplx p1 = std::polar(amp * std::cos(beta), two_pi * uniform(member_key, idx, 1));
      const cplx p2 = std::polar(amp * std::sin(beta), two_pi * uniform(member_key, idx, 2));
      for (std::size_t a = 0; a < 3; ++a) c[a] = p1 * e1[a] + p2 * e2[a];
    }
    for (std::size_t a = 0; a < d; ++a) spec_hat[a][idx] = c[a];
    if (q[0] == 0) {
      const std::size_t iy = static_cast<std::size_t>((n - ((q[1] % n) + n) % n) % n);
      const std::size_t iz = d == 3 ? static_cast<std::size_t>((n - ((q[2] % n) + n) % n) % n) : 0;
      const std::size_t partner = hx * (iy + static_cast<std::size_t>(n) * iz);
      for (std::size_t a = 0; a < d; ++a) spec_hat[a][partner] = std::conj(c[a]);
    }
  }
  VelocityField w = leray_project(VelocityField::from_spectral(grid, std::move(spec_hat)));
  const double e = energy(w).value;
  if (e == 0.0) return w;
  return w.scaled(std::sqrt(grid.volume() / e));
}

}  // namespace

Ensemble sample_initial(const MeasureSpec& spec, int members, const Grid& grid, double nu) {
  if (members < 1) throw ConfigError("ensemble size must be >= 1");
  if (nu < 0.0) throw ConfigError("nu must be >= 0");
  spec.validate(grid);
  Ensemble ens;
  ens.spec = spec;
  ens.nu = nu;
  ens.time = 0.0;
  ens.members.resize(static_cast<std::size_t>(members), VelocityField::zero(grid));
  ens.member_seeds.resize(static_cast<std::size_t>(members));

  std::optional<VelocityField> base;
  if (spec.kind == MeasureKind::PerturbedBase) {
    base = spec.base == BaseFlow::TaylorGreen ? taylor_green(grid) : shear_flow(grid);
  }
#pragma omp parallel for schedule(dynamic)
  for (int m = 0; m < members; ++m) {
    const std::uint64_t key = mix64(spec.seed ^ mix64(static_cast<std::uint64_t>(m)));
    ens.member_seeds[static_cast<std::size_t>(m)] = key;
    VelocityField u = VelocityField::zero(grid);
    if (spec.perturbation_amp != 0.0) {
      u = random_fourier_field(spec, grid, key).scaled(spec.perturbation_amp);
    }
    if (base) u = spec.perturbation_amp != 0.0 ? add(*base, u) : *base;
    const double norm = std::sqrt(energy(u).value);
    if (norm > spec.support_radius) u = u.scaled(spec.support_radius / norm * (1.0 - 1e-14));
    ens.members[static_cast<std::size_t>(m)] = u.with_metadata(0.0, nu);
  }
  return ens;
}

std::vector<Ensemble> evolve(const Ensemble& ensemble, const SolverConfig& config,
                             std::span<const double> sample_times) {
  return evolve(ensemble, config, sample_times, sample_times, {});
}

std::vector<Ensemble> evolve(const Ensemble& ensemble, const SolverConfig& config,
                             std::span<const double> sample_times,
                             std::span<const double> output_times, const MemberObserver& observer) {
  if (sample_times.empty()) throw ConfigError("sample_times must not be empty");
  for (std::size_t i = 1; i < sample_times.size(); ++i) {
    if (sample_times[i] <= sample_times[i - 1]) throw ConfigError("sample_times must increase");
  }
  if (sample_times.front() < ensemble.time || sample_times.back() > config.t_end + 1e-12) {
    throw ConfigError("sample_times must lie within [t0, t_end]");
  }
  // Map each sample time onto an output slot.
  std::vector<std::size_t> slot(sample_times.size());
  for (std::size_t j = 0; j < sample_times.size(); ++j) {
    auto it = std::find_if(output_times.begin(), output_times.end(), [&](double t) {
      return std::abs(t - sample_times[j]) <= 1e-12 * std::max(1.0, std::abs(t));
    });
    if (it == output_times.end()) throw ConfigError("output_times must contain every sample time");
    slot[j] = static_cast<std::size_t>(it - output_times.begin());
  }

  const std::size_t M = ensemble.size();
  std::vector<Ensemble> out(sample_times.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j].time = sample_times[j];
    out[j].nu = config.nu;
    out[j].spec = ensemble.spec;
    out[j].member_seeds = ensemble.member_seeds;
    out[j].members.assign(M, VelocityField::zero(ensemble.grid()));
  }

  SolverConfig cfg = config;
  cfg.keep_snapshots = false;
  std::vector<std::exception_ptr> errors(M);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t m = 0; m < M; ++m) {
    try {
      std::size_t counter = 0;
      std::size_t next_sample = 0;
      auto obs = [&](const VelocityField& snap) {
        if (observer) observer(m, snap);
        if (next_sample < slot.size() && slot[next_sample] == counter) {
          out[next_sample].members[m] = snap.with_metadata(sample_times[next_sample], config.nu);
          ++next_sample;
        }
        ++counter;
      };
      run(ensemble.members[m].with_metadata(ensemble.time, config.nu), cfg, output_times, obs);
    } catch (...) {
      errors[m] = std::current_exception();
    }
  }
  for (std::size_t m = 0; m < M; ++m) {
    if (!errors[m]) continue;
    try {
      std::rethrow_exception(errors[m]);
    } catch (const BlowUpError& e) {
      throw BlowUpError(std::string(e.what()) + " (member " + std::to_string(m) + ")", e.time(),
                        static_cast<int>(m));
    }
  }
  return out;
}

std::vector<EnergyCheck> statistical_energy_check(std::span<const Ensemble> ensembles, int K) {
  if (K < 1) throw ConfigError("K must be >= 1");
  std::vector<EnergyCheck> out;
  if (ensembles.empty()) return out;
  std::vector<double> times;
  for (const auto& e : ensembles) times.push_back(e.time);
  const auto w = trapezoid_weights(times);
  const double nu = ensembles.front().nu;

  // Per-time member energies and seminorms, member order ascending.
  std::vector<std::vector<double>> E(ensembles.size()), H(ensembles.size());
  for (std::size_t j = 0; j < ensembles.size(); ++j) {
    for (const auto& u : ensembles[j].members) {
      E[j].push_back(energy(u).value);
      H[j].push_back(h1_seminorm_sq(u).value);
    }
  }
  for (int k = 1; k <= K; ++k) {
    auto mean_power = [&](std::size_t j) {
      double s = 0.0;
      for (double e : E[j]) s += std::pow(e, k);
      return E[j].empty() ? 0.0 : s / static_cast<double>(E[j].size());
    };
    auto dissipation_density = [&](std::size_t j) {
      double s = 0.0;
      for (std::size_t m = 0; m < E[j].size(); ++m) s += std::pow(E[j][m], k - 1) * H[j][m];
      return E[j].empty() ? 0.0 : s / static_cast<double>(E[j].size());
    };
    EnergyCheck check;
    check.k = k;
    const double rhs = mean_power(0);
    double cumulative = 0.0;
    double prev = dissipation_density(0);
    check.worst_defect = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < ensembles.size(); ++j) {
      if (j > 0) {
        const double cur = dissipation_density(j);
        cumulative += 0.5 * (times[j] - times[j - 1]) * (prev + cur);
        prev = cur;
      }
      const double defect = mean_power(j) + 2.0 * nu * k * cumulative - rhs;
      check.defects.push_back(defect);
      check.worst_defect = std::max(check.worst_defect, defect);
    }
    (void)w;
    check.worst_relative = rhs > 0.0 ? check.worst_defect / rhs : 0.0;
    out.push_back(std::move(check));
  }
  return out;
}

std::vector<double> shell_spectrum(const VelocityField& field) {
  const auto& layout = SpectralLayout::of(field.grid());
  std::vector<double> e(static_cast<std::size_t>(field.grid().n), 0.0);
  for (std::size_t idx = 0; idx < layout.size(); ++idx) {
    const auto s = static_cast<std::size_t>(std::lround(std::sqrt(layout.k2[idx])));
    if (s >= e.size()) continue;
    double a = 0.0;
    for (int i = 0; i < field.dim(); ++i) a += std::norm(field.spectral(i)[idx]);
    e[s] += layout.weight[idx] * a * field.grid().volume();
  }
  return e;
}

nlohmann::json to_json(const MeasureSpec& spec) {
  return {{"kind", to_string(spec.kind)},
          {"spectrum_slope", spec.spectrum_slope},
          {"k_min", spec.k_min},
          {"k_max", spec.k_max},
          {"base", to_string(spec.base)},
          {"perturbation_amp", spec.perturbation_amp},
          {"support_radius", spec.support_radius},
          {"seed", spec.seed}};
}

MeasureSpec measure_spec_from_json(const nlohmann::json& j) {
  MeasureSpec s;
  s.kind = measure_kind_from_string(j.value("kind", std::string("random_fourier")));
  s.spectrum_slope = j.value("spectrum_slope", s.spectrum_slope);
  s.k_min = j.value("k_min", s.k_min);
  s.k_max = j.value("k_max", s.k_max);
  s.base = base_flow_from_string(j.value("base", std::string("none")));
  s.perturbation_amp = j.value("perturbation_amp", s.perturbation_amp);
  s.support_radius = j.value("support_radius", s.support_radius);
  s.seed = j.value("seed", s.seed);
  return s;
}

void write_ensemble(const std::filesystem::path& dir, const Ensemble& ensemble) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  const auto& g = ensemble.grid();
  manifest["dim"] = g.dim;
  manifest["n"] = g.n;
  manifest["nu"] = ensemble.nu;
  manifest["time"] = ensemble.time;
  manifest["spec"] = to_json(ensemble.spec);
  manifest["seed"] = ensemble.spec.seed;
  manifest["member_seeds"] = ensemble.member_seeds;
  auto files = nlohmann::json::array();
  for (std::size_t m = 0; m < ensemble.size(); ++m) {
    char name[32];
    std::snprintf(name, sizeof(name), "member_%04zu.nsf", m);
    write_snapshot(dir / name, ensemble.members[m]);
    files.push_back(name);
  }
  manifest["member_files"] = files;
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << "\n";
}

Ensemble read_ensemble(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw FormatError("missing manifest.json in " + dir.string());
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest.json: ") + e.what());
  }
  Ensemble ens;
  ens.time = manifest.at("time").get<double>();
  ens.nu = manifest.at("nu").get<double>();
  ens.spec = measure_spec_from_json(manifest.at("spec"));
  if (manifest.contains("member_seeds")) {
    ens.member_seeds = manifest["member_seeds"].get<std::vector<std::uint64_t>>();
  }
  const Grid g = Grid::make(manifest.at("dim").get<int>(), manifest.at("n").get<int>());
  for (const auto& f : manifest.at("member_files")) {
    auto u = read_snapshot(dir / f.get<std::string>());
    if (!(u.grid() == g)) throw FormatError("member grid does not match manifest");
    ens.members.push_back(std::move(u));
  }
  return ens;
}

}  // namespace nsstat
