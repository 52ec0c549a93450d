// nsstat: command-line driver for the ensemble solver and statistics pipeline.

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nsstat/checks.hpp"
#include "nsstat/config.hpp"
#include "nsstat/correlation.hpp"
#include "nsstat/ensemble.hpp"
#include "nsstat/khm.hpp"
#include "nsstat/report.hpp"
#include "nsstat/snapshot_io.hpp"
#include "nsstat/structure.hpp"
#include "nsstat/vvlimit.hpp"
#include "tg_oracle.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nsstat;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitVerify = 3;

struct Options {
  std::string config;
  bool print_config = false;
  int threads = 0;
  std::string out = "nsstat_out";
  std::string input;
  std::string ensemble;
  std::string golden;
  bool bless = false;
  bool plan_only = false;
  std::vector<std::string> suites;
};

RunConfig load_config(const Options& o) {
  if (o.config.empty()) return parse_config(json::object());
  return parse_config(fs::path(o.config));
}

void apply_threads(int requested) {
  int threads = requested;
  if (threads <= 0) {
    if (const char* env = std::getenv("NSE_STAT_THREADS")) {
      try {
        threads = std::stoi(env);
      } catch (const std::exception&) {
        throw ConfigError(std::string("NSE_STAT_THREADS is not an integer: ") + env);
      }
      if (threads <= 0) throw ConfigError("NSE_STAT_THREADS must be ≥ 1");
    }
  }
  if (threads > 0) omp_set_num_threads(threads);
}

void write_provenance(const fs::path& dir, const RunConfig& c) {
  auto p = provenance(c);
  p["config"] = c.to_json();
  write_json(dir / "provenance.json", p);
}

std::vector<double> r_grid_of(const RunConfig& c) {
  return log_spaced(c.analysis.r_min, c.analysis.r_max, c.analysis.r_points);
}

Ensemble initial_ensemble(const RunConfig& c, const Options& o) {
  if (!o.ensemble.empty()) return read_ensemble(o.ensemble);
  return sample_initial(c.measure, c.members, c.grid, c.solver.nu);
}

void write_member_trajectories(const fs::path& dir, const std::vector<Ensemble>& ensembles, const RunConfig& c) {
  if (ensembles.empty()) return;
  json members = json::array();
  for (std::size_t m = 0; m < ensembles.front().size(); ++m) {
    Trajectory t;
    for (const auto& e : ensembles) {
      t.snapshots.push_back(e.members[m]);
      t.times.push_back(e.time);
    }
    char name[32];
    std::snprintf(name, sizeof(name), "member_%04zu", m);
    write_trajectory(dir / name, t, c.to_json());
    members.push_back(name);
  }
  write_json(dir / "members.json", {{"members", members}, {"provenance", provenance(c)}});
}

std::vector<Ensemble> load_trajectories(const fs::path& dir, const RunConfig& c) {
  const auto index = read_json(dir / "members.json");
  std::vector<Trajectory> trajs;
  for (const auto& m : index.at("members")) trajs.push_back(read_trajectory(dir / m.get<std::string>()));
  if (trajs.empty()) throw FormatError("no member trajectories in " + dir.string());
  std::vector<Ensemble> out(trajs.front().times.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j].time = trajs.front().times[j];
    out[j].nu = c.solver.nu;
    out[j].spec = c.measure;
    for (const auto& t : trajs) {
      if (t.times.size() != out.size()) throw FormatError("member trajectories have different lengths");
      out[j].members.push_back(t.snapshots[j]);
    }
  }
  return out;
}

std::vector<Ensemble> trajectory_ensembles(const RunConfig& c, const Options& o) {
  if (!o.input.empty()) return load_trajectories(o.input, c);
  const auto times = c.solver.output_times();
  return evolve(initial_ensemble(c, o), c.solver, times);
}

int cmd_synth(const RunConfig& c, const Options& o) {
  const auto ens = sample_initial(c.measure, c.members, c.grid, c.solver.nu);
  write_ensemble(o.out, ens);
  write_provenance(o.out, c);
  std::cout << "wrote " << ens.size() << " members to " << o.out << "\n";
  return 0;
}

int cmd_simulate(const RunConfig& c, const Options& o) {
  const auto times = c.solver.output_times();
  const auto ensembles = evolve(initial_ensemble(c, o), c.solver, times);
  write_member_trajectories(o.out, ensembles, c);
  write_provenance(o.out, c);
  std::cout << "wrote " << ensembles.front().size() << " trajectories of " << times.size() << " snapshots to "
            << o.out << "\n";
  return 0;
}

bool is_taylor_green_singleton(const RunConfig& c) {
  return c.grid.dim == 2 && c.members == 1 && c.measure.base == BaseFlow::TaylorGreen &&
         c.measure.kind == MeasureKind::PerturbedBase && c.measure.perturbation_amp == 0.0;
}

std::vector<std::pair<double, double>> read_golden(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read golden file " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<std::pair<double, double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    rows.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
  }
  return rows;
}

int bless_golden(const RunConfig& c, const Options& o) {
  if (!is_taylor_green_singleton(c)) throw ConfigError("--bless needs the 2D Taylor–Green singleton fixture");
  const auto r = r_grid_of(c);
  const auto s2 = taylor_green_s2par(c.solver.nu, c.solver.t_end, r);
  std::ofstream out(o.golden);
  if (!out) throw Error("cannot write " + o.golden);
  out.precision(17);
  out << "r,S2_par\n";
  for (std::size_t i = 0; i < r.size(); ++i) out << r[i] << ',' << s2[i] << '\n';
  std::cout << "blessed " << o.golden << " from the brute-force Taylor–Green oracle\n";
  return 0;
}

int cmd_stats(const RunConfig& c, const Options& o) {
  if (o.bless) {
    if (o.golden.empty()) throw ConfigError("--bless requires --golden");
    return bless_golden(c, o);
  }
  const auto ensembles = trajectory_ensembles(c, o);
  const auto r = r_grid_of(c);
  const auto dirs = DirectionSet::make(c.grid.dim, c.analysis.directions);
  const std::vector<int> p_list{2, 3};
  const auto table = structure_functions(ensembles, r, dirs, p_list);
  json report;
  report["provenance"] = provenance(c);
  report["tau"] = table.tau;
  report["E0"] = table.E0;
  const auto bounds = bound_check(table);
  report["bounds"] = to_json(bounds);
  try {
    report["scaling_fit"] = to_json(scaling_fit(r, table.S_par, r.front(), r.back()));
  } catch (const ConfigError& e) {
    report["scaling_fit"] = {{"skipped", e.what()}};
  }
  std::vector<CorrelationRow> rows;
  for (const Ensemble* e : {&ensembles.front(), &ensembles.back()}) {
    for (double radius : r) rows.push_back({"dc_modulus", 2, e->time, radius, dc_modulus(*e, radius, 2.0)});
  }
  fs::create_directories(o.out);
  write_structure_csv(fs::path(o.out) / "structure.csv", table);
  fs::remove(fs::path(o.out) / "correlation.csv");
  append_correlation_csv(fs::path(o.out) / "correlation.csv", rows);

  int code = 0;
  if (!o.golden.empty()) {
    const auto golden = read_golden(o.golden);
    double worst = 0.0;
    if (golden.size() != r.size()) throw ConfigError("golden file radii do not match the config r grid");
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (std::abs(golden[i].first - r[i]) > 1e-12 * r[i]) throw ConfigError("golden file radii do not match");
      worst = std::max(worst, std::abs(table.S_par.at(2)[i] - golden[i].second) / std::abs(golden[i].second));
    }
    report["golden"] = {{"file", o.golden}, {"max_relative", worst}, {"tolerance", 5e-3}};
    std::cout << "golden S2_par max relative deviation " << worst << (worst <= 5e-3 ? " PASS" : " FAIL") << "\n";
    if (worst > 5e-3) code = kExitVerify;
  }
  write_json(fs::path(o.out) / "stats.json", report);
  std::cout << "bound ratios: S0_3 " << bounds.ratio_S0 << ", S_par_3 " << bounds.ratio_par << "\nwrote " << o.out
            << "\n";
  return code;
}

int cmd_khm(const RunConfig& c, const Options& o) {
  const auto ensembles = trajectory_ensembles(c, o);
  const KHMQuadrature quad{c.analysis.khm_radial_nodes, c.analysis.khm_directions};
  const auto omega = RadialProfile::bump(c.analysis.khm_s0);
  json out;
  out["provenance"] = provenance(c);
  for (auto form : {KHMForm::Full, KHMForm::Trace, KHMForm::Longitudinal}) {
    const auto budget = khm_budget(ensembles, tensor_for(form, omega, c.grid.dim), form, quad);
    out[to_string(form)] = to_json(budget);
    std::cout << to_string(form) << ": relative residual " << budget.relative() << "\n";
  }
  fs::create_directories(o.out);
  write_json(fs::path(o.out) / "khm.json", out);
  return 0;
}

FKTestFunction default_fk_test(int dim, double t_end) {
  FKTestFunction f;
  f.theta = {TimeProfile::Kind::RaisedCosine, t_end};
  const double s = std::sqrt(0.5);
  f.psi1 = {FourierMode{{1, 1, 0}, {s, -s, 0.0}, {0.0, 0.0, 0.0}}, FourierMode{{0, 2, 0}, {0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}}};
  if (dim == 3) f.psi1.push_back(FourierMode{{0, 1, 1}, {0.0, s, -s}, {0.0, 0.0, 0.0}});
  return f;
}

SweepPlan plan_of(const RunConfig& c) {
  SweepPlan plan;
  plan.nus = c.vv.nus;
  plan.spec = c.measure;
  plan.grid = c.grid;
  plan.members = c.members;
  plan.t_end = c.solver.t_end;
  plan.cfl = c.solver.cfl;
  plan.snapshot_interval = c.solver.snapshot_interval;
  plan.fk_interval = c.analysis.fk_interval;
  plan.r_grid = r_grid_of(c);
  plan.directions = c.analysis.directions;
  plan.fk_test = default_fk_test(c.grid.dim, c.solver.t_end);
  plan.khm_omega = RadialProfile::bump(c.analysis.khm_s0);
  plan.validate();
  return plan;
}

int cmd_vv(const RunConfig& c, const Options& o) {
  const auto plan = plan_of(c);
  if (o.plan_only) {
    json j = to_json(plan);
    json ladder = json::array();
    for (double nu : plan.nus) {
      ladder.push_back({{"nu", nu},
                        {"resolved", c.grid.n / 3.0 >= 1.0 / std::sqrt(nu)},
                        {"member_runs", plan.members},
                        {"directory", nu_label(nu)}});
    }
    j["ladder"] = ladder;
    j["run_id"] = "run-" + c.hash();
    j["provenance"] = provenance(c);
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  const auto report = run_sweep(plan, [](const std::string& msg) { std::cerr << msg << "\n"; });
  const fs::path dir = fs::path(o.out) / ("run-" + c.hash());
  write_sweep(dir, report, provenance(c));
  std::cout << "inviscid FK slope (k=1) " << report.inviscid_k1.slope << ", (k=2) " << report.inviscid_k2.slope
            << "\nwrote " << dir.string() << "\n";
  return 0;
}

int cmd_check(const Options& o) {
  std::vector<std::string> suites = o.suites.empty() ? check_suites() : o.suites;
  bool all = true;
  for (const auto& s : suites) {
    for (const auto& r : run_check_suite(s)) {
      std::printf("%-5s %-13s %-28s value=%.3e tol=%.1e\n", r.passed ? "PASS" : "FAIL", r.suite.c_str(),
                  r.name.c_str(), r.value, r.tolerance);
      all = all && r.passed;
    }
  }
  return all ? 0 : kExitVerify;
}

void emit_error(const std::string& kind, const std::string& message, const json& extra = json::object()) {
  json j = {{"error", kind}, {"message", message}};
  for (const auto& [k, v] : extra.items()) j[k] = v;
  std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ensemble pseudo-spectral Navier–Stokes solver and statistical-solution diagnostics"};
  app.require_subcommand(0, 1);
  Options o;
  app.add_flag("--print-config", o.print_config, "Print the validated config with defaults filled and exit");
  bool print_schema = false;
  app.add_flag("--print-schema", print_schema, "Print the JSON schema of run configurations and exit");
  app.add_option("--threads", o.threads, "OpenMP threads (falls back to NSE_STAT_THREADS)")->check(CLI::PositiveNumber);

  auto with_config = [&](CLI::App* sub) {
    sub->add_option("-c,--config", o.config, "Run configuration (JSON)");
    sub->add_option("-o,--out", o.out, "Output directory");
    return sub;
  };
  auto* synth = with_config(app.add_subcommand("synth", "Sample the initial measure into an ensemble directory"));
  auto* simulate = with_config(app.add_subcommand("simulate", "Evolve an ensemble into member trajectory directories"));
  simulate->add_option("--ensemble", o.ensemble, "Initial ensemble directory (default: sample from config)");
  auto* stats = with_config(app.add_subcommand("stats", "Structure functions, DC modulus and bound checks"));
  stats->add_option("--input", o.input, "Trajectory directory written by simulate (default: run in memory)");
  stats->add_option("--ensemble", o.ensemble, "Initial ensemble directory");
  stats->add_option("--golden", o.golden, "Compare S2_par with a golden CSV (exit 3 on mismatch)");
  stats->add_flag("--bless", o.bless, "Regenerate the golden CSV from the brute-force oracle");
  auto* khm = with_config(app.add_subcommand("khm", "KHM budget in full, trace and longitudinal forms"));
  khm->add_option("--input", o.input, "Trajectory directory written by simulate");
  khm->add_option("--ensemble", o.ensemble, "Initial ensemble directory");
  auto* vv = with_config(app.add_subcommand("vv", "Vanishing-viscosity sweep over the config nu ladder"));
  vv->add_flag("--plan-only", o.plan_only, "Print the ladder plan without computing");
  auto* check = app.add_subcommand("check", "Built-in verification suites (exit 0 iff all pass)");
  check->add_option("--suite", o.suites, "Suite to run (repeatable); default all")
      ->check(CLI::IsMember(check_suites()));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    emit_error("usage", e.what());
    return kExitConfig;
  }

  if (print_schema) {
    std::cout << config_schema().dump(2) << "\n";
    return 0;
  }
  if (app.get_subcommands().empty()) {
    emit_error("usage", "a subcommand is required (synth, simulate, stats, khm, vv, check)");
    return kExitConfig;
  }
  try {
    apply_threads(o.threads);
    if (check->parsed()) return cmd_check(o);
    const RunConfig config = load_config(o);
    if (o.print_config) {
      std::cout << config.to_json().dump(2) << "\n";
      return 0;
    }
    if (synth->parsed()) return cmd_synth(config, o);
    if (simulate->parsed()) return cmd_simulate(config, o);
    if (stats->parsed()) return cmd_stats(config, o);
    if (khm->parsed()) return cmd_khm(config, o);
    if (vv->parsed()) return cmd_vv(config, o);
  } catch (const ConfigViolations& e) {
    std::cerr << e.to_json().dump() << "\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    emit_error("config", e.what());
    return kExitConfig;
  } catch (const DomainError& e) {
    emit_error("config", e.what());
    return kExitConfig;
  } catch (const BlowUpError& e) {
    emit_error("blowup", e.what(), {{"time", e.time()}, {"member", e.member()}});
    return kExitRuntime;
  } catch (const std::exception& e) {
    emit_error("runtime", e.what());
    return kExitRuntime;
  }
  return kExitRuntime;
}
