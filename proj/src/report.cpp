#include "nsstat/report.hpp"

#include <cstdio>
#include <fstream>

#include "nsstat/error.hpp"
#include "nsstat/snapshot_io.hpp"

namespace nsstat {

namespace fs = std::filesystem;

nlohmann::json to_json(const FKResidual& r) {
  return {{"k", r.k},
          {"test_function", r.test_function},
          {"terms", r.terms},
          {"residual", r.residual},
          {"scale", r.scale},
          {"relative", r.relative()}};
}

nlohmann::json to_json(const KHMBudget& b) {
  return {{"form", to_string(b.form)},
          {"s0", b.s0},
          {"nu", b.nu},
          {"tau", b.tau},
          {"terms", b.terms},
          {"residual", b.residual},
          {"scale", b.scale},
          {"relative", b.relative()},
          {"viscous_agreement", b.viscous_agreement()}};
}

namespace {

nlohmann::json int_keyed(const std::map<int, double>& m) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [p, v] : m) j[std::to_string(p)] = v;
  return j;
}

}  // namespace

nlohmann::json to_json(const ScalingFit& f) {
  return {{"alpha", f.alpha},
          {"alpha_r_squared", f.alpha_r_squared},
          {"zeta", int_keyed(f.zeta)},
          {"zeta_r_squared", int_keyed(f.zeta_r_squared)},
          {"she_leveque", int_keyed(f.she_leveque)},
          {"r_lo", f.r_lo},
          {"r_hi", f.r_hi},
          {"points", f.points},
          {"degraded", f.degraded}};
}

nlohmann::json to_json(const BoundCheck& b) {
  return {{"ratio_S0", b.ratio_S0}, {"ratio_par", b.ratio_par}, {"violated", b.violated}};
}

nlohmann::json to_json(const StatisticDistances& d) {
  return {{"mean_field", d.mean_field},       {"correlation", d.correlation},
          {"wasserstein", d.wasserstein},     {"se_mean_field", d.se_mean_field},
          {"se_correlation", d.se_correlation}, {"se_wasserstein", d.se_wasserstein}};
}

nlohmann::json to_json(const InviscidScaling& s) {
  return {{"k", s.k}, {"nus", s.nus}, {"residuals", s.residuals}, {"slope", s.slope}, {"r_squared", s.r_squared}};
}

nlohmann::json to_json(const DCUniformity& u) {
  return {{"fit_skipped", u.fit_skipped},
          {"alpha", u.alpha},
          {"C", u.C},
          {"r_squared", u.r_squared},
          {"worst_nu", u.worst_nu},
          {"envelope", u.envelope},
          {"nu_monotone", u.nu_monotone},
          {"envelope_nondecreasing", u.envelope_nondecreasing}};
}

nlohmann::json to_json(const SweepPlan& p) {
  return {{"nus", p.nus},
          {"measure", to_json(p.spec)},
          {"grid", {{"dim", p.grid.dim}, {"n", p.grid.n}}},
          {"members", p.members},
          {"t_end", p.t_end},
          {"cfl", p.cfl},
          {"snapshot_interval", p.snapshot_interval},
          {"fk_interval", p.fk_interval},
          {"r_grid", p.r_grid},
          {"directions", p.directions},
          {"fk_test", p.fk_test.describe()},
          {"khm_s0", p.khm_omega.s0}};
}

nlohmann::json to_json(const NuReport& r) {
  nlohmann::json blowups = nlohmann::json::array();
  for (const auto& b : r.blowups) blowups.push_back({{"member", b.member}, {"time", b.time}, {"message", b.message}});
  nlohmann::json j = {{"nu", r.nu}, {"resolved", r.resolved}, {"failed", r.failed}, {"blowups", blowups}};
  if (r.failed) return j;
  j["energy_defect"] = r.energy_defect;
  j["fk1"] = to_json(r.fk1);
  j["fk2"] = to_json(r.fk2);
  j["fk1_inviscid"] = to_json(r.fk1_inviscid);
  j["fk2_inviscid"] = to_json(r.fk2_inviscid);
  j["bounds"] = to_json(r.bounds);
  j["khm"] = to_json(r.khm);
  j["E0"] = r.structure.E0;
  return j;
}

nlohmann::json to_json(const SweepReport& r) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& run : r.runs) runs.push_back(to_json(run));
  nlohmann::json distances = nlohmann::json::array();
  for (const auto& d : r.distances) distances.push_back(to_json(d));
  return {{"plan", to_json(r.plan)},
          {"runs", runs},
          {"distances", distances},
          {"dc_uniformity", to_json(r.dc)},
          {"inviscid_k1", to_json(r.inviscid_k1)},
          {"inviscid_k2", to_json(r.inviscid_k2)}};
}

namespace {

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw Error("cannot write " + path.string());
  out.precision(17);
  return out;
}

}  // namespace

void write_structure_csv(const fs::path& path, const StructureFunctionTable& table) {
  auto out = open_out(path);
  out << "tau,r,p,S_par,S0_3,S_perp_3\n";
  for (const auto& [p, values] : table.S_par) {
    for (std::size_t i = 0; i < table.r_grid.size(); ++i) {
      out << table.tau << ',' << table.r_grid[i] << ',' << p << ',' << values[i] << ','
          << (i < table.S0_3.size() ? table.S0_3[i] : 0.0) << ','
          << (i < table.S_perp_3.size() ? table.S_perp_3[i] : 0.0) << '\n';
    }
  }
}

void append_correlation_csv(const fs::path& path, const std::vector<CorrelationRow>& rows) {
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  auto out = open_out(path, std::ios::app);
  if (fresh) out << "observable,k,t_or_tau,h_or_r,value\n";
  for (const auto& row : rows) {
    out << row.observable << ',' << row.k << ',' << row.t_or_tau << ',' << row.h_or_r << ',' << row.value << '\n';
  }
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_trajectory(const fs::path& dir, const Trajectory& trajectory, const nlohmann::json& config) {
  fs::create_directories(dir);
  nlohmann::json files = nlohmann::json::array();
  for (std::size_t i = 0; i < trajectory.snapshots.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "snap_%05zu.nsf", i);
    write_snapshot(dir / name, trajectory.snapshots[i]);
    files.push_back(name);
  }
  write_json(dir / "index.json", {{"config", config}, {"times", trajectory.times}, {"files", files}});
}

Trajectory read_trajectory(const fs::path& dir) {
  const auto index = read_json(dir / "index.json");
  Trajectory t;
  t.times = index.at("times").get<std::vector<double>>();
  for (const auto& f : index.at("files")) t.snapshots.push_back(read_snapshot(dir / f.get<std::string>()));
  if (t.times.size() != t.snapshots.size()) throw FormatError("trajectory index lists mismatched times and files");
  return t;
}

std::string nu_label(double nu) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "nu=%g", nu);
  return buf;
}

void write_sweep(const fs::path& dir, const SweepReport& report, const nlohmann::json& provenance) {
  auto j = to_json(report);
  j["provenance"] = provenance;
  write_json(dir / "sweep.json", j);
  for (const auto& run : report.runs) {
    const fs::path sub = dir / nu_label(run.nu);
    auto summary = to_json(run);
    summary["provenance"] = provenance;
    write_json(sub / "summary.json", summary);
    if (run.failed) continue;
    write_structure_csv(sub / "structure.csv", run.structure);
    std::vector<CorrelationRow> rows;
    for (std::size_t i = 0; i < report.plan.r_grid.size(); ++i) {
      if (i < run.dc_integrated.size()) rows.push_back({"dc_integrated", 2, report.plan.t_end, report.plan.r_grid[i], run.dc_integrated[i]});
      if (i < run.correlation_curve.size()) rows.push_back({"correlation", 2, report.plan.t_end, report.plan.r_grid[i], run.correlation_curve[i]});
    }
    for (std::size_t i = 0; i < run.times.size(); ++i) rows.push_back({"mean_energy", 1, run.times[i], 0.0, run.mean_energy[i]});
    fs::remove(sub / "correlation.csv");
    append_correlation_csv(sub / "correlation.csv", rows);
  }
}

}  // namespace nsstat
