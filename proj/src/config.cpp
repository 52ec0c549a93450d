#include "nsstat/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>

#ifndef NSSTAT_VERSION
#define NSSTAT_VERSION "0.0.0"
#endif

namespace nsstat {

std::string code_version() { return NSSTAT_VERSION; }

namespace {

enum class Type { Integer, Number, String, Boolean, NumberArray };

struct FieldSpec {
  std::string section;  // empty for top level
  std::string key;
  Type type;
  std::optional<double> minimum;
  bool exclusive_minimum = false;
  std::optional<double> maximum;
  std::vector<nlohmann::json> allowed;
  std::string description;
};

const std::vector<FieldSpec>& fields() {
  static const std::vector<FieldSpec> table = {
      {"", "schema_version", Type::Integer, 1, false, 1, {}, "config schema version"},
      {"", "members", Type::Integer, 1, false, {}, {}, "ensemble size M"},
      {"grid", "dim", Type::Integer, {}, false, {}, {2, 3}, "spatial dimension"},
      {"grid", "n", Type::Integer, 8, false, {}, {}, "points per axis, a power of two"},
      {"solver", "nu", Type::Number, 0.0, false, {}, {}, "kinematic viscosity"},
      {"solver", "dt", Type::Number, 0.0, true, {}, {}, "fixed time step; CFL stepping when absent"},
      {"solver", "cfl", Type::Number, 0.0, true, {}, {}, "Courant number for adaptive steps"},
      {"solver", "t_end", Type::Number, 0.0, false, {}, {}, "final time"},
      {"solver", "snapshot_interval", Type::Number, 0.0, true, {}, {}, "time between stored snapshots"},
      {"solver", "dealias", Type::Boolean, {}, false, {}, {}, "2/3-rule dealiasing of products"},
      {"solver", "integrator", Type::String, {}, false, {}, {"IFRK4"}, "time integrator"},
      {"measure", "kind", Type::String, {}, false, {}, {"random_fourier", "perturbed_base"}, "initial measure family"},
      {"measure", "spectrum_slope", Type::Number, {}, false, {}, {}, "gamma in E(k) ~ k^-gamma"},
      {"measure", "k_min", Type::Integer, 1, false, {}, {}, "lowest excited shell"},
      {"measure", "k_max", Type::Integer, 1, false, {}, {}, "highest excited shell, at most n/3"},
      {"measure", "base", Type::String, {}, false, {}, {"none", "taylor_green", "shear"}, "base flow"},
      {"measure", "perturbation_amp", Type::Number, {}, false, {}, {}, "amplitude of the random part"},
      {"measure", "support_radius", Type::Number, 0.0, true, {}, {}, "L2 bound R of the support"},
      {"measure", "seed", Type::Integer, 0, false, {}, {}, "global RNG seed"},
      {"analysis", "r_min", Type::Number, 0.0, true, std::numbers::pi, {}, "smallest radius"},
      {"analysis", "r_max", Type::Number, 0.0, true, std::numbers::pi, {}, "largest radius"},
      {"analysis", "r_points", Type::Integer, 2, false, {}, {}, "log-spaced radii"},
      {"analysis", "directions", Type::Integer, 8, false, {}, {}, "sphere directions (even)"},
      {"analysis", "radial_nodes", Type::Integer, 1, false, {}, {}, "Gauss-Legendre nodes for ball averages"},
      {"analysis", "khm_s0", Type::Number, 0.0, true, std::numbers::pi, {}, "bump support of the KHM test tensor"},
      {"analysis", "khm_radial_nodes", Type::Integer, 1, false, {}, {}, "radial nodes of the KHM h-quadrature"},
      {"analysis", "khm_directions", Type::Integer, 8, false, {}, {}, "directions of the KHM h-quadrature (even)"},
      {"analysis", "fk_interval", Type::Number, 0.0, true, {}, {}, "interval of streamed FK moments"},
      {"vv", "nus", Type::NumberArray, 0.0, true, {}, {}, "viscosity ladder, non-increasing"},
  };
  return table;
}

const char* type_name(Type t) {
  switch (t) {
    case Type::Integer: return "integer";
    case Type::Number: return "number";
    case Type::String: return "string";
    case Type::Boolean: return "boolean";
    default: return "array";
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::vector<std::string> sections() { return {"grid", "solver", "measure", "analysis", "vv"}; }

bool type_matches(const nlohmann::json& v, Type t) {
  switch (t) {
    case Type::Integer: return v.is_number_integer();
    case Type::Number: return v.is_number();
    case Type::String: return v.is_string();
    case Type::Boolean: return v.is_boolean();
    default: return v.is_array();
  }
}

// Returns false when the value cannot be read into the config at all (wrong
// type or not in its enum); range violations still leave it usable.
bool check_value(const FieldSpec& f, const std::string& path, const nlohmann::json& v,
                 std::vector<Violation>& out) {
  if (!type_matches(v, f.type)) {
    out.push_back({path, f.key + " must be of type " + type_name(f.type)});
    return false;
  }
  auto bounds = [&](double x, const std::string& label) {
    if (f.minimum) {
      if (f.exclusive_minimum && !(x > *f.minimum)) out.push_back({path, label + " must be > " + fmt(*f.minimum)});
      if (!f.exclusive_minimum && !(x >= *f.minimum)) out.push_back({path, label + " must be ≥ " + fmt(*f.minimum)});
    }
    if (f.maximum && !(x <= *f.maximum)) out.push_back({path, label + " must be ≤ " + fmt(*f.maximum)});
  };
  if (f.type == Type::NumberArray) {
    if (v.empty()) out.push_back({path, f.key + " must not be empty"});
    bool usable = true;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) {
        out.push_back({path + "[" + std::to_string(i) + "]", "entries of " + f.key + " must be numbers"});
        usable = false;
      } else {
        bounds(v[i].get<double>(), f.key + " entries");
      }
    }
    return usable;
  }
  if (f.type == Type::Integer || f.type == Type::Number) bounds(v.get<double>(), f.key);
  if (!f.allowed.empty() && std::find(f.allowed.begin(), f.allowed.end(), v) == f.allowed.end()) {
    std::string list;
    for (const auto& a : f.allowed) list += (list.empty() ? "" : ", ") + a.dump();
    out.push_back({path, f.key + " must be one of " + list});
    return false;
  }
  return true;
}

}  // namespace

ConfigViolations::ConfigViolations(std::vector<Violation> violations)
    : ConfigError([&] {
        std::string msg = "invalid configuration:";
        for (const auto& v : violations) msg += "\n  " + v.path + ": " + v.message;
        return msg;
      }()),
      violations_(std::move(violations)) {}

nlohmann::json ConfigViolations::to_json() const {
  auto list = nlohmann::json::array();
  for (const auto& v : violations_) list.push_back({{"path", v.path}, {"message", v.message}});
  return {{"error", "config_validation"}, {"violations", list}};
}

nlohmann::json config_schema() {
  nlohmann::json schema;
  schema["$schema"] = "http://json-schema.org/draft-07/schema#";
  schema["title"] = "nsstat run configuration";
  schema["type"] = "object";
  schema["additionalProperties"] = false;
  schema["properties"] = nlohmann::json::object();
  for (const auto& s : sections()) {
    schema["properties"][s] = {{"type", "object"}, {"additionalProperties", false},
                               {"properties", nlohmann::json::object()}};
  }
  for (const auto& f : fields()) {
    nlohmann::json p;
    p["description"] = f.description;
    nlohmann::json* target = &p;
    nlohmann::json items;
    if (f.type == Type::NumberArray) {
      p["type"] = "array";
      p["minItems"] = 1;
      items["type"] = "number";
      target = &items;
    } else {
      p["type"] = type_name(f.type);
    }
    if (f.minimum) (*target)[f.exclusive_minimum ? "exclusiveMinimum" : "minimum"] = *f.minimum;
    if (f.maximum) (*target)["maximum"] = *f.maximum;
    if (!f.allowed.empty()) (*target)["enum"] = f.allowed;
    if (f.type == Type::NumberArray) p["items"] = items;
    if (f.section.empty()) {
      schema["properties"][f.key] = p;
    } else {
      schema["properties"][f.section]["properties"][f.key] = p;
    }
  }
  return schema;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["schema_version"] = schema_version;
  j["members"] = members;
  j["grid"] = {{"dim", grid.dim}, {"n", grid.n}};
  j["solver"] = {{"nu", solver.nu},
                 {"cfl", solver.cfl},
                 {"t_end", solver.t_end},
                 {"snapshot_interval", solver.snapshot_interval},
                 {"dealias", solver.dealias},
                 {"integrator", "IFRK4"}};
  if (solver.dt) j["solver"]["dt"] = *solver.dt;
  j["measure"] = nsstat::to_json(measure);
  j["analysis"] = {{"r_min", analysis.r_min},
                   {"r_max", analysis.r_max},
                   {"r_points", analysis.r_points},
                   {"directions", analysis.directions},
                   {"radial_nodes", analysis.radial_nodes},
                   {"khm_s0", analysis.khm_s0},
                   {"khm_radial_nodes", analysis.khm_radial_nodes},
                   {"khm_directions", analysis.khm_directions},
                   {"fk_interval", analysis.fk_interval}};
  j["vv"] = {{"nus", vv.nus}};
  return j;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string RunConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(to_json().dump())));
  return buf;
}

nlohmann::json provenance(const RunConfig& config) {
  return {{"config_hash", config.hash()}, {"code_version", code_version()}};
}

RunConfig parse_config(const nlohmann::json& j) {
  std::vector<Violation> violations;
  if (!j.is_object()) throw ConfigViolations(std::vector<Violation>{{"", "config must be a JSON object"}});
  bool readable = true;

  // Structural pass: unknown keys, section types, field types and bounds.
  const auto secs = sections();
  for (const auto& [key, value] : j.items()) {
    const bool is_section = std::find(secs.begin(), secs.end(), key) != secs.end();
    const bool is_top_field = std::any_of(fields().begin(), fields().end(), [&](const FieldSpec& f) {
      return f.section.empty() && f.key == key;
    });
    if (!is_section && !is_top_field) {
      violations.push_back({key, "unknown key '" + key + "'"});
      continue;
    }
    if (is_section) {
      if (!value.is_object()) {
        violations.push_back({key, key + " must be an object"});
        readable = false;
        continue;
      }
      for (const auto& [sub, v] : value.items()) {
        const bool known = std::any_of(fields().begin(), fields().end(), [&](const FieldSpec& f) {
          return f.section == key && f.key == sub;
        });
        if (!known) violations.push_back({key + "." + sub, "unknown key '" + sub + "'"});
      }
    }
  }
  auto lookup = [&](const FieldSpec& f) -> const nlohmann::json* {
    if (f.section.empty()) return j.contains(f.key) ? &j.at(f.key) : nullptr;
    if (!j.contains(f.section) || !j.at(f.section).is_object()) return nullptr;
    const auto& s = j.at(f.section);
    return s.contains(f.key) ? &s.at(f.key) : nullptr;
  };
  for (const auto& f : fields()) {
    if (const auto* v = lookup(f)) {
      readable = check_value(f, f.section.empty() ? f.key : f.section + "." + f.key, *v, violations) && readable;
    }
  }
  // Range violations do not stop the cross-field pass, so one run reports all.
  if (!readable) throw ConfigViolations(std::move(violations));

  // Fill defaults from well-typed values.
  RunConfig c;
  c.solver.t_end = 1.0;
  c.solver.snapshot_interval = 0.05;
  auto get = [&](const std::string& section, const std::string& key, auto& target) {
    const nlohmann::json* v = nullptr;
    if (section.empty()) {
      if (j.contains(key)) v = &j.at(key);
    } else if (j.contains(section) && j.at(section).contains(key)) {
      v = &j.at(section).at(key);
    }
    if (v) target = v->get<std::decay_t<decltype(target)>>();
  };
  get("", "schema_version", c.schema_version);
  get("", "members", c.members);
  get("grid", "dim", c.grid.dim);
  get("grid", "n", c.grid.n);
  get("solver", "nu", c.solver.nu);
  if (j.contains("solver") && j["solver"].contains("dt")) c.solver.dt = j["solver"]["dt"].get<double>();
  get("solver", "cfl", c.solver.cfl);
  get("solver", "t_end", c.solver.t_end);
  get("solver", "snapshot_interval", c.solver.snapshot_interval);
  get("solver", "dealias", c.solver.dealias);
  if (j.contains("measure")) {
    try {
      c.measure = measure_spec_from_json(j["measure"]);
    } catch (const ConfigError&) {
      if (violations.empty()) throw;
      throw ConfigViolations(std::move(violations));
    }
  }
  get("analysis", "r_min", c.analysis.r_min);
  get("analysis", "r_max", c.analysis.r_max);
  get("analysis", "r_points", c.analysis.r_points);
  get("analysis", "directions", c.analysis.directions);
  get("analysis", "radial_nodes", c.analysis.radial_nodes);
  get("analysis", "khm_s0", c.analysis.khm_s0);
  get("analysis", "khm_radial_nodes", c.analysis.khm_radial_nodes);
  get("analysis", "khm_directions", c.analysis.khm_directions);
  get("analysis", "fk_interval", c.analysis.fk_interval);
  get("vv", "nus", c.vv.nus);

  // Cross-field rules.
  const int n = c.grid.n;
  if (n >= 8 && (n & (n - 1)) != 0) violations.push_back({"grid.n", "n must be a power of two"});
  if (c.measure.k_max > n / 3) {
    violations.push_back({"measure.k_max", "k_max = " + std::to_string(c.measure.k_max) +
                                               " exceeds the dealiasing band n/3 = " + std::to_string(n / 3) +
                                               " (2/3 rule)"});
  }
  if (c.measure.k_min > c.measure.k_max) violations.push_back({"measure.k_min", "k_min must be ≤ k_max"});
  if (c.measure.kind == MeasureKind::PerturbedBase && c.measure.base == BaseFlow::None) {
    violations.push_back({"measure.base", "perturbed_base needs a base flow"});
  }
  if (c.analysis.r_min >= c.analysis.r_max) violations.push_back({"analysis.r_min", "r_min must be < r_max"});
  if (c.analysis.directions % 2 != 0) violations.push_back({"analysis.directions", "directions must be even"});
  if (c.analysis.khm_directions % 2 != 0) {
    violations.push_back({"analysis.khm_directions", "khm_directions must be even"});
  }
  if (c.solver.dt && *c.solver.dt > c.solver.snapshot_interval) {
    violations.push_back({"solver.dt", "dt must be ≤ snapshot_interval"});
  }
  for (std::size_t i = 1; i < c.vv.nus.size(); ++i) {
    if (c.vv.nus[i] > c.vv.nus[i - 1]) violations.push_back({"vv.nus", "nus must be non-increasing"});
  }
  if (!violations.empty()) throw ConfigViolations(std::move(violations));
  return c;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigViolations(std::vector<Violation>{{"", "cannot read config file " + path.string()}});
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigViolations(std::vector<Violation>{{"", std::string("malformed JSON: ") + e.what()}});
  }
  return parse_config(j);
}

}  // namespace nsstat
