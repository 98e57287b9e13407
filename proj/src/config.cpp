#include "vpfp/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

extern char** environ;

namespace vpfp {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw config_error("config: " + where + ": " + what);
}

void reject_unknown(const json& obj, const std::string& section,
                    std::initializer_list<const char*> known) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* k : known)
      if (key == k) ok = true;
    if (!ok) fail(section.empty() ? key : section + "." + key, "unknown key");
  }
}

template <typename T>
void read(const json& obj, const std::string& section, const char* key, T& target) {
  if (!obj.contains(key)) return;
  try {
    target = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(section + std::string(".") + key, e.what());
  }
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::single_run: return "single_run";
    case ExperimentKind::convergence_study: return "convergence_study";
    case ExperimentKind::regime_sweep: return "regime_sweep";
    case ExperimentKind::invariant_battery: return "invariant_battery";
  }
  return "single_run";
}

static ExperimentKind experiment_from_name(const std::string& name) {
  if (name == "single_run") return ExperimentKind::single_run;
  if (name == "convergence_study") return ExperimentKind::convergence_study;
  if (name == "regime_sweep") return ExperimentKind::regime_sweep;
  if (name == "invariant_battery") return ExperimentKind::invariant_battery;
  fail("experiment", "expected one of single_run, convergence_study, regime_sweep, "
                     "invariant_battery, got '" + name + "'");
}

RunConfig RunConfig::parse(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    fail("(root)", e.what());
  }
  if (!root.is_object()) fail("(root)", "top level must be a JSON object");

  RunConfig c;
  reject_unknown(root, "",
                 {"experiment", "model", "ic", "transport", "poisson", "time", "filter",
                  "output", "diagnostics", "convergence", "sweep", "battery"});

  if (root.contains("experiment"))
    c.experiment = experiment_from_name(root.at("experiment").get<std::string>());

  if (root.contains("model")) {
    const json& o = root.at("model");
    reject_unknown(o, "model", {"T0", "tau0", "rho_inf", "NH", "m", "L", "Nx", "nodes"});
    read(o, "model", "T0", c.model.T0);
    read(o, "model", "tau0", c.model.tau0);
    read(o, "model", "rho_inf", c.model.rho_inf);
    read(o, "model", "NH", c.model.NH);
    read(o, "model", "m", c.model.m);
    read(o, "model", "L", c.model.L);
    read(o, "model", "Nx", c.model.Nx);
    read(o, "model", "nodes", c.model.nodes);
  }
  if (root.contains("ic")) {
    const json& o = root.at("ic");
    reject_unknown(o, "ic", {"kind", "delta"});
    read(o, "ic", "kind", c.ic.kind);
    read(o, "ic", "delta", c.ic.delta);
  }
  if (root.contains("transport")) {
    const json& o = root.at("transport");
    reject_unknown(o, "transport", {"flux"});
    read(o, "transport", "flux", c.transport.flux);
  }
  if (root.contains("poisson")) {
    const json& o = root.at("poisson");
    reject_unknown(o, "poisson", {"method", "ldg_flux"});
    read(o, "poisson", "method", c.poisson.method);
    read(o, "poisson", "ldg_flux", c.poisson.ldg_flux);
  }
  if (root.contains("time")) {
    const json& o = root.at("time");
    reject_unknown(o, "time", {"dt", "t_end", "picard_tol", "picard_max_iters"});
    read(o, "time", "dt", c.time.dt);
    read(o, "time", "t_end", c.time.t_end);
    read(o, "time", "picard_tol", c.time.picard_tol);
    read(o, "time", "picard_max_iters", c.time.picard_max_iters);
  }
  if (root.contains("filter")) {
    const json& o = root.at("filter");
    reject_unknown(o, "filter", {"enabled", "alpha", "order", "cut", "hard_cut"});
    read(o, "filter", "enabled", c.filter.enabled);
    read(o, "filter", "alpha", c.filter.alpha);
    read(o, "filter", "order", c.filter.order);
    read(o, "filter", "cut", c.filter.cut);
    read(o, "filter", "hard_cut", c.filter.hard_cut);
  }
  if (root.contains("output")) {
    const json& o = root.at("output");
    reject_unknown(o, "output",
                   {"dir", "stride", "snapshot_times", "phase_grid_nx", "phase_grid_nv",
                    "vmax_factor"});
    read(o, "output", "dir", c.output.dir);
    read(o, "output", "stride", c.output.stride);
    read(o, "output", "snapshot_times", c.output.snapshot_times);
    read(o, "output", "phase_grid_nx", c.output.phase_grid_nx);
    read(o, "output", "phase_grid_nv", c.output.phase_grid_nv);
    read(o, "output", "vmax_factor", c.output.vmax_factor);
  }
  if (root.contains("diagnostics")) {
    const json& o = root.at("diagnostics");
    reject_unknown(o, "diagnostics",
                   {"alpha0", "calibrate_alpha0", "calibration_states", "seed"});
    read(o, "diagnostics", "alpha0", c.diagnostics.alpha0);
    read(o, "diagnostics", "calibrate_alpha0", c.diagnostics.calibrate_alpha0);
    read(o, "diagnostics", "calibration_states", c.diagnostics.calibration_states);
    read(o, "diagnostics", "seed", c.diagnostics.seed);
  }
  if (root.contains("convergence")) {
    const json& o = root.at("convergence");
    reject_unknown(o, "convergence", {"levels", "dt"});
    read(o, "convergence", "levels", c.convergence.levels);
    read(o, "convergence", "dt", c.convergence.dt);
  }
  if (root.contains("sweep")) {
    const json& o = root.at("sweep");
    reject_unknown(o, "sweep", {"tau0_list"});
    read(o, "sweep", "tau0_list", c.sweep.tau0_list);
  }
  if (root.contains("battery")) {
    const json& o = root.at("battery");
    reject_unknown(o, "battery", {"seed", "trials"});
    read(o, "battery", "seed", c.battery.seed);
    read(o, "battery", "trials", c.battery.trials);
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("config: cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

std::string RunConfig::serialize() const {
  json root;
  root["experiment"] = experiment_name(experiment);
  root["model"] = {{"T0", model.T0},     {"tau0", model.tau0}, {"rho_inf", model.rho_inf},
                   {"NH", model.NH},     {"m", model.m},       {"L", model.L},
                   {"Nx", model.Nx},     {"nodes", model.nodes}};
  root["ic"] = {{"kind", ic.kind}, {"delta", ic.delta}};
  root["transport"] = {{"flux", transport.flux}};
  root["poisson"] = {{"method", poisson.method}, {"ldg_flux", poisson.ldg_flux}};
  root["time"] = {{"dt", time.dt},
                  {"t_end", time.t_end},
                  {"picard_tol", time.picard_tol},
                  {"picard_max_iters", time.picard_max_iters}};
  root["filter"] = {{"enabled", filter.enabled},
                    {"alpha", filter.alpha},
                    {"order", filter.order},
                    {"cut", filter.cut},
                    {"hard_cut", filter.hard_cut}};
  root["output"] = {{"dir", output.dir},
                    {"stride", output.stride},
                    {"snapshot_times", output.snapshot_times},
                    {"phase_grid_nx", output.phase_grid_nx},
                    {"phase_grid_nv", output.phase_grid_nv},
                    {"vmax_factor", output.vmax_factor}};
  root["diagnostics"] = {{"alpha0", diagnostics.alpha0},
                         {"calibrate_alpha0", diagnostics.calibrate_alpha0},
                         {"calibration_states", diagnostics.calibration_states},
                         {"seed", diagnostics.seed}};
  root["convergence"] = {{"levels", convergence.levels}, {"dt", convergence.dt}};
  root["sweep"] = {{"tau0_list", sweep.tau0_list}};
  root["battery"] = {{"seed", battery.seed}, {"trials", battery.trials}};
  return root.dump(2);
}

std::string RunConfig::fingerprint() const {
  const std::string text = serialize();
  std::uint64_t hash = 1469598103934665603ULL;
  for (const char ch : text) {
    hash ^= static_cast<unsigned char>(ch);
    hash *= 1099511628211ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

void RunConfig::apply_env_overrides() {
  json root = json::parse(serialize());
  for (char** env = environ; *env != nullptr; ++env) {
    const std::string entry(*env);
    if (entry.rfind("VPFP_", 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    std::string key = entry.substr(5, eq - 5);
    const std::string value = entry.substr(eq + 1);
    for (char& ch : key) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    const auto sep = key.find('_');
    json parsed;
    try {
      parsed = json::parse(value);
    } catch (const json::exception&) {
      parsed = value;  // bare strings need no quoting
    }
    if (sep == std::string::npos) {
      if (!root.contains(key)) fail(key, "unknown key (from environment)");
      root[key] = parsed;
    } else {
      const std::string section = key.substr(0, sep);
      const std::string field = key.substr(sep + 1);
      if (!root.contains(section) || !root.at(section).contains(field))
        fail(section + "." + field, "unknown key (from environment)");
      root[section][field] = parsed;
    }
  }
  *this = parse(root.dump());
}

void RunConfig::validate() const {
  if (!(model.T0 > 0.0)) fail("model.T0", "must be positive, got " + format_double(model.T0));
  if (!(model.tau0 > 0.0)) fail("model.tau0", "must be positive");
  if (!(model.rho_inf > 0.0)) fail("model.rho_inf", "must be positive");
  if (model.NH < 1) fail("model.NH", "must be at least 1");
  if (model.m < 0) fail("model.m", "must be nonnegative");
  if (!(model.L > 0.0)) fail("model.L", "must be positive");
  if (model.nodes.empty() && model.Nx < 2) fail("model.Nx", "must be at least 2");
  if (ic.kind != "landau" && ic.kind != "equilibrium")
    fail("ic.kind", "expected landau or equilibrium, got '" + ic.kind + "'");
  if (transport.flux != "minus_plus" && transport.flux != "plus_minus")
    fail("transport.flux", "expected minus_plus or plus_minus");
  if (poisson.method != "ldg" && poisson.method != "rt")
    fail("poisson.method", "expected ldg or rt");
  if (poisson.ldg_flux != "minus_plus" && poisson.ldg_flux != "plus_minus")
    fail("poisson.ldg_flux", "expected minus_plus or plus_minus");
  if (!(time.dt > 0.0)) fail("time.dt", "must be positive");
  if (time.t_end < 0.0) fail("time.t_end", "must be nonnegative");
  if (!(time.picard_tol > 0.0)) fail("time.picard_tol", "must be positive");
  if (time.picard_max_iters < 1) fail("time.picard_max_iters", "must be at least 1");
  if (filter.order < 2 || filter.order % 2 != 0)
    fail("filter.order", "must be a positive even integer");
  if (!(filter.cut > 0.0 && filter.cut <= 1.0)) fail("filter.cut", "must lie in (0, 1]");
  if (output.stride < 1) fail("output.stride", "must be at least 1");
  if (output.phase_grid_nx < 2 || output.phase_grid_nv < 2)
    fail("output.phase_grid_nx/nv", "must be at least 2");
  if (!(output.vmax_factor > 0.0)) fail("output.vmax_factor", "must be positive");
  if (diagnostics.calibration_states < 1) fail("diagnostics.calibration_states", "must be >= 1");
  for (const auto& level : convergence.levels)
    if (level[0] < 2 || level[1] < 1) fail("convergence.levels", "levels must have Nx>=2, NH>=1");
  if (!(convergence.dt > 0.0)) fail("convergence.dt", "must be positive");
  if (battery.trials < 1) fail("battery.trials", "must be at least 1");
}

MeshPtr RunConfig::make_mesh() const {
  if (!model.nodes.empty()) return make_mesh_from_nodes(model.nodes, model.L);
  return make_uniform_mesh(model.L, model.Nx);
}

ModelParams RunConfig::make_params(MeshPtr mesh) const {
  ModelParams p;
  p.T0 = model.T0;
  p.tau0 = model.tau0;
  p.rho_inf = model.rho_inf;
  p.NH = model.NH;
  p.degree = model.m;
  p.mesh = std::move(mesh);
  return p;
}

Flux RunConfig::transport_flux() const {
  return transport.flux == "minus_plus" ? Flux::minus_plus : Flux::plus_minus;
}

PoissonMethod RunConfig::poisson_method() const {
  return poisson.method == "ldg" ? PoissonMethod::ldg : PoissonMethod::rt;
}

Flux RunConfig::ldg_flux() const {
  return poisson.ldg_flux == "minus_plus" ? Flux::minus_plus : Flux::plus_minus;
}

TimeStepperConfig RunConfig::make_time_config(bool linearized) const {
  TimeStepperConfig t;
  t.dt = time.dt;
  t.picard_tol = time.picard_tol;
  t.picard_max_iters = time.picard_max_iters;
  t.filter_enabled = filter.enabled;
  t.filter_alpha = filter.alpha;
  t.filter_order = filter.order;
  t.filter_cut = filter.cut;
  t.filter_hard_cut = filter.hard_cut;
  t.linearized = linearized;
  return t;
}

}  // namespace vpfp
