#include "htc/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace htc {

namespace {

using nlohmann::json;

class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json* raw(const std::string& key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  double number(const std::string& key, double fallback) {
    const json* v = raw(key);
    if (!v) return fallback;
    if (!v->is_number()) throw ConfigError(where(key) + "expected a number");
    const double d = v->get<double>();
    if (!std::isfinite(d)) throw ConfigError(where(key) + "must be finite");
    return d;
  }

  int integer(const std::string& key, int fallback) {
    const json* v = raw(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) throw ConfigError(where(key) + "expected an integer");
    return v->get<int>();
  }

  std::uint64_t uint64(const std::string& key, std::uint64_t fallback) {
    const json* v = raw(key);
    if (!v) return fallback;
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0))
      throw ConfigError(where(key) + "expected a non-negative integer");
    return v->get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = raw(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError(where(key) + "expected true or false");
    return v->get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const json* v = raw(key);
    if (!v) return fallback;
    if (!v->is_string()) throw ConfigError(where(key) + "expected a string");
    return v->get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    const json* v = raw(key);
    if (!v) return {};
    if (!v->is_array()) throw ConfigError(where(key) + "expected an array of numbers");
    std::vector<double> out;
    for (const json& e : *v) {
      if (!e.is_number()) throw ConfigError(where(key) + "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  Section child(const std::string& key) {
    const json* v = raw(key);
    static const json empty = json::object();
    return Section(v ? *v : empty, path_.empty() ? key : path_ + "." + key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError(where(it.key()) + "unknown key");
  }

 private:
  std::string where(const std::string& key = "") const {
    std::string p = path_;
    if (!key.empty()) p = p.empty() ? key : p + "." + key;
    return "config" + (p.empty() ? std::string() : " '" + p + "'") + ": ";
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

Engine engine_from(const std::string& s, const std::string& where) {
  try {
    return parse_engine(s);
  } catch (const InvalidArgument& e) {
    throw ConfigError("config '" + where + "': " + e.what());
  }
}

}  // namespace

std::vector<double> RunConfig::sample_times() const {
  const double period = model.period();
  std::vector<double> t;
  if (!sample_times_periods.empty()) {
    for (double x : sample_times_periods) t.push_back(x * period);
    return t;
  }
  if (n_samples == 1) return {t_final_periods * period};
  for (int j = 0; j < n_samples; ++j) t.push_back(t_final_periods * period * j / (n_samples - 1));
  return t;
}

EnsembleConfig RunConfig::ensemble_config(int workers) const {
  EnsembleConfig c;
  c.n_realizations = n_realizations;
  c.master_seed = master_seed;
  c.engine = engine;
  c.spec = initial;
  c.sample_times = sample_times();
  c.evolution.dt = model.period() / steps_per_period;
  c.evolution.t_final = c.sample_times.back();
  c.evolution.chi_max = chi_max;
  c.evolution.svd_cutoff = svd_cutoff;
  c.evolution.truncation_alarm = truncation_alarm;
  c.evolution.throw_on_alarm = throw_on_alarm;
  c.evolution.trotter_order = trotter_order.value_or(2);
  c.dense = dense;
  c.semiclassical.n_traj = n_traj;
  c.semiclassical.dt = model.period() / semiclassical_steps_per_period;
  c.semiclassical.chunk = trajectory_chunk;
  c.semiclassical.grid = grid;
  c.weyl_threshold = weyl_threshold;
  c.workers = workers;
  return c;
}

SweepConfig RunConfig::sweep_config() const {
  SweepConfig s;
  s.axis = sweep_axis;
  s.values = sweep_values;
  s.compare = sweep_compare;
  s.grid = grid;
  return s;
}

void RunConfig::validate() const {
  try {
    model.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("config 'model': ") + e.what());
  }
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError("config: " + msg);
  };
  require(g_c_meV > 0.0, "g_c_meV must be positive");
  require(initial.kind == InitialStateSpec::Kind::CavityExcited ||
              (initial.index >= 1 && initial.index <= model.n_molecules),
          "initial_state.index must be within 1..N");
  require(t_final_periods > 0.0, "evolution.t_final_periods must be positive");
  require(n_samples >= 1, "evolution.n_samples must be at least 1");
  for (std::size_t j = 0; j < sample_times_periods.size(); ++j) {
    require(sample_times_periods[j] >= 0.0, "evolution.sample_times_periods must be non-negative");
    require(j == 0 || sample_times_periods[j] >= sample_times_periods[j - 1], "evolution.sample_times_periods must ascend");
  }
  require(steps_per_period >= 1, "evolution.steps_per_period must be positive");
  require(chi_max >= 1, "evolution.chi_max must be positive");
  require(svd_cutoff >= 0.0, "evolution.svd_cutoff must be non-negative");
  require(truncation_alarm > 0.0, "evolution.truncation_alarm must be positive");
  require(!trotter_order || *trotter_order == 2 || *trotter_order == 4, "evolution.trotter_order must be 2 or 4");
  require(n_traj >= 1, "semiclassical.n_traj must be positive");
  require(semiclassical_steps_per_period >= 1, "semiclassical.steps_per_period must be positive");
  require(weyl_threshold >= 0.0, "semiclassical.weyl_threshold must be non-negative");
  require(trajectory_chunk >= 1, "semiclassical.chunk must be positive");
  require(n_realizations >= 1, "ensemble.n_realizations must be positive");
  require(sweep_axis == SweepAxis::None || !sweep_values.empty(), "sweep.values must be non-empty");
  require(dense.dimension_limit >= 1, "dense.dimension_limit must be positive");
  require(grid.nx >= 2 && grid.np >= 2 && grid.x_max > grid.x_min && grid.p_max > grid.p_min, "analysis.grid is degenerate");
  require(oracle_tolerance > 0.0, "oracle.tolerance must be positive");
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  RunConfig c;
  Section root(j, "");
  const std::string units = root.string("units", "g_c");
  if (units != "g_c" && units != "meV") throw ConfigError("config 'units': expected \"g_c\" or \"meV\"");
  c.g_c_meV = root.number("g_c_meV", c.g_c_meV);
  const double scale = units == "meV" ? 1.0 / c.g_c_meV : 1.0;

  {
    Section m = root.child("model");
    c.model.n_molecules = m.integer("n_molecules", c.model.n_molecules);
    c.model.g_collective = m.number("g_c", c.model.g_collective / scale) * scale;
    c.model.nu = m.number("nu", c.model.nu / scale) * scale;
    c.model.huang_rhys_lambda = m.number("lambda", c.model.huang_rhys_lambda);
    c.model.disorder_w = m.number("disorder_w", c.model.disorder_w / scale) * scale;
    c.model.detuning = m.number("detuning", c.model.detuning / scale) * scale;
    c.model.n_max_vib = m.integer("n_max_vib", c.model.n_max_vib);
    c.model.n_max_cav = m.integer("n_max_cav", c.model.n_max_cav);
    const std::string dist = m.string("disorder", "normal");
    if (dist == "normal") c.model.distribution = DisorderDistribution::Normal;
    else if (dist == "box") c.model.distribution = DisorderDistribution::Box;
    else throw ConfigError("config 'model.disorder': expected \"normal\" or \"box\"");
    m.finish();
  }
  {
    Section s = root.child("initial_state");
    const std::string kind = s.string("kind", "molecule");
    const int index = s.integer("index", 1);
    if (kind == "molecule") c.initial = InitialStateSpec::molecule(index);
    else if (kind == "cavity") c.initial = InitialStateSpec::cavity();
    else throw ConfigError("config 'initial_state.kind': expected \"molecule\" or \"cavity\"");
    s.finish();
  }
  {
    Section e = root.child("evolution");
    c.t_final_periods = e.number("t_final_periods", c.t_final_periods);
    c.n_samples = e.integer("n_samples", c.n_samples);
    c.sample_times_periods = e.numbers("sample_times_periods");
    c.steps_per_period = e.integer("steps_per_period", c.steps_per_period);
    c.chi_max = e.integer("chi_max", c.chi_max);
    c.svd_cutoff = e.number("svd_cutoff", c.svd_cutoff);
    c.truncation_alarm = e.number("truncation_alarm", c.truncation_alarm);
    const std::string policy = e.string("alarm_policy", "throw");
    if (policy != "throw" && policy != "record") throw ConfigError("config 'evolution.alarm_policy': expected \"throw\" or \"record\"");
    c.throw_on_alarm = policy == "throw";
    if (e.has("trotter_order")) c.trotter_order = e.integer("trotter_order", 2);
    e.finish();
  }
  {
    Section s = root.child("semiclassical");
    c.n_traj = s.integer("n_traj", c.n_traj);
    c.semiclassical_steps_per_period = s.integer("steps_per_period", c.semiclassical_steps_per_period);
    c.weyl_threshold = s.number("weyl_threshold", c.weyl_threshold);
    c.trajectory_chunk = s.integer("chunk", c.trajectory_chunk);
    s.finish();
  }
  {
    Section s = root.child("ensemble");
    c.engine = engine_from(s.string("engine", "mps"), "ensemble.engine");
    c.n_realizations = s.integer("n_realizations", c.n_realizations);
    c.master_seed = s.uint64("master_seed", c.master_seed);
    s.finish();
  }
  if (root.has("sweep")) {
    Section s = root.child("sweep");
    const std::string axis = s.string("axis", "n");
    if (axis == "n") c.sweep_axis = SweepAxis::MoleculeNumber;
    else if (axis == "w") c.sweep_axis = SweepAxis::DisorderStrength;
    else throw ConfigError("config 'sweep.axis': expected \"n\" or \"w\"");
    c.sweep_values = s.numbers("values");
    if (c.sweep_axis == SweepAxis::DisorderStrength)
      for (double& v : c.sweep_values) v *= scale;
    const std::string cmp = s.string("compare", "");
    if (!cmp.empty()) c.sweep_compare = engine_from(cmp, "sweep.compare");
    s.finish();
  } else {
    root.raw("sweep");
  }
  {
    Section d = root.child("dense");
    c.dense.dimension_limit = d.integer("dimension_limit", static_cast<int>(c.dense.dimension_limit));
    c.dense.single_excitation_block = d.boolean("single_excitation_block", c.dense.single_excitation_block);
    d.finish();
  }
  {
    Section a = root.child("analysis");
    Section g = a.child("grid");
    c.grid.x_min = c.grid.p_min = g.number("min", c.grid.x_min);
    c.grid.x_max = c.grid.p_max = g.number("max", c.grid.x_max);
    c.grid.nx = c.grid.np = g.integer("points", c.grid.nx);
    g.finish();
    a.finish();
  }
  {
    Section o = root.child("oracle");
    c.oracle_tolerance = o.number("tolerance", c.oracle_tolerance);
    o.finish();
  }
  root.finish();
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  json j;
  j["units"] = "g_c";
  j["g_c_meV"] = c.g_c_meV;
  j["model"] = {{"n_molecules", c.model.n_molecules},
                {"g_c", c.model.g_collective},
                {"nu", c.model.nu},
                {"lambda", c.model.huang_rhys_lambda},
                {"disorder_w", c.model.disorder_w},
                {"detuning", c.model.detuning},
                {"n_max_vib", c.model.n_max_vib},
                {"n_max_cav", c.model.n_max_cav},
                {"disorder", c.model.distribution == DisorderDistribution::Box ? "box" : "normal"}};
  j["initial_state"] = {{"kind", c.initial.kind == InitialStateSpec::Kind::CavityExcited ? "cavity" : "molecule"},
                        {"index", c.initial.index}};
  json ev = {{"t_final_periods", c.t_final_periods},
             {"n_samples", c.n_samples},
             {"steps_per_period", c.steps_per_period},
             {"chi_max", c.chi_max},
             {"svd_cutoff", c.svd_cutoff},
             {"truncation_alarm", c.truncation_alarm},
             {"alarm_policy", c.throw_on_alarm ? "throw" : "record"}};
  if (!c.sample_times_periods.empty()) ev["sample_times_periods"] = c.sample_times_periods;
  if (c.trotter_order) ev["trotter_order"] = *c.trotter_order;
  j["evolution"] = ev;
  j["semiclassical"] = {{"n_traj", c.n_traj},
                        {"steps_per_period", c.semiclassical_steps_per_period},
                        {"weyl_threshold", c.weyl_threshold},
                        {"chunk", c.trajectory_chunk}};
  j["ensemble"] = {{"engine", engine_name(c.engine)}, {"n_realizations", c.n_realizations}, {"master_seed", c.master_seed}};
  if (c.sweep_axis != SweepAxis::None) {
    json s = {{"axis", c.sweep_axis == SweepAxis::MoleculeNumber ? "n" : "w"}, {"values", c.sweep_values}};
    if (c.sweep_compare) s["compare"] = engine_name(*c.sweep_compare);
    j["sweep"] = s;
  }
  j["dense"] = {{"dimension_limit", c.dense.dimension_limit}, {"single_excitation_block", c.dense.single_excitation_block}};
  j["analysis"] = {{"grid", {{"min", c.grid.x_min}, {"max", c.grid.x_max}, {"points", c.grid.nx}}}};
  j["oracle"] = {{"tolerance", c.oracle_tolerance}};
  return j.dump(2);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const RunConfig& c) { return fnv1a_hex(serialize_config(c)); }

}  // namespace htc
