#include "thermodeco/io/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "thermodeco/io/units.hpp"

namespace thermodeco::io {

namespace {

using nlohmann::json;

std::string type_name(const json& v) {
  if (v.is_string()) return "string \"" + v.get<std::string>() + "\"";
  return v.type_name();
}

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ConfigError("config: " + key + ": " + what);
}

[[noreturn]] void wrong_type(const std::string& key, const std::string& expected, const json& got) {
  fail(key, "expected " + expected + ", got " + type_name(got));
}

// A JSON object with its dotted path; every key read is remembered so that
// leftovers can be reported as unknown.
class Block {
 public:
  Block(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) wrong_type(path_, "object", j_);
  }

  std::string key(const std::string& name) const { return path_.empty() ? name : path_ + "." + name; }

  const json* find(const std::string& name) {
    seen_.insert(name);
    const auto it = j_.find(name);
    return it == j_.end() ? nullptr : &*it;
  }

  const json& require(const std::string& name) {
    const json* v = find(name);
    if (!v) fail(key(name), "missing required key");
    return *v;
  }

  bool has(const std::string& name) const { return j_.contains(name); }

  double quantity_value(const json& v, const std::string& k, Dimension dim) const {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      try {
        return parse_quantity(v.get<std::string>(), dim);
      } catch (const UnitError& e) {
        fail(k, e.what());
      }
    }
    wrong_type(k, describe(dim), v);
  }

  double quantity(const std::string& name, Dimension dim) {
    return quantity_value(require(name), key(name), dim);
  }

  double quantity_or(const std::string& name, Dimension dim, double fallback) {
    const json* v = find(name);
    return v ? quantity_value(*v, key(name), dim) : fallback;
  }

  std::vector<double> quantity_list(const std::string& name, Dimension dim) {
    const json& v = require(name);
    if (!v.is_array() || v.empty()) wrong_type(key(name), "non-empty array of " + describe(dim), v);
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(quantity_value(v[i], key(name) + "[" + std::to_string(i) + "]", dim));
    }
    return out;
  }

  bool boolean_or(const std::string& name, bool fallback) {
    const json* v = find(name);
    if (!v) return fallback;
    if (!v->is_boolean()) wrong_type(key(name), "boolean", *v);
    return v->get<bool>();
  }

  std::uint64_t integer_or(const std::string& name, std::uint64_t fallback, std::uint64_t min = 0) {
    const json* v = find(name);
    if (!v) return fallback;
    if (!v->is_number_unsigned()) wrong_type(key(name), "non-negative integer", *v);
    const auto n = v->get<std::uint64_t>();
    if (n < min) fail(key(name), "must be at least " + std::to_string(min));
    return n;
  }

  std::string string_or(const std::string& name, const std::string& fallback) {
    const json* v = find(name);
    if (!v) return fallback;
    if (!v->is_string()) wrong_type(key(name), "string", *v);
    return v->get<std::string>();
  }

  Block child(const std::string& name) { return Block(require(name), key(name)); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(key(it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require_positive(const std::string& key, double v, bool allow_infinite = false) {
  if (!(v > 0.0) || (!allow_infinite && !std::isfinite(v))) {
    fail(key, allow_infinite ? "must be positive" : "must be positive and finite");
  }
}

std::vector<double> temperature_range(Block& b) {
  const double from = b.quantity("from", Dimension::temperature);
  const double to = b.quantity("to", Dimension::temperature);
  const auto count = static_cast<std::size_t>(b.integer_or("count", 2, 1));
  const std::string spacing = b.string_or("spacing", "log");
  if (spacing != "log" && spacing != "linear") {
    wrong_type(b.key("spacing"), "\"log\" or \"linear\"", json(spacing));
  }
  b.finish();
  require_positive(b.key("from"), from);
  require_positive(b.key("to"), to);
  if (!(to >= from)) fail(b.key("to"), "must not be below 'from'");
  if (count == 1) return {from};
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(count - 1);
    out[i] = spacing == "log" ? from * std::pow(to / from, f) : from + (to - from) * f;
  }
  out.front() = from;
  out.back() = to;
  return out;
}

void sort_unique(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

ParticleConfig read_particle(Block b) {
  ParticleConfig p;
  p.effective_area = b.quantity("effective_area", Dimension::area);
  require_positive(b.key("effective_area"), p.effective_area);
  p.heat_capacity = b.quantity_or("heat_capacity", Dimension::heat_capacity, kInfiniteHeatCapacity);
  require_positive(b.key("heat_capacity"), p.heat_capacity, true);
  p.mass = b.quantity("mass", Dimension::mass);
  require_positive(b.key("mass"), p.mass);

  const bool single = b.has("initial_temperature");
  const bool several = b.has("temperatures");
  if (single && several) fail(b.key("temperatures"), "give either initial_temperature or temperatures");
  if (single) {
    p.temperatures = {b.quantity("initial_temperature", Dimension::temperature)};
  } else if (several) {
    const json& t = *b.find("temperatures");
    if (t.is_object()) {
      Block range(t, b.key("temperatures"));
      p.temperatures = temperature_range(range);
    } else {
      p.temperatures = b.quantity_list("temperatures", Dimension::temperature);
    }
  }
  for (double t : p.temperatures) {
    require_positive(b.key(single ? "initial_temperature" : "temperatures"), t);
  }
  sort_unique(p.temperatures);
  b.finish();
  return p;
}

GeometryConfig read_geometry(Block b) {
  GeometryConfig g;
  const bool single = b.has("slit_separation");
  const bool several = b.has("slit_separations");
  if (single && several) fail(b.key("slit_separations"), "give either slit_separation or slit_separations");
  if (single) {
    g.separations = {b.quantity("slit_separation", Dimension::length)};
  } else if (several) {
    g.separations = b.quantity_list("slit_separations", Dimension::length);
  }
  for (double d : g.separations) require_positive(b.key(single ? "slit_separation" : "slit_separations"), d);
  sort_unique(g.separations);
  g.flight_distance = b.quantity("flight_distance", Dimension::length);
  require_positive(b.key("flight_distance"), g.flight_distance);
  g.velocity = b.quantity("velocity", Dimension::velocity);
  require_positive(b.key("velocity"), g.velocity);
  if (b.has("coherence_slit_distance")) {
    g.coherence_slit_distance = b.quantity("coherence_slit_distance", Dimension::length);
    require_positive(b.key("coherence_slit_distance"), *g.coherence_slit_distance);
  }
  b.finish();
  return g;
}

EmissionConfig read_emission(Block b, const std::filesystem::path& base_dir) {
  EmissionConfig e;
  const std::string model = b.string_or("model", "greybody");
  if (model == "greybody") {
    e.kind = EmissionConfig::Kind::greybody;
  } else if (model == "spectrum") {
    e.kind = EmissionConfig::Kind::spectrum;
    const json& file = b.require("file");
    if (!file.is_string()) wrong_type(b.key("file"), "path string", file);
    std::filesystem::path path = file.get<std::string>();
    e.spectrum_file = path.is_absolute() ? path : base_dir / path;
    try {
      e.table = std::make_shared<const SpectrumTable>(SpectrumTable::load(e.spectrum_file));
    } catch (const std::exception& ex) {
      fail(b.key("file"), ex.what());
    }
  } else {
    wrong_type(b.key("model"), "\"greybody\" or \"spectrum\"", json(model));
  }
  e.heat_capacity_term = b.boolean_or("heat_capacity_term", true);
  b.finish();
  return e;
}

TauSweepOptions read_tau_sweep(Block& b, const RunConfig& c) {
  TauSweepOptions o;
  o.max_time = b.quantity_or("max_time", Dimension::time, o.max_time);
  require_positive(b.key("max_time"), o.max_time);
  if (c.particle.temperatures.empty()) fail("particle.temperatures", "tau-sweep needs a temperature range");
  if (c.geometry.separations.empty()) fail("geometry.slit_separations", "tau-sweep needs slit separations");
  return o;
}

PatternOptions read_pattern(Block& b, const RunConfig& c) {
  PatternOptions o;
  if (b.has("temperature")) {
    o.temperature = b.quantity("temperature", Dimension::temperature);
    if (!(*o.temperature >= 0.0) || !std::isfinite(*o.temperature)) {
      fail(b.key("temperature"), "must be finite and >= 0");
    }
  } else if (c.particle.temperatures.size() != 1) {
    fail("particle.initial_temperature", "pattern needs a single temperature (or task.temperature)");
  }
  if (c.geometry.separations.size() != 1) {
    fail("geometry.slit_separation", "pattern needs exactly one slit separation");
  }
  o.slit_width = b.quantity("slit_width", Dimension::length);
  require_positive(b.key("slit_width"), o.slit_width);
  o.slit_count = static_cast<std::size_t>(b.integer_or("slit_count", o.slit_count, 2));
  o.screen_periods = b.quantity_or("screen_periods", Dimension::dimensionless, o.screen_periods);
  require_positive(b.key("screen_periods"), o.screen_periods);
  o.samples_per_period =
      static_cast<std::size_t>(b.integer_or("samples_per_period", o.samples_per_period, 1));
  o.window_periods = b.quantity_or("window_periods", Dimension::dimensionless, o.window_periods);
  require_positive(b.key("window_periods"), o.window_periods);
  o.cooling = b.boolean_or("cooling", o.cooling);
  if (b.has("velocity_spread")) {
    Block v = b.child("velocity_spread");
    VelocitySpread s;
    s.relative_width = v.quantity("relative_width", Dimension::dimensionless);
    if (!(s.relative_width >= 0.0 && s.relative_width < 0.25)) {
      fail(v.key("relative_width"), "must lie in [0, 0.25)");
    }
    s.points = static_cast<std::size_t>(v.integer_or("points", 41, 1));
    v.finish();
    o.velocity_spread = s;
  }
  return o;
}

MonteCarloOptions read_montecarlo(Block& b, const RunConfig& c) {
  MonteCarloOptions o;
  o.trials = static_cast<std::size_t>(b.integer_or("trials", o.trials, 100));
  o.seed = b.integer_or("seed", o.seed);
  const std::string mode = b.string_or("mode", "poisson_cooling");
  if (mode == "poisson_cooling") {
    o.mode = EmissionMode::poisson_cooling;
  } else if (mode == "microcanonical") {
    o.mode = EmissionMode::microcanonical;
  } else {
    wrong_type(b.key("mode"), "\"poisson_cooling\" or \"microcanonical\"", json(mode));
  }
  const double default_tof = c.geometry.flight_distance / c.geometry.velocity;
  if (b.has("points")) {
    const json& pts = *b.find("points");
    if (!pts.is_array() || pts.empty()) wrong_type(b.key("points"), "non-empty array of objects", pts);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      Block p(pts[i], b.key("points") + "[" + std::to_string(i) + "]");
      MonteCarloPoint m{};
      m.temperature = p.quantity("temperature", Dimension::temperature);
      m.separation = p.quantity("slit_separation", Dimension::length);
      m.time_of_flight = p.quantity_or("time_of_flight", Dimension::time, default_tof);
      require_positive(p.key("temperature"), m.temperature);
      require_positive(p.key("slit_separation"), m.separation);
      require_positive(p.key("time_of_flight"), m.time_of_flight);
      p.finish();
      o.points.push_back(m);
    }
  } else {
    if (c.particle.temperatures.empty() || c.geometry.separations.empty()) {
      fail(b.key("points"), "missing; give points or particle temperatures and slit separations");
    }
    for (double t : c.particle.temperatures) {
      for (double d : c.geometry.separations) o.points.push_back({t, d, default_tof});
    }
  }
  return o;
}

CoolingOptions read_cooling(Block& b, const RunConfig& c) {
  CoolingOptions o;
  o.duration = b.quantity("duration", Dimension::time);
  require_positive(b.key("duration"), o.duration);
  o.samples = static_cast<std::size_t>(b.integer_or("samples", o.samples, 2));
  const std::string spacing = b.string_or("spacing", "linear");
  if (spacing != "log" && spacing != "linear") {
    wrong_type(b.key("spacing"), "\"log\" or \"linear\"", json(spacing));
  }
  o.log_spacing = spacing == "log";
  if (c.particle.temperatures.size() != 1) {
    fail("particle.initial_temperature", "cooling needs a single initial temperature");
  }
  return o;
}

}  // namespace

ParticleModel ParticleConfig::model(double initial_temperature) const {
  ParticleModel p;
  p.effective_area = effective_area;
  p.heat_capacity = heat_capacity;
  p.mass = mass;
  p.initial_temperature = initial_temperature;
  return p;
}

BeamGeometry GeometryConfig::geometry(double separation, double mass) const {
  BeamGeometry g;
  g.slit_separation = separation;
  g.flight_distance = flight_distance;
  g.longitudinal_velocity = velocity;
  g.mass = mass;
  g.coherence_slit_distance = coherence_slit_distance;
  return g;
}

EmissionModel EmissionConfig::model(const ParticleModel& particle) const {
  EmissionModel m = kind == Kind::greybody ? EmissionModel::greybody(particle)
                                           : EmissionModel::tabulated(particle, *table);
  return m.with_heat_capacity_term(heat_capacity_term);
}

const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names{"tau-sweep", "pattern", "montecarlo", "cooling"};
  return names;
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig parse_config(const std::string& text, const std::string& task,
                       const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  RunConfig c;
  c.canonical = root.dump();
  c.hash = fnv1a_hex(c.canonical);

  Block top(root, "");
  c.particle = read_particle(top.child("particle"));
  c.geometry = read_geometry(top.child("geometry"));
  if (top.has("emission")) {
    c.emission = read_emission(top.child("emission"), base_dir);
  } else {
    top.find("emission");
  }

  Block t = top.child("task");
  const std::string named = t.string_or("name", "");
  c.task = task.empty() ? named : task;
  if (c.task.empty()) fail("task.name", "missing; name the task here or on the command line");
  if (!named.empty() && named != c.task) {
    fail("task.name", "config is for task '" + named + "' but '" + c.task + "' was requested");
  }
  if (c.task == "tau-sweep") {
    c.options = read_tau_sweep(t, c);
  } else if (c.task == "pattern") {
    c.options = read_pattern(t, c);
  } else if (c.task == "montecarlo") {
    c.options = read_montecarlo(t, c);
  } else if (c.task == "cooling") {
    c.options = read_cooling(t, c);
  } else {
    fail("task.name", "unknown task '" + c.task + "'; expected tau-sweep, pattern, montecarlo or cooling");
  }
  t.finish();

  if (top.has("output")) {
    Block o = top.child("output");
    const std::string dir = o.string_or("directory", ".");
    c.output.directory = std::filesystem::path(dir).is_absolute() ? std::filesystem::path(dir)
                                                                   : base_dir / dir;
    c.output.svg = o.boolean_or("svg", true);
    o.finish();
  } else {
    top.find("output");
    c.output.directory = base_dir;
  }
  top.finish();
  return c;
}

RunConfig load_config(const std::filesystem::path& path, const std::string& task) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), task, path.parent_path().empty() ? "." : path.parent_path());
}

}  // namespace thermodeco::io
