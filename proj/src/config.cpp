#include "spinxfer/config.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace spinxfer {

std::string to_string(ModelKind m) {
  switch (m) {
    case ModelKind::Exact: return "exact";
    case ModelKind::StepWise: return "stepwise";
    case ModelKind::Pulse: return "pulse";
  }
  return "?";
}

ModelKind parse_model(const std::string& s) {
  if (s == "exact") return ModelKind::Exact;
  if (s == "stepwise") return ModelKind::StepWise;
  if (s == "pulse") return ModelKind::Pulse;
  throw SpinxferError("unknown model '" + s + "' (expected stepwise, pulse or exact)");
}

namespace {

template <class T>
T parse(const std::string& key, const std::string& v) {
  try {
    return boost::lexical_cast<T>(v);
  } catch (const boost::bad_lexical_cast&) {
    throw SpinxferError("config key '" + key + "': cannot parse '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw SpinxferError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

std::string exact(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

struct Key {
  const char* name;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define NUM_KEY(NAME, FIELD, TYPE)                                                                       \
  Key {                                                                                                 \
    NAME, [](RunConfig& c, const std::string& k, const std::string& v) { c.FIELD = parse<TYPE>(k, v); }, \
        [](const RunConfig& c) { return exact(static_cast<double>(c.FIELD)); }                         \
  }
#define STR_KEY(NAME, FIELD)                                                                    \
  Key {                                                                                        \
    NAME, [](RunConfig& c, const std::string&, const std::string& v) { c.FIELD = v; },          \
        [](const RunConfig& c) { return c.FIELD; }                                             \
  }

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      Key{"geometry.kind", [](RunConfig& c, const std::string&, const std::string& v) { c.geometry.kind = parse_geometry_kind(v); },
          [](const RunConfig& c) { return to_string(c.geometry.kind); }},
      NUM_KEY("geometry.n", geometry.n, int),
      NUM_KEY("geometry.y0", geometry.y0, double),
      NUM_KEY("geometry.chi", geometry.chi, double),
      NUM_KEY("geometry.channels", geometry.channels, int),
      NUM_KEY("geometry.dy", geometry.dy, double),
      Key{"geometry.coupling_mode", [](RunConfig& c, const std::string&, const std::string& v) { c.mode = parse_coupling_mode(v); },
          [](const RunConfig& c) { return to_string(c.mode); }},
      NUM_KEY("partition.sender", sender, int),
      NUM_KEY("partition.extended_receiver", extended_receiver, int),
      NUM_KEY("partition.controlled", controlled, int),
      NUM_KEY("schedule.komega", komega, int),
      Key{"schedule.model", [](RunConfig& c, const std::string&, const std::string& v) { c.model = parse_model(v); },
          [](const RunConfig& c) { return to_string(c.model); }},
      NUM_KEY("schedule.trotter", trotter, int),
      NUM_KEY("schedule.eps", eps, double),
      NUM_KEY("solver.trials", trials, int),
      Key{"solver.seed", [](RunConfig& c, const std::string& k, const std::string& v) { c.seed = parse<std::uint64_t>(k, v); },
          [](const RunConfig& c) { return std::to_string(c.seed); }},
      NUM_KEY("solver.tol", tol, double),
      NUM_KEY("solver.max_iterations", max_iterations, int),
      NUM_KEY("solver.dedupe_tol", dedupe_tol, double),
      NUM_KEY("solver.restarts", restarts, int),
      NUM_KEY("solver.zero_tol", zero_tol, double),
      NUM_KEY("solver.cut_kmax", cut_kmax, int),
      NUM_KEY("tau.min", tau_min, double),
      NUM_KEY("tau.max", tau_max, double),
      NUM_KEY("tau.step", tau_step, double),
      Key{"tau.refine", [](RunConfig& c, const std::string& k, const std::string& v) { c.refine = parse_bool(k, v); },
          [](const RunConfig& c) { return std::string(c.refine ? "true" : "false"); }},
      STR_KEY("scan.protocol", protocol),
      STR_KEY("scan.param1", param1),
      NUM_KEY("scan.min1", min1, double),
      NUM_KEY("scan.max1", max1, double),
      NUM_KEY("scan.count1", count1, int),
      STR_KEY("scan.param2", param2),
      NUM_KEY("scan.min2", min2, double),
      NUM_KEY("scan.max2", max2, double),
      NUM_KEY("scan.count2", count2, int),
      NUM_KEY("analytic.n_min", n_min, int),
      NUM_KEY("analytic.n_max", n_max, int),
      NUM_KEY("analytic.n_step", n_step, int),
      NUM_KEY("analytic.points", points, int),
      NUM_KEY("analytic.window_exponent", window_exponent, double),
      Key{"restore.concurrence", [](RunConfig& c, const std::string& k, const std::string& v) { c.concurrence = parse_bool(k, v); },
          [](const RunConfig& c) { return std::string(c.concurrence ? "true" : "false"); }},
      STR_KEY("output.dir", out_dir),
  };
  return table;
}

#undef NUM_KEY
#undef STR_KEY

void assign(RunConfig& c, const std::string& key, const std::string& value) {
  for (const auto& k : keys())
    if (key == k.name) {
      k.set(c, key, value);
      return;
    }
  throw SpinxferError("unknown config key '" + key + "'");
}

std::vector<double> linspace(double lo, double hi, int count, const char* what) {
  if (count < 1) throw SpinxferError(std::string("config key '") + what + "': count must be at least 1");
  if (count > 1 && hi < lo) throw SpinxferError(std::string("config key '") + what + "': empty range");
  std::vector<double> v;
  for (int i = 0; i < count; ++i) v.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
  return v;
}

void validate(const RunConfig& c) {
  auto need = [](bool ok, const char* key, const char* what) {
    if (!ok) throw SpinxferError(std::string("config key '") + key + "': " + what);
  };
  need(c.geometry.n >= 2, "geometry.n", "must be at least 2");
  need(c.trials >= 1, "solver.trials", "must be at least 1");
  need(c.tol > 0.0, "solver.tol", "must be positive");
  need(c.max_iterations >= 1, "solver.max_iterations", "must be at least 1");
  need(c.restarts >= 0, "solver.restarts", "must be non-negative");
  need(c.tau_step > 0.0, "tau.step", "must be positive");
  need(c.tau_min >= 0.0, "tau.min", "must be non-negative");
  need(c.tau_max >= c.tau_min, "tau.max", "must not be below tau.min");
  need(c.komega >= 1, "schedule.komega", "must be at least 1");
  need(c.trotter >= 1, "schedule.trotter", "must be at least 1");
  need(c.eps > 0.0 && c.eps < 1.0, "schedule.eps", "must lie in (0, 1)");
  need(c.n_min >= 4, "analytic.n_min", "must be at least 4");
  need(c.n_max >= c.n_min, "analytic.n_max", "must not be below analytic.n_min");
  need(c.n_step >= 1, "analytic.n_step", "must be at least 1");
  need(c.points >= 2, "analytic.points", "must be at least 2");
  need(c.count1 >= 1, "scan.count1", "must be at least 1");
  need(c.count2 >= 1, "scan.count2", "must be at least 1");
  need(c.count1 == 1 || c.max1 >= c.min1, "scan.max1", "empty range");
  need(c.count2 == 1 || c.max2 >= c.min2, "scan.max2", "empty range");
  need(!c.out_dir.empty(), "output.dir", "must not be empty");
}

}  // namespace

Partition RunConfig::partition() const {
  return Partition::make(geometry.n, sender, extended_receiver, controlled);
}

std::vector<double> RunConfig::tau_grid() const {
  std::vector<double> g;
  const auto count = static_cast<long>(std::floor((tau_max - tau_min) / tau_step + 1e-9)) + 1;
  for (long i = 0; i < count; ++i) g.push_back(tau_min + tau_step * static_cast<double>(i));
  return g;
}

std::vector<double> RunConfig::values1() const { return linspace(min1, max1, count1, "scan.count1"); }
std::vector<double> RunConfig::values2() const { return linspace(min2, max2, count2, "scan.count2"); }

std::string RunConfig::canonical() const {
  std::string out;
  for (const auto& k : keys()) out += std::string(k.name) + "=" + k.get(*this) + "\n";
  return out;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  RunConfig c;
  if (!path.empty()) {
    boost::property_tree::ptree pt;
    try {
      boost::property_tree::read_ini(path, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw SpinxferError("cannot read config: " + std::string(e.what()));
    }
    for (const auto& [section, body] : pt) {
      if (body.empty()) throw SpinxferError("config key '" + section + "' is outside any section");
      for (const auto& [key, value] : body) assign(c, section + "." + key, value.data());
    }
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw SpinxferError("override '" + o + "' is not of the form section.key=value");
    assign(c, o.substr(0, eq), o.substr(eq + 1));
  }
  validate(c);
  return c;
}

}  // namespace spinxfer
