#pragma once

// Scenario configuration: a JSON document describing one experiment.
// Parsing validates every field up front and rejects unknown keys; to_json
// emits the canonical form with all defaults filled in.

#include <algorithm>
#include <cmath>
#include <functional>
#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "mesugaki/core.hpp"
#include "mesugaki/ito_check.hpp"
#include "mesugaki/mark_law.hpp"
#include "mesugaki/point_process.hpp"
#include "mesugaki/rng.hpp"
#include "mesugaki/sde.hpp"
#include "mesugaki/wakarase.hpp"

namespace mesugaki::cli {

inline constexpr std::uint64_t kDefaultSeed = 20240229;

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct LawConfig {
  std::string type = "point_mass";  // point_mass | uniform | power | exponential
  double z = 1.0;
  double lo = 0.0;
  double hi = 1.0;
  double exponent = 0.5;
  double rate = 1.0;
};

struct DrivingConfig {
  std::string type = "brownian";  // brownian | identity
  double step = 0.01;
  std::uint64_t seed = kDefaultSeed;
};

struct JumpConfig {
  double rate = 1.0;
  LawConfig marks;
};

struct ProcessConfig {
  std::string type;
  // poisson, compound_poisson
  double rate = 1.0;
  // hawkes, compound_hawkes
  double base = 1.0;
  double alpha = 1.0;
  double beta = 2.0;
  // cox, compound_cox
  std::string phi = "one_plus_sin2";  // one_plus_sin2 | identity | constant
  double phi_value = 1.0;
  std::optional<double> bound;
  DrivingConfig driving;
  // compound_*
  LawConfig marks;
  // discrete_state
  double birth = 1.0;
  double death = 1.0;
  // discrete_state, sde
  double x0 = 0.0;
  // sde: f(x) = drift[0] + drift[1] x, g(x) = diffusion[0] + diffusion[1] x
  std::vector<double> drift{0.0, 0.0};
  std::vector<double> diffusion{0.0, 0.0};
  std::optional<JumpConfig> jumps;
  std::string jump_map = "additive";  // additive: h = z; proportional: h = x z
  bool compensate = true;

  bool is_counting() const {
    return type == "poisson" || type == "cox" || type == "hawkes";
  }
  bool is_compound() const {
    return type == "compound_poisson" || type == "compound_hawkes" ||
           type == "compound_cox";
  }
  bool is_state_process() const { return type == "discrete_state" || type == "sde"; }
};

struct IntegrandConfig {
  std::string name = "mark";  // one | mark | mark_squared
  std::vector<double> windows;
};

struct ItoConfig {
  std::string test_function = "square";  // identity | square | log | exp
  std::vector<double> steps;
};

struct ValidateConfig {
  std::vector<double> checkpoints{0.25, 0.5, 1.0};  // fractions of the horizon
  std::string fixture = "none";                      // none | broken_compensator
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<std::string> formats{"csv", "json"};

  bool wants(const std::string& f) const {
    return std::find(formats.begin(), formats.end(), f) != formats.end();
  }
};

struct ScenarioConfig {
  std::string scenario = "scenario";
  ProcessConfig process;
  double horizon = 1.0;
  double step = 0.01;
  std::size_t paths = 1000;
  std::uint64_t seed = kDefaultSeed;
  int grid_depth = 6;
  IntegrandConfig integrand;
  ItoConfig ito;
  ValidateConfig validate;
  OutputConfig output;
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::string& where,
                           const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError(where.empty() ? key : where + "." + key, "unknown key");
    }
  }
}

inline std::string join(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

inline double get_number(const json& obj, const std::string& where,
                         const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(join(where, key), "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(join(where, key), "must be finite");
  return x;
}

inline std::string get_string(const json& obj, const std::string& where,
                              const std::string& key, const std::string& fallback,
                              const std::set<std::string>& choices) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(join(where, key), "must be a string");
  auto s = v.get<std::string>();
  if (!choices.empty() && !choices.count(s)) {
    std::string list;
    for (const auto& c : choices) list += (list.empty() ? "" : ", ") + c;
    throw ConfigError(join(where, key), "must be one of " + list);
  }
  return s;
}

inline std::uint64_t get_unsigned(const json& obj, const std::string& where,
                                  const std::string& key, std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw ConfigError(join(where, key), "must be a nonnegative integer");
  }
  return static_cast<std::uint64_t>(v.get<std::int64_t>());
}

inline std::vector<double> get_numbers(const json& obj, const std::string& where,
                                       const std::string& key,
                                       std::vector<double> fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_array()) throw ConfigError(join(where, key), "must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(join(where, key), "must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

inline const json& get_object(const json& obj, const std::string& where,
                              const std::string& key) {
  const auto& v = obj.at(key);
  if (!v.is_object()) throw ConfigError(join(where, key), "must be an object");
  return v;
}

inline void require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ConfigError(field, message);
}

inline LawConfig parse_law(const json& obj, const std::string& where) {
  LawConfig law;
  law.type = get_string(obj, where, "type", law.type,
                        {"point_mass", "uniform", "power", "exponential"});
  if (law.type == "point_mass") {
    reject_unknown(obj, where, {"type", "z"});
    law.z = get_number(obj, where, "z", law.z);
    require(law.z != 0.0, join(where, "z"), "must be nonzero");
  } else if (law.type == "uniform") {
    reject_unknown(obj, where, {"type", "lo", "hi"});
    law.lo = get_number(obj, where, "lo", law.lo);
    law.hi = get_number(obj, where, "hi", law.hi);
    require(law.hi > law.lo, join(where, "hi"), "must exceed lo");
  } else if (law.type == "power") {
    reject_unknown(obj, where, {"type", "exponent", "hi"});
    law.exponent = get_number(obj, where, "exponent", law.exponent);
    law.hi = get_number(obj, where, "hi", law.hi);
    require(law.exponent < 1.0, join(where, "exponent"),
            "must be < 1 (finite total mass)");
    require(law.hi > 0.0, join(where, "hi"), "must be positive");
  } else {
    reject_unknown(obj, where, {"type", "rate"});
    law.rate = get_number(obj, where, "rate", law.rate);
    require(law.rate > 0.0, join(where, "rate"), "must be positive");
  }
  return law;
}

inline json law_to_json(const LawConfig& law) {
  if (law.type == "point_mass") return {{"type", law.type}, {"z", law.z}};
  if (law.type == "uniform") return {{"type", law.type}, {"lo", law.lo}, {"hi", law.hi}};
  if (law.type == "power") {
    return {{"type", law.type}, {"exponent", law.exponent}, {"hi", law.hi}};
  }
  return {{"type", law.type}, {"rate", law.rate}};
}

inline DrivingConfig parse_driving(const json& obj, const std::string& where) {
  DrivingConfig d;
  reject_unknown(obj, where, {"type", "step", "seed"});
  d.type = get_string(obj, where, "type", d.type, {"brownian", "identity"});
  d.step = get_number(obj, where, "step", d.step);
  d.seed = get_unsigned(obj, where, "seed", d.seed);
  require(d.step > 0.0, join(where, "step"), "must be positive");
  return d;
}

inline void parse_cox(ProcessConfig& p, const json& obj, const std::string& where) {
  p.phi = get_string(obj, where, "phi", p.phi, {"one_plus_sin2", "identity", "constant"});
  p.phi_value = get_number(obj, where, "phi_value", p.phi_value);
  require(p.phi_value >= 0.0, join(where, "phi_value"), "must be >= 0");
  if (obj.contains("bound")) {
    p.bound = get_number(obj, where, "bound", 0.0);
    require(*p.bound > 0.0, join(where, "bound"), "must be positive");
  }
  if (obj.contains("driving")) {
    p.driving = parse_driving(get_object(obj, where, "driving"), join(where, "driving"));
  }
}

inline void parse_hawkes(ProcessConfig& p, const json& obj, const std::string& where) {
  p.base = get_number(obj, where, "base", p.base);
  p.alpha = get_number(obj, where, "alpha", p.alpha);
  p.beta = get_number(obj, where, "beta", p.beta);
  require(p.base > 0.0, join(where, "base"), "must be positive");
  require(p.alpha >= 0.0, join(where, "alpha"), "must be >= 0");
  require(p.beta > 0.0, join(where, "beta"), "must be positive");
  require(p.alpha / p.beta < 1.0, join(where, "alpha"),
          "hawkes kernel is not stable: branching ratio alpha/beta must be < 1");
}

inline ProcessConfig parse_process(const json& obj) {
  const std::string where = "process";
  ProcessConfig p;
  if (!obj.contains("type")) throw ConfigError("process.type", "missing");
  p.type = get_string(obj, where, "type", "",
                      {"poisson", "cox", "hawkes", "compound_poisson", "compound_hawkes",
                       "compound_cox", "discrete_state", "sde"});
  auto marks = [&] {
    if (obj.contains("marks")) {
      p.marks = parse_law(get_object(obj, where, "marks"), "process.marks");
    }
  };
  if (p.type == "poisson" || p.type == "compound_poisson") {
    std::set<std::string> keys{"type", "rate"};
    if (p.type == "compound_poisson") keys.insert("marks");
    reject_unknown(obj, where, keys);
    p.rate = get_number(obj, where, "rate", p.rate);
    require(p.rate > 0.0, "process.rate", "must be positive");
    marks();
  } else if (p.type == "hawkes" || p.type == "compound_hawkes") {
    std::set<std::string> keys{"type", "base", "alpha", "beta"};
    if (p.type == "compound_hawkes") keys.insert("marks");
    reject_unknown(obj, where, keys);
    parse_hawkes(p, obj, where);
    marks();
  } else if (p.type == "cox" || p.type == "compound_cox") {
    std::set<std::string> keys{"type", "phi", "phi_value", "bound", "driving"};
    if (p.type == "compound_cox") keys.insert("marks");
    reject_unknown(obj, where, keys);
    parse_cox(p, obj, where);
    marks();
  } else if (p.type == "discrete_state") {
    reject_unknown(obj, where, {"type", "birth", "death", "x0"});
    p.birth = get_number(obj, where, "birth", p.birth);
    p.death = get_number(obj, where, "death", p.death);
    p.x0 = get_number(obj, where, "x0", p.x0);
    require(p.birth >= 0.0, "process.birth", "must be >= 0");
    require(p.death >= 0.0, "process.death", "must be >= 0");
    require(p.x0 >= 0.0 && std::floor(p.x0) == p.x0, "process.x0",
            "must be a nonnegative integer");
  } else {
    reject_unknown(obj, where,
                   {"type", "x0", "drift", "diffusion", "jumps", "jump_map", "compensate"});
    p.x0 = get_number(obj, where, "x0", p.x0);
    p.drift = get_numbers(obj, where, "drift", p.drift);
    p.diffusion = get_numbers(obj, where, "diffusion", p.diffusion);
    require(p.drift.size() == 2, "process.drift", "must hold [constant, linear]");
    require(p.diffusion.size() == 2, "process.diffusion", "must hold [constant, linear]");
    p.jump_map = get_string(obj, where, "jump_map", p.jump_map, {"additive", "proportional"});
    if (obj.contains("compensate")) {
      require(obj.at("compensate").is_boolean(), "process.compensate", "must be a boolean");
      p.compensate = obj.at("compensate").get<bool>();
    }
    if (obj.contains("jumps")) {
      const auto& j = get_object(obj, where, "jumps");
      reject_unknown(j, "process.jumps", {"rate", "marks"});
      JumpConfig jc;
      jc.rate = get_number(j, "process.jumps", "rate", jc.rate);
      require(jc.rate > 0.0, "process.jumps.rate", "must be positive");
      if (j.contains("marks")) {
        jc.marks = parse_law(get_object(j, "process.jumps", "marks"), "process.jumps.marks");
      }
      p.jumps = jc;
    }
  }
  return p;
}

inline json process_to_json(const ProcessConfig& p) {
  json j{{"type", p.type}};
  if (p.type == "poisson" || p.type == "compound_poisson") {
    j["rate"] = p.rate;
  } else if (p.type == "hawkes" || p.type == "compound_hawkes") {
    j["base"] = p.base;
    j["alpha"] = p.alpha;
    j["beta"] = p.beta;
  } else if (p.type == "cox" || p.type == "compound_cox") {
    j["phi"] = p.phi;
    j["phi_value"] = p.phi_value;
    if (p.bound) j["bound"] = *p.bound;
    j["driving"] = {{"type", p.driving.type},
                    {"step", p.driving.step},
                    {"seed", p.driving.seed}};
  } else if (p.type == "discrete_state") {
    j["birth"] = p.birth;
    j["death"] = p.death;
    j["x0"] = p.x0;
  } else {
    j["x0"] = p.x0;
    j["drift"] = p.drift;
    j["diffusion"] = p.diffusion;
    j["jump_map"] = p.jump_map;
    j["compensate"] = p.compensate;
    if (p.jumps) j["jumps"] = {{"rate", p.jumps->rate}, {"marks", law_to_json(p.jumps->marks)}};
  }
  if (p.is_compound()) j["marks"] = law_to_json(p.marks);
  return j;
}

}  // namespace detail

inline ScenarioConfig parse_config(const nlohmann::json& doc) {
  using namespace detail;
  if (!doc.is_object()) throw ConfigError("config", "must be a JSON object");
  reject_unknown(doc, "",
                 {"scenario", "process", "horizon", "step", "paths", "seed", "grid_depth",
                  "integrand", "ito", "validate", "output"});
  ScenarioConfig c;
  if (!doc.contains("process")) throw ConfigError("process", "missing");
  c.scenario = get_string(doc, "", "scenario", c.scenario, {});
  c.process = parse_process(get_object(doc, "", "process"));
  c.horizon = get_number(doc, "", "horizon", c.horizon);
  require(c.horizon > 0.0, "horizon", "must be positive");
  c.step = get_number(doc, "", "step", std::min(c.step, c.horizon));
  require(c.step > 0.0 && c.step <= c.horizon, "step", "must lie in (0, horizon]");
  c.paths = get_unsigned(doc, "", "paths", c.paths);
  require(c.paths >= 1, "paths", "must be >= 1");
  c.seed = get_unsigned(doc, "", "seed", c.seed);
  c.grid_depth = static_cast<int>(get_unsigned(doc, "", "grid_depth", 6));
  require(c.grid_depth >= 2 && c.grid_depth <= 24, "grid_depth",
          "must lie in [2, 24] (the construction needs at least two levels)");
  if (doc.contains("integrand")) {
    const auto& j = get_object(doc, "", "integrand");
    reject_unknown(j, "integrand", {"name", "windows"});
    c.integrand.name =
        get_string(j, "integrand", "name", c.integrand.name, {"one", "mark", "mark_squared"});
    c.integrand.windows = get_numbers(j, "integrand", "windows", {});
    for (std::size_t k = 0; k < c.integrand.windows.size(); ++k) {
      require(c.integrand.windows[k] >= 1.0 &&
                  (k == 0 || c.integrand.windows[k] > c.integrand.windows[k - 1]),
              "integrand.windows", "must be increasing values >= 1");
    }
    require(c.integrand.windows.empty() || c.integrand.windows.size() >= 2,
            "integrand.windows", "needs at least two windows");
  }
  if (doc.contains("ito")) {
    const auto& j = get_object(doc, "", "ito");
    reject_unknown(j, "ito", {"test_function", "steps"});
    c.ito.test_function = get_string(j, "ito", "test_function", c.ito.test_function,
                                     {"identity", "square", "log", "exp"});
    c.ito.steps = get_numbers(j, "ito", "steps", {});
    for (std::size_t k = 0; k < c.ito.steps.size(); ++k) {
      require(c.ito.steps[k] > 0.0 && c.ito.steps[k] <= c.horizon &&
                  (k == 0 || c.ito.steps[k] < c.ito.steps[k - 1]),
              "ito.steps", "must be decreasing values in (0, horizon]");
    }
  }
  if (doc.contains("validate")) {
    const auto& j = get_object(doc, "", "validate");
    reject_unknown(j, "validate", {"checkpoints", "fixture"});
    c.validate.checkpoints = get_numbers(j, "validate", "checkpoints", c.validate.checkpoints);
    require(!c.validate.checkpoints.empty(), "validate.checkpoints", "must not be empty");
    for (std::size_t k = 0; k < c.validate.checkpoints.size(); ++k) {
      const double f = c.validate.checkpoints[k];
      require(f > 0.0 && f <= 1.0 && (k == 0 || f > c.validate.checkpoints[k - 1]),
              "validate.checkpoints", "must be increasing fractions in (0, 1]");
    }
    c.validate.fixture = get_string(j, "validate", "fixture", c.validate.fixture,
                                    {"none", "broken_compensator"});
  }
  if (doc.contains("output")) {
    const auto& j = get_object(doc, "", "output");
    reject_unknown(j, "output", {"directory", "formats"});
    c.output.directory = get_string(j, "output", "directory", c.output.directory, {});
    if (j.contains("formats")) {
      const auto& f = j.at("formats");
      require(f.is_array(), "output.formats", "must be an array");
      c.output.formats.clear();
      for (const auto& x : f) {
        require(x.is_string() && (x == "csv" || x == "json"), "output.formats",
                "entries must be \"csv\" or \"json\"");
        c.output.formats.push_back(x.get<std::string>());
      }
    }
  }
  return c;
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config", std::string("not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

/// Canonical form: every setting explicit, keys sorted.
inline nlohmann::json to_json(const ScenarioConfig& c) {
  nlohmann::json j;
  j["scenario"] = c.scenario;
  j["process"] = detail::process_to_json(c.process);
  j["horizon"] = c.horizon;
  j["step"] = c.step;
  j["paths"] = c.paths;
  j["seed"] = c.seed;
  j["grid_depth"] = c.grid_depth;
  j["integrand"] = {{"name", c.integrand.name}, {"windows", c.integrand.windows}};
  j["ito"] = {{"test_function", c.ito.test_function}, {"steps", c.ito.steps}};
  j["validate"] = {{"checkpoints", c.validate.checkpoints},
                   {"fixture", c.validate.fixture}};
  j["output"] = {{"directory", c.output.directory}, {"formats", c.output.formats}};
  return j;
}

//---------------------------------------------------------------------------//
// Builders
//---------------------------------------------------------------------------//

inline MarkLaw make_law(const LawConfig& law) {
  if (law.type == "point_mass") return PointMass{law.z, 1.0};
  if (law.type == "uniform") return UniformLaw{law.lo, law.hi, 1.0};
  if (law.type == "power") {
    // Normalized to a probability; the process rate carries the scale.
    const double mass = std::pow(law.hi, 1.0 - law.exponent) / (1.0 - law.exponent);
    return PowerLaw{1.0 / mass, law.exponent, law.hi};
  }
  return ExponentialLaw{law.rate, 1.0};
}

inline std::shared_ptr<const DrivingPath> make_driving(const DrivingConfig& d,
                                                       double horizon) {
  if (d.type == "identity") {
    return std::make_shared<const DrivingPath>(
        DrivingPath::sample([](double t) { return t; }, horizon, std::min(d.step, horizon)));
  }
  auto rng = derive_stream(d.seed, 0);
  const double step = std::min(d.step, horizon);
  const auto n = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
  std::vector<double> t(n + 1), x(n + 1, 0.0);
  for (std::size_t i = 1; i <= n; ++i) {
    t[i] = std::min(horizon, static_cast<double>(i) * step);
    x[i] = x[i - 1] + std::sqrt(t[i] - t[i - 1]) * rng.normal();
  }
  return std::make_shared<const DrivingPath>(std::move(t), std::move(x));
}

inline std::function<double(double)> make_phi(const ProcessConfig& p) {
  if (p.phi == "one_plus_sin2") {
    return [](double x) { return 1.0 + std::sin(x) * std::sin(x); };
  }
  if (p.phi == "identity") {
    return [](double x) { return std::max(0.0, x); };
  }
  return [v = p.phi_value](double) { return v; };
}

inline std::optional<double> phi_bound(const ProcessConfig& p) {
  if (p.bound) return p.bound;
  if (p.phi == "one_plus_sin2") return 2.0;
  if (p.phi == "constant") return p.phi_value;
  return std::nullopt;
}

inline IntensityModel make_intensity(const ProcessConfig& p, double horizon) {
  if (p.type == "poisson" || p.type == "compound_poisson") return Homogeneous{p.rate};
  if (p.type == "hawkes" || p.type == "compound_hawkes") {
    return Hawkes{p.base, ExponentialKernel{p.alpha, p.beta}};
  }
  if (p.type == "cox" || p.type == "compound_cox") {
    return Cox{make_phi(p), make_driving(p.driving, horizon), phi_bound(p)};
  }
  throw ConfigError("process.type", p.type + " has no scalar intensity");
}

/// Measure of the marked process; plain counting processes carry mark 1.
inline WakaraseMeasure make_measure(const ProcessConfig& p, double horizon) {
  if (p.is_counting()) return DensityForm{make_intensity(p, horizon), PointMass{1.0, 1.0}};
  if (p.is_compound()) return DensityForm{make_intensity(p, horizon), make_law(p.marks)};
  throw ConfigError("process.type", p.type + " is not a point process");
}

inline SemimartingaleSpec make_semimartingale(const ProcessConfig& p) {
  if (p.type == "discrete_state") {
    const double birth = p.birth;
    const double death = p.death;
    auto spec = discrete_state_process(
        [birth, death](double x) {
          std::vector<Transition> out;
          if (birth > 0.0) out.push_back({1.0, birth});
          if (x > 0.0 && death > 0.0) out.push_back({-1.0, death});
          return out;
        },
        p.x0);
    return to_semimartingale(spec);
  }
  if (p.type != "sde") throw ConfigError("process.type", p.type + " is not a state process");
  SemimartingaleSpec s;
  s.x0 = p.x0;
  const double a0 = p.drift[0], a1 = p.drift[1];
  const double b0 = p.diffusion[0], b1 = p.diffusion[1];
  if (a0 != 0.0 || a1 != 0.0) s.drift = [a0, a1](double, double x) { return a0 + a1 * x; };
  if (b0 != 0.0 || b1 != 0.0) {
    s.diffusion = [b0, b1](double, double x) { return b0 + b1 * x; };
  }
  if (p.jumps) {
    s.mu = DensityForm{Homogeneous{p.jumps->rate}, make_law(p.jumps->marks)};
    if (p.jump_map == "additive") {
      s.h1 = s.h2 = [](double, double z, double) { return z; };
    } else {
      s.h1 = s.h2 = [](double, double z, double x) { return x * z; };
    }
  }
  s.compensate_small_jumps = p.compensate;
  return s;
}

inline TestFunction make_test_function(const std::string& name) {
  if (name == "identity") {
    return {[](double x) { return x; }, [](double) { return 1.0; }, [](double) { return 0.0; }};
  }
  if (name == "square") {
    return {[](double x) { return x * x; }, [](double x) { return 2.0 * x; },
            [](double) { return 2.0; }};
  }
  if (name == "log") {
    return {[](double x) { return std::log(x); }, [](double x) { return 1.0 / x; },
            [](double x) { return -1.0 / (x * x); }};
  }
  return {[](double x) { return std::exp(x); }, [](double x) { return std::exp(x); },
          [](double x) { return std::exp(x); }};
}

}  // namespace mesugaki::cli
