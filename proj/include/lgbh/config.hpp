#pragma once

#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "lgbh/couplings.hpp"
#include "lgbh/density.hpp"
#include "lgbh/design.hpp"
#include "lgbh/errors.hpp"
#include "lgbh/modes.hpp"

// Run configuration files are JSON with a strict schema; see README.md.

namespace lgbh {

using json = nlohmann::ordered_json;

struct DiagonalizeTask {
  int photons = 1;
  int count = 6;
};

enum class TaskKind { compute, design, diagonalize, check };

struct Task {
  TaskKind kind = TaskKind::compute;
  DiagonalizeTask diagonalize;  // used when kind == diagonalize
};

struct CheckSettings {
  int oracle_cases = 20;
  int gauge_angles = 3;
};

struct RunConfig {
  BeamParameters beam;
  std::variant<DensityProfile, DesignTarget> source;
  double radius = 4.0;  // disk radius for design targets
  ModeWindow window;
  std::vector<Task> tasks;
  CheckSettings check;
  std::string output = "lgbh_out";

  bool has_target() const { return std::holds_alternative<DesignTarget>(source); }
};

namespace config_detail {

class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail("expected an object");
  }

  ~Reader() = default;

  /// Rejects keys that were never read.
  void finish() const {
    for (const auto& [key, _] : node_.items())
      if (!seen_.count(key)) throw ValidationError("unknown key '" + where(key) + "'");
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return node_.at(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const auto& v = raw(key);
    if (!v.is_number()) fail(key, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(key, "must be finite");
    return d;
  }

  int integer(const std::string& key, int fallback) {
    if (!has(key)) return fallback;
    const auto& v = raw(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<int>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const auto& v = raw(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const auto& v = raw(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }

  /// Angle given either as `key` (radians) or `key_pi` (multiples of pi).
  std::optional<double> angle(const std::string& key) {
    const bool rad = has(key), in_pi = has(key + "_pi");
    if (rad && in_pi) fail(key, "give either '" + key + "' or '" + key + "_pi', not both");
    if (rad) return number(key, 0.0);
    if (in_pi) return number(key + "_pi", 0.0) * std::numbers::pi;
    return std::nullopt;
  }

  double angle(const std::string& key, double fallback) { return angle(key).value_or(fallback); }

  std::vector<double> numbers(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_array()) fail(key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) fail(key, "expected an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  Reader child(const std::string& key) { return Reader(raw(key), where(key)); }

  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ValidationError((path_.empty() ? std::string("config") : path_) + ": " + msg);
  }
  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw ValidationError(where(key) + ": " + msg);
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

inline std::array<double, 3> three(Reader& r, const std::string& key, std::array<double, 3> fallback,
                                   double unit = 1.0) {
  if (!r.has(key)) return fallback;
  const auto v = r.numbers(key);
  if (v.size() != 3) r.fail(key, "expected exactly three numbers");
  return {v[0] * unit, v[1] * unit, v[2] * unit};
}

inline BeamParameters read_beam(Reader r) {
  BeamParameters b;
  b.waist = r.number("waist", b.waist);
  b.gouy_rate = r.number("gouy_rate", b.gouy_rate);
  b.longitudinal_fill = r.number("longitudinal_fill", b.longitudinal_fill);
  b.first_order_scale = r.number("first_order_scale", b.first_order_scale);
  b.second_order_scale = r.number("second_order_scale", b.second_order_scale);
  const auto sign = r.string("interaction", "attractive");
  if (sign == "attractive") {
    b.interaction = InteractionSign::attractive;
  } else if (sign == "repulsive") {
    b.interaction = InteractionSign::repulsive;
  } else {
    r.fail("interaction", "expected 'attractive' or 'repulsive'");
  }
  r.finish();
  b.validate();
  return b;
}

inline DensityProfile read_profile(Reader r) {
  const double radius = r.number("radius", 4.0);
  std::vector<Harmonic> hs;
  if (r.has("harmonics")) {
    const auto& arr = r.raw("harmonics");
    if (!arr.is_array()) r.fail("harmonics", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Reader h(arr[i], r.where("harmonics[" + std::to_string(i) + "]"));
      if (!h.has("k")) h.fail("missing 'k'");
      Harmonic harmonic;
      harmonic.k = h.integer("k", 0);
      harmonic.c = h.number("c", 0.0);
      harmonic.phi = h.angle("phi", 0.0);
      h.finish();
      hs.push_back(harmonic);
    }
  }
  r.finish();
  DensityProfile profile(radius, std::move(hs));
  validate_nonnegative(profile);
  return profile;
}

inline DesignTarget read_target(Reader r, double& radius) {
  const auto type = r.string("type", "");
  radius = r.number("radius", 4.0);
  DesignTarget target;
  if (type == "chain") {
    ChainTarget t;
    t.phi1 = r.angle("phi1", t.phi1);
    target = t;
  } else if (type == "triangular_ladder") {
    TriangularLadderTarget t;
    t.phi1 = r.angle("phi1", t.phi1);
    t.phi2 = r.angle("phi2", t.phi2);
    t.ratio = r.number("ratio", t.ratio);
    target = t;
  } else if (type == "extended_triangle") {
    ExtendedTriangleTarget t;
    if (r.has("phases") && r.has("phases_pi")) r.fail("phases", "give either 'phases' or 'phases_pi'");
    t.phases = three(r, "phases", t.phases);
    t.phases = three(r, "phases_pi", t.phases, std::numbers::pi);
    t.weights = three(r, "weights", t.weights);
    target = t;
  } else if (type == "power_law") {
    PowerLawTarget t;
    t.beta = r.number("beta", t.beta);
    t.range = r.integer("range", t.range);
    t.calibrate = r.boolean("calibrate", t.calibrate);
    target = t;
  } else if (type == "flux") {
    FluxTarget t;
    t.theta1 = r.angle("theta1", t.theta1);
    t.theta2 = r.angle("theta2");
    t.gauge_theta1 = r.angle("gauge_theta1", t.gauge_theta1);
    target = t;
  } else {
    r.fail("type", "expected one of chain, triangular_ladder, extended_triangle, power_law, flux");
  }
  r.finish();
  validate_target(target);
  if (!(radius > 0.0)) throw ValidationError("target.radius must be positive");
  return target;
}

inline ModeWindow read_window(Reader r) {
  ModeWindow w;
  w.l_min = r.integer("l_min", w.l_min);
  w.l_max = r.integer("l_max", w.l_max);
  if (r.has("p_values")) {
    const auto& arr = r.raw("p_values");
    if (!arr.is_array()) r.fail("p_values", "expected an array of integers");
    w.p_values.clear();
    for (const auto& x : arr) {
      if (!x.is_number_integer()) r.fail("p_values", "expected an array of integers");
      w.p_values.push_back(x.get<int>());
    }
  }
  r.finish();
  w.validate();
  return w;
}

inline Task read_task(const json& node, const std::string& path) {
  if (node.is_string()) {
    const auto name = node.get<std::string>();
    if (name == "compute") return {TaskKind::compute, {}};
    if (name == "design") return {TaskKind::design, {}};
    if (name == "check") return {TaskKind::check, {}};
    if (name == "diagonalize") return {TaskKind::diagonalize, {}};
    throw ValidationError(path + ": unknown task '" + name + "'");
  }
  Reader r(node, path);
  if (!r.has("diagonalize")) r.fail("expected a task name or {\"diagonalize\": {...}}");
  Reader d = r.child("diagonalize");
  Task task{TaskKind::diagonalize, {}};
  task.diagonalize.photons = d.integer("photons", 1);
  task.diagonalize.count = d.integer("count", 6);
  d.finish();
  r.finish();
  if (task.diagonalize.photons < 0) throw ValidationError(path + ".diagonalize.photons must be >= 0");
  if (task.diagonalize.count < 1) throw ValidationError(path + ".diagonalize.count must be >= 1");
  return task;
}

}  // namespace config_detail

/// Parses JSON text into a validated RunConfig. Syntax errors raise
/// ParseError with line and column; schema violations raise ValidationError
/// (or NonPhysicalDensity for an unrealizable profile).
inline RunConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // e.byte is 1-based; translate to line/column.
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError("config line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                     e.what());
  }
  using config_detail::Reader;
  Reader root(doc, "");
  RunConfig cfg;
  if (root.has("beam")) cfg.beam = config_detail::read_beam(root.child("beam"));
  const bool profile = root.has("profile"), target = root.has("target");
  if (profile == target) root.fail("exactly one of 'profile' or 'target' is required");
  if (profile) {
    cfg.source = config_detail::read_profile(root.child("profile"));
    cfg.radius = std::get<DensityProfile>(cfg.source).radius();
  } else {
    cfg.source = config_detail::read_target(root.child("target"), cfg.radius);
  }
  if (root.has("window")) cfg.window = config_detail::read_window(root.child("window"));
  if (!root.has("tasks")) root.fail("'tasks' is required");
  const auto& tasks = root.raw("tasks");
  if (!tasks.is_array() || tasks.empty()) root.fail("tasks", "expected a non-empty array");
  for (std::size_t i = 0; i < tasks.size(); ++i)
    cfg.tasks.push_back(config_detail::read_task(tasks[i], "tasks[" + std::to_string(i) + "]"));
  if (root.has("check")) {
    Reader c = root.child("check");
    cfg.check.oracle_cases = c.integer("oracle_cases", cfg.check.oracle_cases);
    cfg.check.gauge_angles = c.integer("gauge_angles", cfg.check.gauge_angles);
    c.finish();
    if (cfg.check.oracle_cases < 1 || cfg.check.gauge_angles < 1)
      throw ValidationError("check.oracle_cases and check.gauge_angles must be >= 1");
  }
  cfg.output = root.string("output", cfg.output);
  root.finish();
  return cfg;
}

inline RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

inline json to_json(const BeamParameters& b) {
  return {{"waist", b.waist},
          {"gouy_rate", b.gouy_rate},
          {"longitudinal_fill", b.longitudinal_fill},
          {"first_order_scale", b.first_order_scale},
          {"second_order_scale", b.second_order_scale},
          {"interaction", b.interaction == InteractionSign::attractive ? "attractive" : "repulsive"}};
}

inline json to_json(const DensityProfile& p) {
  json hs = json::array();
  for (const auto& h : p.harmonics()) hs.push_back({{"k", h.k}, {"c", h.c}, {"phi", h.phi}});
  return {{"radius", p.radius()}, {"harmonics", hs}};
}

inline json to_json(const ModeWindow& w) {
  return {{"l_min", w.l_min}, {"l_max", w.l_max}, {"p_values", w.p_values}};
}

inline json to_json(const DesignTarget& target, double radius) {
  json j;
  std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, ChainTarget>) {
          j = {{"type", "chain"}, {"phi1", t.phi1}};
        } else if constexpr (std::is_same_v<T, TriangularLadderTarget>) {
          j = {{"type", "triangular_ladder"}, {"phi1", t.phi1}, {"phi2", t.phi2}, {"ratio", t.ratio}};
        } else if constexpr (std::is_same_v<T, ExtendedTriangleTarget>) {
          j = {{"type", "extended_triangle"}, {"phases", t.phases}, {"weights", t.weights}};
        } else if constexpr (std::is_same_v<T, PowerLawTarget>) {
          j = {{"type", "power_law"}, {"beta", t.beta}, {"range", t.range}, {"calibrate", t.calibrate}};
        } else {
          j = {{"type", "flux"}, {"theta1", t.theta1}, {"gauge_theta1", t.gauge_theta1}};
          if (t.theta2) j["theta2"] = *t.theta2;
        }
      },
      target);
  j["radius"] = radius;
  return j;
}

inline json task_to_json(const Task& t) {
  switch (t.kind) {
    case TaskKind::compute: return "compute";
    case TaskKind::design: return "design";
    case TaskKind::check: return "check";
    case TaskKind::diagonalize:
      return {{"diagonalize", {{"photons", t.diagonalize.photons}, {"count", t.diagonalize.count}}}};
  }
  return nullptr;
}

/// Serializes a config in the schema parse_config_text accepts.
inline json to_json(const RunConfig& cfg) {
  json j;
  j["beam"] = to_json(cfg.beam);
  if (const auto* p = std::get_if<DensityProfile>(&cfg.source)) {
    j["profile"] = to_json(*p);
  } else {
    j["target"] = to_json(std::get<DesignTarget>(cfg.source), cfg.radius);
  }
  j["window"] = to_json(cfg.window);
  json tasks = json::array();
  for (const auto& t : cfg.tasks) tasks.push_back(task_to_json(t));
  j["tasks"] = tasks;
  j["check"] = {{"oracle_cases", cfg.check.oracle_cases}, {"gauge_angles", cfg.check.gauge_angles}};
  j["output"] = cfg.output;
  return j;
}

}  // namespace lgbh
