#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "jcqed/errors.hpp"
#include "jcqed/model.hpp"
#include "jcqed/presets.hpp"

namespace jcqed {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr int kCsvSchemaVersion = 1;

using KeyValues = std::map<std::string, std::string>;

inline const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names{"steady", "g1", "spectrum", "g2", "wtd", "qfunc", "evolve", "validate"};
  return names;
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    fail_domain("config key '" + key + "': '" + v + "' is not a number");
  }
  if (pos != v.size()) fail_domain("config key '" + key + "': '" + v + "' is not a number");
  return out;
}

inline int parse_int(const std::string& key, const std::string& v) {
  const double d = parse_double(key, v);
  if (d != std::floor(d) || std::abs(d) > 1e9) fail_domain("config key '" + key + "': '" + v + "' is not an integer");
  return static_cast<int>(d);
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  fail_domain("config key '" + key + "': '" + v + "' is not a boolean");
}

}  // namespace detail

/// Parse `key = value` lines; `#` starts a comment.
inline KeyValues parse_key_values(std::string_view text) {
  KeyValues kv;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) detail::fail_domain("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(std::string_view(t).substr(0, eq));
    if (key.empty()) detail::fail_domain("config line " + std::to_string(lineno) + ": empty key");
    kv[key] = detail::trim(std::string_view(t).substr(eq + 1));
  }
  return kv;
}

/// Parse `k=v` pairs given on the command line.
inline KeyValues parse_overrides(const std::vector<std::string>& items) {
  KeyValues kv;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) detail::fail_domain("parameter override '" + item + "' is not k=v");
    kv[detail::trim(std::string_view(item).substr(0, eq))] = detail::trim(std::string_view(item).substr(eq + 1));
  }
  return kv;
}

/// Flat key=value file, or a JSON metadata file whose "config" object is used.
inline KeyValues load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) detail::fail_domain("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const std::string t = detail::trim(text);
  if (!t.empty() && t.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(t);
    } catch (const nlohmann::json::exception& e) {
      detail::fail_domain("config file '" + path + "' is not valid JSON: " + e.what());
    }
    const nlohmann::json& c = j.contains("config") ? j.at("config") : j;
    if (!c.is_object()) detail::fail_domain("config file '" + path + "': \"config\" must be an object");
    KeyValues kv;
    for (const auto& [k, v] : c.items()) {
      if (v.is_string()) {
        kv[k] = v.get<std::string>();
      } else if (v.is_boolean()) {
        kv[k] = v.get<bool>() ? "true" : "false";
      } else if (v.is_number_integer()) {
        kv[k] = std::to_string(v.get<long long>());
      } else if (v.is_number()) {
        kv[k] = detail::format_double(v.get<double>());
      } else if (!v.is_null()) {
        detail::fail_domain("config key '" + k + "' must be a scalar");
      }
    }
    return kv;
  }
  return parse_key_values(text);
}

/// Fully resolved run configuration. Zero for a grid field means "derive from the model".
struct ScenarioConfig {
  std::string task = "steady";
  std::string preset;
  std::string panel;
  double g_over_kappa = 100.0;
  double gamma_over_2kappa = 1.0;
  double drive_over_g = 0.05;
  double drive_phase = 0.5 * kPi;
  int n_max = 30;
  std::string channel = "side";
  double tau_max = 0.0;
  double tau_step = 0.0;
  double omega_step = 0.0;
  double omega_range = 0.0;
  double q_half_width = 0.0;
  int q_points = 201;
  double rtol = 1e-8;
  double atol = 1e-10;
  double gt_max = 27.5;
  int snapshots = 12;
  /// Raise n_max until the truncation check passes (qfunc and steady tasks).
  bool adaptive_n = false;
  bool strict = false;
  bool plot = false;

  ModelParams params() const {
    return ModelParams::from_ratios(g_over_kappa, gamma_over_2kappa, drive_over_g, drive_phase, n_max);
  }

  KeyValues to_key_values() const {
    using detail::format_double;
    KeyValues kv{
        {"task", task},
        {"g_over_kappa", format_double(g_over_kappa)},
        {"gamma_over_2kappa", format_double(gamma_over_2kappa)},
        {"drive_over_g", format_double(drive_over_g)},
        {"drive_phase", format_double(drive_phase)},
        {"n_max", std::to_string(n_max)},
        {"channel", channel},
        {"tau_max", format_double(tau_max)},
        {"tau_step", format_double(tau_step)},
        {"omega_step", format_double(omega_step)},
        {"omega_range", format_double(omega_range)},
        {"q_half_width", format_double(q_half_width)},
        {"q_points", std::to_string(q_points)},
        {"rtol", format_double(rtol)},
        {"atol", format_double(atol)},
        {"gt_max", format_double(gt_max)},
        {"snapshots", std::to_string(snapshots)},
        {"adaptive_n", adaptive_n ? "true" : "false"},
        {"strict", strict ? "true" : "false"},
        {"plot", plot ? "true" : "false"},
    };
    if (!preset.empty()) kv["preset"] = preset;
    if (!panel.empty()) kv["panel"] = panel;
    return kv;
  }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : to_key_values()) j[k] = v;
    return j;
  }
};

namespace detail {

inline void apply_key_values(ScenarioConfig& c, const KeyValues& kv) {
  for (const auto& [k, v] : kv) {
    if (k == "task") c.task = v;
    else if (k == "preset") c.preset = v;
    else if (k == "panel") c.panel = v;
    else if (k == "g_over_kappa") c.g_over_kappa = parse_double(k, v);
    else if (k == "gamma_over_2kappa") c.gamma_over_2kappa = parse_double(k, v);
    else if (k == "drive_over_g") c.drive_over_g = parse_double(k, v);
    else if (k == "drive_phase") c.drive_phase = parse_double(k, v);
    else if (k == "n_max") c.n_max = parse_int(k, v);
    else if (k == "channel") c.channel = v;
    else if (k == "tau_max") c.tau_max = parse_double(k, v);
    else if (k == "tau_step") c.tau_step = parse_double(k, v);
    else if (k == "omega_step") c.omega_step = parse_double(k, v);
    else if (k == "omega_range") c.omega_range = parse_double(k, v);
    else if (k == "q_half_width") c.q_half_width = parse_double(k, v);
    else if (k == "q_points") c.q_points = parse_int(k, v);
    else if (k == "rtol") c.rtol = parse_double(k, v);
    else if (k == "atol") c.atol = parse_double(k, v);
    else if (k == "gt_max") c.gt_max = parse_double(k, v);
    else if (k == "snapshots") c.snapshots = parse_int(k, v);
    else if (k == "adaptive_n") c.adaptive_n = parse_bool(k, v);
    else if (k == "strict") c.strict = parse_bool(k, v);
    else if (k == "plot") c.plot = parse_bool(k, v);
    else fail_domain("unknown config key '" + k + "'");
  }
}

inline void apply_preset(ScenarioConfig& c, const Preset& p) {
  c.preset = p.name;
  c.panel = p.panel;
  c.task = p.task;
  c.g_over_kappa = p.g_over_kappa;
  c.gamma_over_2kappa = p.gamma_over_2kappa;
  c.drive_over_g = p.drive_over_g;
  c.drive_phase = p.drive_phase;
  c.n_max = p.n_max;
}

}  // namespace detail

/// Merge preset < file < command line. The preset (and panel) may be named in any layer;
/// the highest-precedence mention wins. `task` from the command line overrides everything.
inline ScenarioConfig resolve_config(const KeyValues& file, const KeyValues& cli) {
  ScenarioConfig c;
  std::string preset;
  std::string panel;
  for (const KeyValues* layer : {&file, &cli}) {
    if (auto it = layer->find("preset"); it != layer->end()) preset = it->second;
    if (auto it = layer->find("panel"); it != layer->end()) panel = it->second;
  }
  if (!preset.empty()) detail::apply_preset(c, find_preset(preset, panel));
  detail::apply_key_values(c, file);
  detail::apply_key_values(c, cli);

  bool known_task = false;
  for (const auto& t : task_names()) known_task = known_task || t == c.task;
  if (!known_task) detail::fail_domain("unknown task '" + c.task + "'");
  if (c.channel != "side" && c.channel != "forward") detail::fail_domain("channel must be side or forward");
  if (!(c.rtol > 0.0 && c.rtol <= 1e-2) || !(c.atol > 0.0 && c.atol <= 1e-2)) {
    detail::fail_domain("tolerances must lie in (0, 1e-2]");
  }
  for (double v : {c.tau_max, c.tau_step, c.omega_step, c.omega_range, c.q_half_width}) {
    if (!(v >= 0.0) || !std::isfinite(v)) detail::fail_domain("grid settings must be finite and non-negative");
  }
  if (c.q_points < 3 || c.snapshots < 2) detail::fail_domain("grid point counts are too small");
  if (!(c.gt_max > 0.0)) detail::fail_domain("snapshot span must be positive");
  c.params();  // validates the model
  return c;
}

}  // namespace jcqed
