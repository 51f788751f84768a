#pragma once

#include <string>
#include <vector>

#include "jcqed/errors.hpp"
#include "jcqed/model.hpp"

namespace jcqed {

/// Stand-in for gamma = 0, where the steady state of the driven system may not be unique.
inline constexpr double kGammaSurrogateRatio = 1e-6;

struct Preset {
  std::string name;
  std::string panel;
  std::string description;
  std::string task;
  double g_over_kappa = 1.0;
  double gamma_over_2kappa = 0.0;
  double drive_over_g = 0.0;
  double drive_phase = 0.5 * kPi;
  int n_max = 1;
  /// True when gamma_over_2kappa stands in for an exact zero.
  bool gamma_surrogate = false;

  ModelParams params() const {
    return ModelParams::from_ratios(g_over_kappa, gamma_over_2kappa, drive_over_g, drive_phase, n_max);
  }
};

inline std::vector<std::string> preset_names() {
  return {"fig2a", "fig2b", "fig2c", "fig2d", "fig3", "fig3-inset", "fig4", "fig5"};
}

inline std::vector<std::string> fig4_panels() {
  return {"I-a", "I-b", "I-c", "I-d", "II-a", "II-b", "II-c", "II-d"};
}

/// Expand a preset name; `panel` selects a fig4 frame (default I-b).
inline Preset find_preset(const std::string& name, const std::string& panel = "") {
  Preset p;
  p.name = name;
  if (name == "fig2a" || name == "fig2b" || name == "fig2c" || name == "fig2d") {
    p.g_over_kappa = 100.0;
    p.gamma_over_2kappa = 1.0;
    p.drive_over_g = 0.05;
    p.n_max = 30;
    p.task = name == "fig2a" ? "g1" : "g2";
    p.description = "weak-drive first and second order coherence";
    if (name == "fig2c") {
      p.gamma_over_2kappa = kGammaSurrogateRatio;
      p.gamma_surrogate = true;
    }
    if (name == "fig2d") p.drive_over_g = 0.25;
  } else if (name == "fig3") {
    p.g_over_kappa = 100.0;
    p.gamma_over_2kappa = 1.0;
    p.drive_over_g = 0.05;
    p.n_max = 25;
    p.task = "wtd";
    p.description = "side-emission waiting times, strong coupling";
  } else if (name == "fig3-inset") {
    p.g_over_kappa = 8.0;
    p.gamma_over_2kappa = 0.5;
    p.drive_over_g = 0.05;
    p.n_max = 25;
    p.task = "wtd";
    p.description = "side-emission waiting times, intermediate coupling";
  } else if (name == "fig4") {
    p.panel = panel.empty() ? "I-b" : panel;
    const auto dash = p.panel.find('-');
    const std::string row = p.panel.substr(0, dash);
    const std::string col = dash == std::string::npos ? "" : p.panel.substr(dash + 1);
    if (row == "I") {
      p.drive_over_g = 0.45;
    } else if (row == "II") {
      p.drive_over_g = 0.5;
    } else {
      detail::fail_domain("unknown fig4 panel '" + p.panel + "' (expected I-a..I-d or II-a..II-d)");
    }
    if (col == "a") {
      p.gamma_over_2kappa = kGammaSurrogateRatio;
      p.gamma_surrogate = true;
    } else if (col == "b") {
      p.gamma_over_2kappa = 1.0;
    } else if (col == "c") {
      p.gamma_over_2kappa = 5.0 / 3.0;
    } else if (col == "d") {
      p.gamma_over_2kappa = 2.0;
    } else {
      detail::fail_domain("unknown fig4 panel '" + p.panel + "' (expected I-a..I-d or II-a..II-d)");
    }
    p.g_over_kappa = 10.0 / p.drive_over_g;
    p.n_max = 200;
    p.task = "qfunc";
    p.description = "steady-state phase bimodality at |E|/kappa = 10";
  } else if (name == "fig5") {
    p.g_over_kappa = 50.0 / 3.0;
    p.gamma_over_2kappa = 1.0;
    p.drive_over_g = 0.6;
    p.n_max = 120;
    p.task = "evolve";
    p.description = "transient symmetry breaking above the critical drive";
  } else {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    detail::fail_domain("unknown preset '" + name + "' (known: " + known + ")");
  }
  if (!panel.empty() && name != "fig4") detail::fail_domain("--panel applies to fig4 only");
  return p;
}

}  // namespace jcqed
