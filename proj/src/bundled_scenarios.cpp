#include <sstream>
#include <utility>

#include "svpi/errors.hpp"
#include "svpi/scenario.hpp"

namespace svpi {

namespace {

// Homogeneous channel: H = 2, V = 1 on L = 10. Friction+slope channel: normal
// depth H = 2 for Q = 2 (C mean = k Q^2/H^3) with a sinusoidal slope ripple.
const std::vector<std::pair<std::string, std::string>>& table() {
  static const std::vector<std::pair<std::string, std::string>> t = {
      {"homogeneous-branch1", R"({
  "name": "homogeneous-branch1",
  "description": "Frictionless flat channel, branch-1 PI gains, small height bump: certificate and exponential decay.",
  "experiment": "decay",
  "channel": {"g": 9.81, "k": 0.0, "L": 10.0, "v_g": 1.0, "alpha": 1.0, "h_max": 5.0,
              "slope": {"variant": "constant", "c0": 0.0}},
  "controller": {"k_p": 1.0, "k_I": 0.1, "H_c": 2.0, "variant": "pure_pi"},
  "inflow": {"variant": "constant", "q": 2.0},
  "grid": {"n": 801},
  "perturbation": {"kind": "height_bump", "relative_amplitude": 1e-3, "center": 0.5, "width": 0.8},
  "horizon_transits": 40,
  "sample_every_transits": 0.1,
  "assertions": [
    {"metric": "certificate.valid", "op": "==", "value": true},
    {"metric": "fit.gamma", "op": ">", "value": 0.0},
    {"metric": "fit.r2", "op": ">", "value": 0.98},
    {"metric": "lyap.max_increase", "op": "<=", "value": 1e-9},
    {"metric": "run.h2_final_ratio", "op": "<", "value": 1e-2},
    {"metric": "hygiene.mass_balance", "op": "<", "value": 1e-6}
  ]
})"},
      {"rejected-gains", R"({
  "name": "rejected-gains",
  "description": "Gains outside both stability branches (k_p = -2, k_I = 0.5): the certificate must be refused.",
  "experiment": "certificate",
  "channel": {"g": 9.81, "k": 0.0, "L": 10.0, "v_g": 1.0, "alpha": 1.0, "h_max": 5.0,
              "slope": {"variant": "constant", "c0": 0.0}},
  "controller": {"k_p": -2.0, "k_I": 0.5, "H_c": 2.0},
  "inflow": {"variant": "constant", "q": 2.0},
  "grid": {"n": 201},
  "assertions": [
    {"metric": "certificate.valid", "op": "==", "value": false},
    {"metric": "certificate.rejected", "op": "==", "value": true}
  ]
})"},
      {"friction-slope-steady-hold", R"({
  "name": "friction-slope-steady-hold",
  "description": "Friction and sinusoidal slope, branch-1 gains, no perturbation: the discrete equilibrium must hold.",
  "experiment": "decay",
  "channel": {"g": 9.81, "k": 0.1, "L": 10.0, "v_g": 1.0, "alpha": 1.0, "h_max": 5.0,
              "slope": {"variant": "tabulated",
                        "sine": {"mean": 0.05, "amplitude": 0.01, "periods": 1, "samples": 2049}}},
  "controller": {"k_p": 1.0, "k_I": 0.1, "H_c": 2.0},
  "inflow": {"variant": "constant", "q": 2.0},
  "grid": {"n": 801},
  "perturbation": {"kind": "none"},
  "horizon_transits": 50,
  "sample_every_transits": 0.5,
  "assertions": [
    {"metric": "certificate.valid", "op": "==", "value": true},
    {"metric": "run.h2_max", "op": "<", "value": 1e-9},
    {"metric": "hygiene.mass_balance", "op": "<", "value": 1e-6}
  ]
})"},
      {"friction-slope-branch1", R"({
  "name": "friction-slope-branch1",
  "description": "Friction and sinusoidal slope, branch-1 gains, height bump: monotone Lyapunov value and exponential decay.",
  "experiment": "decay",
  "channel": {"g": 9.81, "k": 0.1, "L": 10.0, "v_g": 1.0, "alpha": 1.0, "h_max": 5.0,
              "slope": {"variant": "tabulated",
                        "sine": {"mean": 0.05, "amplitude": 0.01, "periods": 1, "samples": 2049}}},
  "controller": {"k_p": 1.0, "k_I": 0.1, "H_c": 2.0},
  "inflow": {"variant": "constant", "q": 2.0},
  "grid": {"n": 801},
  "perturbation": {"kind": "height_bump", "relative_amplitude": 1e-3, "center": 0.5, "width": 0.8},
  "horizon_transits": 40,
  "sample_every_transits": 0.1,
  "assertions": [
    {"metric": "certificate.valid", "op": "==", "value": true},
    {"metric": "certificate.branch1", "op": "==", "value": true},
    {"metric": "fit.gamma", "op": ">", "value": 0.0},
    {"metric": "fit.r2", "op": ">", "value": 0.98},
    {"metric": "lyap.max_increase", "op": "<=", "value": 1e-9},
    {"metric": "run.h2_final_ratio", "op": "<", "value": 1e-2},
    {"metric": "hygiene.mass_balance", "op": "<", "value": 1e-6}
  ]
})"},
      {"friction-slope-branch2", R"({
  "name": "friction-slope-branch2",
  "description": "Fast shallow flow (H = 1, V = 2) with friction and slope, where branch 2 is reachable: k_p = -5, k_I = -0.4.",
  "experiment": "decay",
  "channel": {"g": 9.81, "k": 0.1, "L": 10.0, "v_g": 1.0, "alpha": 1.0, "h_max": 5.0,
              "slope": {"variant": "tabulated",
                        "sine": {"mean": 0.4, "amplitude": 0.01, "periods": 1, "samples": 2049}}},
  "controller": {"k_p": -5.0, "k_I": -0.4, "H_c": 1.0},
  "inflow": {"variant": "constant", "q": 2.0},
  "grid": {"n": 801},
  "perturbation": {"kind": "height_bump", "relative_amplitude": 1e-3, "center": 0.5, "width": 0.8},
  "horizon_transits": 12,
  "sample_every_transits": 0.05,
  "assertions": [
    {"metric": "certificate.valid", "op": "==", "value": true},
    {"metric": "certificate.branch2", "op": "==", "value": true},
    {"metric": "fit.gamma", "op": ">", "value": 0.0},
    {"metric": "fit.r2", "op": ">", "value": 0.98},
    {"metric": "lyap.max_increase", "op": "<=", "value": 1e-9},
    {"metric": "run.h2_final_ratio", "op": "<", "value": 1e-2},
    {"metric": "hygiene.mass_balance", "op": "<", "value": 1e-6}
  ]
})"},
      {"homogeneous-necessity", R"({
  "name": "homogeneous-necessity",
  "description": "Frictionless flat channel with k_I < 0 on branch-1 proportional gain: the sign condition is violated and the deviation must not decay.",
  "experiment": "decay",
  "channel": {"g": 9.81, "k": 0.0, "L": 10.0, "v_g": 1.0, "alpha": 1.0, "h_max": 5.0,
              "slope": {"variant": "constant", "c0": 0.0}},
  "controller": {"k_p": 1.0, "k_I": -0.1, "H_c": 2.0},
  "inflow": {"variant": "constant", "q": 2.0},
  "grid": {"n": 257},
  "perturbation": {"kind": "height_bump", "relative_amplitude": 1e-4, "center": 0.5, "width": 0.8},
  "horizon_transits": 50,
  "sample_every_transits": 0.1,
  "assertions": [
    {"metric": "certificate.valid", "op": "==", "value": false},
    {"metric": "run.h2_final_ratio", "op": ">=", "value": 0.5},
    {"metric": "hygiene.mass_balance", "op": "<", "value": 1e-6}
  ]
})"},
      {"iss-sinusoid", R"({
  "name": "iss-sinusoid",
  "description": "Slow time-varying inflow (sinusoid, omega L/lambda2 = 0.05) at amplitudes a and a/2 under pure PI: bounded deviation from the quasi-static family and a linear gain.",
  "experiment": "iss",
  "channel": {"g": 9.81, "k": 0.0, "L": 10.0, "v_g": 1.0, "alpha": 1.0, "h_max": 5.0,
              "slope": {"variant": "constant", "c0": 0.0}},
  "controller": {"k_p": 1.0, "k_I": 0.1, "H_c": 2.0},
  "inflow": {"variant": "sinusoid", "mean": 2.0, "amplitude": 0.1, "omega_transit": 0.05},
  "grid": {"n": 129},
  "horizon_periods": 6,
  "sample_every_transits": 0.25,
  "analysis": {"iss_window_periods": 5, "iss_transient_periods": 1, "amplitude_factors": [1.0, 0.5]},
  "assertions": [
    {"metric": "certificate.valid", "op": "==", "value": true},
    {"metric": "iss.bounded", "op": "==", "value": true},
    {"metric": "iss.gain_ratio_error", "op": "<", "value": 0.25},
    {"metric": "iss.z_drift", "op": "<", "value": 0.1},
    {"metric": "hygiene.mass_balance", "op": "<", "value": 1e-6}
  ]
})"},
      {"feedforward-tracking", R"({
  "name": "feedforward-tracking",
  "description": "Same time-varying inflow with the target outflow fed forward at the gate: deviation from the target trajectory decays well below the pure-PI residual.",
  "experiment": "feedforward",
  "channel": {"g": 9.81, "k": 0.0, "L": 10.0, "v_g": 1.0, "alpha": 1.0, "h_max": 5.0,
              "slope": {"variant": "constant", "c0": 0.0}},
  "controller": {"k_p": 1.0, "k_I": 0.1, "H_c": 2.0, "variant": "feedforward"},
  "inflow": {"variant": "sinusoid", "mean": 2.0, "amplitude": 0.1, "omega_transit": 0.05},
  "grid": {"n": 257},
  "perturbation": {"kind": "height_bump", "relative_amplitude": 1e-4, "center": 0.5, "width": 0.8},
  "horizon_periods": 6,
  "sample_every_transits": 0.25,
  "analysis": {"iss_window_periods": 5, "iss_transient_periods": 1},
  "assertions": [
    {"metric": "certificate.valid", "op": "==", "value": true},
    {"metric": "ff.ratio_to_pi", "op": "<", "value": 0.1},
    {"metric": "ff.decay_ratio", "op": "<", "value": 0.1},
    {"metric": "hygiene.mass_balance", "op": "<", "value": 1e-6}
  ]
})"},
  };
  return t;
}

}  // namespace

std::vector<std::string> bundled_scenario_names() {
  std::vector<std::string> out;
  for (const auto& [name, text] : table()) out.push_back(name);
  return out;
}

const std::string& bundled_scenario_text(std::string_view name) {
  for (const auto& [n, text] : table()) {
    if (n == name) return text;
  }
  throw DomainError("unknown scenario '" + std::string(name) + "'");
}

std::string list_scenarios() {
  std::ostringstream os;
  for (const auto& [name, text] : table()) {
    const ScenarioSpec s = parse_scenario(io::parse_json(text, name));
    os << name << "  " << s.description << '\n';
  }
  return os.str();
}

std::string describe_scenario(std::string_view name) {
  const ScenarioSpec s = parse_scenario(io::parse_json(bundled_scenario_text(name), std::string(name)));
  std::ostringstream os;
  os << s.name << '\n' << s.description << '\n';
  os << "experiment: " << to_string(s.experiment) << '\n';
  os << "gains: k_p = " << s.controller.k_p << ", k_I = " << s.controller.k_I
     << ", H_c = " << s.controller.H_c << '\n';
  os << "inflow: " << s.inflow.at("variant").get<std::string>();
  if (s.inflow.at("variant") != "constant") os << " (time-varying inflow)";
  os << '\n' << "grid: n = " << s.n << '\n';
  if (s.horizon_transits) os << "horizon: " << *s.horizon_transits << " transit times\n";
  if (s.horizon_periods) os << "horizon: " << *s.horizon_periods << " forcing periods\n";
  os << "assertions:\n";
  for (const auto& a : s.assertions) os << "  " << a.text() << '\n';
  return os.str();
}

}  // namespace svpi
