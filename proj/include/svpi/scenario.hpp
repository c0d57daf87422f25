#pragma once

// Named experiments: a scenario document fixes channel, controller, inflow,
// grid, perturbation and the assertions a run must satisfy. run_scenario
// executes steady -> certify -> simulate -> analyze and writes artifacts.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "svpi/channel.hpp"
#include "svpi/io.hpp"
#include "svpi/pde.hpp"

namespace svpi {

enum class Experiment { certificate, decay, iss, feedforward };

std::string_view to_string(Experiment e);

struct Perturbation {
  enum class Kind { none, height_bump, velocity_bump };
  Kind kind = Kind::none;
  double relative_amplitude = 0.0;  // of H_c (height) or Q/H_c (velocity)
  double center = 0.5;              // fraction of L
  double width = 0.5;               // fraction of L
};

struct Assertion {
  std::string metric;
  std::string op;  // <, <=, >, >=, ==, !=
  double value = 0.0;

  bool holds(double actual) const;
  std::string text() const;
};

struct AnalysisOptions {
  double fit_start_fraction = 0.4;       // fit over [fraction * horizon, horizon]
  double monotone_after_transits = 2.0;
  double monotone_slack = 1e-9;
  int iss_window_periods = 5;
  double iss_transient_periods = 1.0;
  double iss_trend_tolerance = 1.1;
  std::vector<double> amplitude_factors{1.0, 0.5};
};

struct ScenarioSpec {
  std::string name;
  std::string description;
  Experiment experiment = Experiment::decay;
  ChannelConfig channel;
  ControllerSpec controller;
  io::Json inflow;  // resolved in run_scenario (omega_transit needs the base)
  int n = 0;
  Perturbation perturbation;
  std::optional<double> horizon_transits;
  std::optional<double> horizon_periods;
  double sample_every_transits = 0.1;
  double sigma_factor = 0.02;
  std::optional<double> epsilon;
  std::optional<double> mu;
  AnalysisOptions analysis;
  std::vector<Assertion> assertions;
  io::Json document;  // the document the spec was parsed from
};

/// Throws ParseError on any malformed, unknown or out-of-range entry.
ScenarioSpec parse_scenario(const io::Json& doc);

/// Applies "a.b.c=value" overrides; value is parsed as JSON when possible and
/// kept as a string otherwise. Throws ParseError on a malformed override.
io::Json apply_overrides(io::Json doc, const std::vector<std::string>& overrides);

enum class ExitCode : int {
  ok = 0,
  failure = 1,
  parse = 2,
  regime = 3,
  certificate = 4,
  assertion = 5,
};

struct AssertionResult {
  Assertion assertion;
  std::optional<double> actual;
  bool pass = false;
};

struct ScenarioReport {
  std::string name;
  ExitCode code = ExitCode::ok;
  std::string stage;    // failing stage, empty on success
  std::string message;
  std::map<std::string, double> metrics;
  std::vector<AssertionResult> assertions;
  std::filesystem::path output_dir;
};

struct RunContext {
  std::optional<std::filesystem::path> output_root;  // no artifacts if empty
  bool certificate_only = false;
};

ScenarioReport run_scenario(const ScenarioSpec& spec, const RunContext& ctx = {});

/// Bundled scenario documents.
std::vector<std::string> bundled_scenario_names();
/// Throws DomainError for an unknown name.
const std::string& bundled_scenario_text(std::string_view name);
/// One line per bundled scenario: name and description.
std::string list_scenarios();
/// Description plus experiment summary. Throws DomainError for unknown names.
std::string describe_scenario(std::string_view name);

}  // namespace svpi
