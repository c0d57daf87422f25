#include "svpi/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <limits>
#include <sstream>

#include "svpi/analysis.hpp"
#include "svpi/certifier.hpp"
#include "svpi/errors.hpp"
#include "svpi/steady.hpp"

namespace svpi {

namespace fs = std::filesystem;
using io::Json;

std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::certificate:
      return "certificate";
    case Experiment::decay:
      return "decay";
    case Experiment::iss:
      return "iss";
    case Experiment::feedforward:
      return "feedforward";
  }
  return "?";
}

bool Assertion::holds(double a) const {
  if (std::isnan(a)) return false;
  if (op == "<") return a < value;
  if (op == "<=") return a <= value;
  if (op == ">") return a > value;
  if (op == ">=") return a >= value;
  if (op == "==") return a == value;
  if (op == "!=") return a != value;
  return false;
}

std::string Assertion::text() const {
  return metric + " " + op + " " + io::format_number(value);
}

namespace {

Experiment parse_experiment(const std::string& s) {
  if (s == "certificate") return Experiment::certificate;
  if (s == "decay") return Experiment::decay;
  if (s == "iss") return Experiment::iss;
  if (s == "feedforward") return Experiment::feedforward;
  throw ParseError("scenario: unknown experiment '" + s + "'");
}

Perturbation parse_perturbation(const Json& j) {
  io::ObjectReader r(j, "perturbation");
  Perturbation p;
  const std::string kind = r.string("kind");
  if (kind == "none") {
    r.finish();
    return p;
  }
  if (kind == "height_bump") {
    p.kind = Perturbation::Kind::height_bump;
  } else if (kind == "velocity_bump") {
    p.kind = Perturbation::Kind::velocity_bump;

  } else {
    throw ParseError("perturbation: unknown kind '" + kind + "'");
  }
  p.relative_amplitude = r.number("relative_amplitude");
  p.center = r.number("center", 0.5);
  p.width = r.number("width", 0.5);
  r.finish();
  if (!(p.width > 0.0)) throw ParseError("perturbation: width must be positive");
  const double lo = p.center - 0.5 * p.width;
  const double hi = p.center + 0.5 * p.width;
  if (lo < 0.1 - 1e-12 || hi > 0.9 + 1e-12) {
    throw ParseError("perturbation: support must lie within [0.1 L, 0.9 L]");
  }
  return p;
}

AnalysisOptions parse_analysis(const Json& j) {
  io::ObjectReader r(j, "analysis");
  AnalysisOptions a;
  a.fit_start_fraction = r.number("fit_start_fraction", a.fit_start_fraction);
  a.monotone_after_transits = r.number("monotone_after_transits", a.monotone_after_transits);
  a.monotone_slack = r.number("monotone_slack", a.monotone_slack);
  a.iss_window_periods =
      r.has("iss_window_periods") ? r.integer("iss_window_periods") : a.iss_window_periods;
  a.iss_transient_periods = r.number("iss_transient_periods", a.iss_transient_periods);
  a.iss_trend_tolerance = r.number("iss_trend_tolerance", a.iss_trend_tolerance);
  if (r.has("amplitude_factors")) a.amplitude_factors = r.numbers("amplitude_factors");
  r.finish();
  if (!(a.fit_start_fraction >= 0.0 && a.fit_start_fraction < 1.0)) {
    throw ParseError("analysis: fit_start_fraction must be in [0, 1)");
  }
  if (a.iss_window_periods < 1) throw ParseError("analysis: iss_window_periods must be >= 1");
  if (a.amplitude_factors.empty()) throw ParseError("analysis: amplitude_factors is empty");
  return a;
}

std::vector<Assertion> parse_assertions(const Json& j) {
  if (!j.is_array()) throw ParseError("assertions: expected an array");
  std::vector<Assertion> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = "assertions[" + std::to_string(i) + "]";
    io::ObjectReader r(j[i], where);
    Assertion a;
    a.metric = r.string("metric");
    a.op = r.string("op");
    const Json& v = r.child("value");
    if (v.is_boolean()) {
      a.value = v.get<bool>() ? 1.0 : 0.0;
    } else if (v.is_number()) {
      a.value = v.get<double>();
    } else {
      throw ParseError(where + ": value must be a number or a boolean");
    }
    r.finish();
    static const char* ops[] = {"<", "<=", ">", ">=", "==", "!="};
    if (std::find(std::begin(ops), std::end(ops), a.op) == std::end(ops)) {
      throw ParseError(where + ": unknown operator '" + a.op + "'");
    }
    out.push_back(a);
  }
  return out;
}

// Discharge the base steady state is computed for.
double reference_flow(const Json& inflow) {
  const std::string v = inflow.at("variant").get<std::string>();
  if (v == "constant") return inflow.at("q").get<double>();
  if (v == "sinusoid") return inflow.at("mean").get<double>();
  if (v == "ramp") return inflow.at("q0").get<double>();
  return inflow.at("q").at(0).get<double>();
}

}  // namespace

ScenarioSpec parse_scenario(const Json& doc) {
  io::ObjectReader r(doc, "scenario");
  ScenarioSpec s;
  s.document = doc;
  s.name = r.string("name");
  if (s.name.empty() || s.name.find_first_of("/\\ ") != std::string::npos) {
    throw ParseError("scenario: name must be non-empty without spaces or slashes");
  }
  s.description = r.string("description", "");
  s.experiment = parse_experiment(r.string("experiment", "decay"));
  s.channel = io::channel_from_json(r.child("channel"));
  s.controller = io::controller_from_json(r.child("controller"));
  s.inflow = r.child("inflow");
  const InflowSignal probe = io::inflow_from_json(s.inflow, 1.0);

  {
    io::ObjectReader g(r.child("grid"), "grid");
    if (g.has("x")) throw ParseError("grid: nonuniform grids are not supported");
    if (g.has("uniform")) {
      g.child("uniform");
      if (doc.at("grid").at("uniform") != true) {
        throw ParseError("grid: nonuniform grids are not supported");
      }
    }
    s.n = g.integer("n");
    g.finish();
    if (s.n < 7 || s.n % 2 == 0) throw ParseError("grid: n must be odd and >= 7");
  }

  if (r.has("perturbation")) s.perturbation = parse_perturbation(r.child("perturbation"));
  s.horizon_transits = r.optional_number("horizon_transits");
  s.horizon_periods = r.optional_number("horizon_periods");
  s.sample_every_transits = r.number("sample_every_transits", s.sample_every_transits);
  s.sigma_factor = r.number("sigma_factor", s.sigma_factor);
  if (r.has("certificate")) {
    io::ObjectReader c(r.child("certificate"), "certificate");
    s.epsilon = c.optional_number("epsilon");
    s.mu = c.optional_number("mu");
    c.finish();
    if (s.epsilon && !(*s.epsilon > 0.0)) throw ParseError("certificate: epsilon must be positive");
    if (s.mu && !(*s.mu > 0.0)) throw ParseError("certificate: mu must be positive");
  }
  if (r.has("analysis")) s.analysis = parse_analysis(r.child("analysis"));
  if (r.has("assertions")) s.assertions = parse_assertions(r.child("assertions"));
  r.finish();

  if (!(s.sample_every_transits > 0.0)) {
    throw ParseError("scenario: sample_every_transits must be positive");
  }
  if (!(s.sigma_factor >= 0.0)) throw ParseError("scenario: sigma_factor must be >= 0");
  if (s.horizon_transits && s.horizon_periods) {
    throw ParseError("scenario: give horizon_transits or horizon_periods, not both");
  }
  if (s.experiment != Experiment::certificate) {
    if (!s.horizon_transits && !s.horizon_periods) {
      throw ParseError("scenario: a simulated experiment needs a horizon");
    }
    const double h = s.horizon_transits.value_or(s.horizon_periods.value_or(0.0));
    if (!(h > 0.0)) throw ParseError("scenario: horizon must be positive");
  }
  if (s.horizon_periods && !(probe.period() > 0.0)) {
    throw ParseError("scenario: horizon_periods needs a periodic inflow");
  }
  const bool periodic = probe.kind() == "sinusoid";
  if ((s.experiment == Experiment::iss || s.experiment == Experiment::feedforward) && !periodic) {
    throw ParseError("scenario: iss and feedforward experiments need a sinusoidal inflow");
  }
  if (s.experiment == Experiment::decay && !probe.is_constant()) {
    throw ParseError("scenario: decay experiments need a constant inflow");
  }
  if (s.experiment != Experiment::feedforward &&
      s.controller.variant == ControllerVariant::feedforward) {
    throw ParseError("scenario: the feedforward variant is only run by feedforward experiments");
  }
  return s;
}

Json apply_overrides(Json doc, const std::vector<std::string>& overrides) {
  for (const std::string& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ParseError("override '" + ov + "': expected key=value");
    }
    const std::string path = ov.substr(0, eq);
    const std::string text = ov.substr(eq + 1);
    Json value;
    try {
      value = Json::parse(text);
    } catch (const nlohmann::json::exception&) {
      value = text;
    }
    Json* node = &doc;
    std::stringstream ss(path);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) {
      if (part.empty()) throw ParseError("override '" + ov + "': empty path segment");
      parts.push_back(part);
    }
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const std::string& p = parts[i];
      const bool last = i + 1 == parts.size();
      if (node->is_array()) {
        std::size_t idx = 0;
        try {
          idx = std::stoul(p);
        } catch (const std::exception&) {
          throw ParseError("override '" + ov + "': '" + p + "' is not an array index");
        }
        if (idx >= node->size()) throw ParseError("override '" + ov + "': index out of range");
        node = &(*node)[idx];
      } else if (node->is_object() || node->is_null()) {
        if (!last && !node->contains(p)) (*node)[p] = Json::object();
        node = &(*node)[p];
      } else {
        throw ParseError("override '" + ov + "': '" + p + "' is not inside an object");
      }
      if (last) *node = value;
    }
  }
  return doc;
}

namespace {

using Metrics = std::map<std::string, double>;

struct StageError : Error {
  StageError(const std::string& what, bool regime) : Error(what), is_regime(regime) {}
  bool is_regime;
};

void require_completed(const TrajectoryRecord& rec, const std::string& label) {
  if (rec.completed) return;
  std::ostringstream os;
  os << label << " run stopped (" << rec.failure_kind << "): " << rec.failure;
  if (rec.failure_time) os << " at t=" << *rec.failure_time;
  if (rec.failure_x) os << ", x=" << *rec.failure_x;
  throw StageError(os.str(), rec.failure_kind == "regime");
}

SimState perturbed(SimState s, const Perturbation& p, const Grid& grid, double H_c,
                   double v_scale) {
  if (p.kind == Perturbation::Kind::none) return s;
  const double amp = p.relative_amplitude * (p.kind == Perturbation::Kind::height_bump ? H_c : v_scale);
  const Field b = smooth_bump(grid, amp, p.center * grid.L, p.width * grid.L);
  if (p.kind == Perturbation::Kind::height_bump) {
    s.profile.H += b;
  } else {
    s.profile.V += b;
  }
  return s;
}

std::vector<double> finite_values(const std::vector<double>& t, const std::vector<double>& v,
                                  std::vector<double>& t_out) {
  std::vector<double> out;
  t_out.clear();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::isfinite(v[i])) {
      t_out.push_back(t[i]);
      out.push_back(v[i]);
    }
  }
  return out;
}

void record_fit(Metrics& m, const std::string& prefix, const std::vector<double>& t,
                const std::vector<double>& v, double t_start) {
  std::vector<double> tf;
  const std::vector<double> vf = finite_values(t, v, tf);
  try {
    const DecayFit f = fit_decay(tf, vf, t_start);
    m[prefix + ".gamma"] = f.gamma;
    m[prefix + ".r2"] = f.r2;
  } catch (const DomainError&) {
    // No fit metrics; assertions on them then fail as missing.
  }
}

// Max sample-to-sample increase of a series after t_from, over finite pairs.
double max_increase(const std::vector<double>& t, const std::vector<double>& v, double t_from) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (t[i - 1] < t_from - 1e-9) continue;
    if (!std::isfinite(v[i]) || !std::isfinite(v[i - 1])) continue;
    worst = std::max(worst, v[i] - v[i - 1]);
  }
  return worst;
}

struct Env {
  const ScenarioSpec& spec;
  const RunContext& ctx;
  Metrics& m;
  Json& derived;
  fs::path out;
  ChannelConfig cfg;
  Grid grid;
  Profile base;
  double T = 0.0;
  double q_ref = 0.0;
  InflowSignal inflow;
  double horizon = 0.0;
  double sample_every = 0.0;
  double mass_worst = 0.0;

  bool writing() const { return !out.empty(); }

  void note_mass(const TrajectoryRecord& rec, const std::string& label) {
    const double mb = mass_balance_residual(rec, grid);
    m[label + ".mass_balance"] = mb;
    m[label + ".controller_residual"] = rec.max_controller_residual;
    mass_worst = std::max(mass_worst, mb);
    derived["dt"][label] = rec.dt;
  }
};

void run_decay(Env& e, const Certificate& cert, const Discretization& d) {
  ControllerSpec ctrl = e.spec.controller;
  const SimState eq = discrete_steady_state(d, ctrl, e.inflow(0.0));
  {
    auto [rH, rV] = interior_rhs(d, eq.profile.H, eq.profile.V);
    const int n = e.grid.n;
    e.m["equilibrium.rhs"] = std::max(rH.segment(1, n - 2).abs().maxCoeff(),
                                      rV.segment(1, n - 2).abs().maxCoeff());
  }
  SimState init = perturbed(eq, e.spec.perturbation, e.grid, ctrl.H_c, e.q_ref / ctrl.H_c);
  init.Z = consistent_Z(d, ctrl, init.profile, 0.0);

  RunOptions ro;
  ro.horizon = e.horizon;
  ro.sample_every = e.sample_every;
  const TrajectoryRecord rec = run(d, ctrl, init, e.inflow, ro);
  require_completed(rec, "closed-loop");
  e.note_mass(rec, "run");

  const NormSeries ns = norm_series(rec, d, ctrl, eq.profile, eq.Z, cert.valid ? &cert : nullptr);
  const double h0 = ns.h2.front();
  e.m["run.h2_initial"] = h0;
  e.m["run.h2_final"] = ns.h2.back();
  e.m["run.h2_max"] = *std::max_element(ns.h2.begin(), ns.h2.end());
  if (h0 > 0.0) {
    e.m["run.h2_final_ratio"] = ns.h2.back() / h0;
    e.m["run.h2_min_ratio"] = *std::min_element(ns.h2.begin(), ns.h2.end()) / h0;
  }
  e.m["run.z_dev_final"] = ns.z_abs.back();
  const double t_fit = e.spec.analysis.fit_start_fraction * e.horizon;
  if (e.spec.perturbation.kind != Perturbation::Kind::none) {
    record_fit(e.m, "fit_h2", ns.t, ns.h2, t_fit);
    if (!ns.lyap.empty()) record_fit(e.m, "fit", ns.t, ns.lyap, t_fit);
  }
  if (!ns.lyap.empty()) {
    e.m["lyap.initial"] = ns.lyap_a.front();
    e.m["lyap.max_increase"] =
        max_increase(ns.t, ns.lyap, e.spec.analysis.monotone_after_transits * e.T);
  }
  if (e.writing()) {
    io::trajectory_table(rec, ns).write(e.out / "trajectory.csv");
    Profile last(e.grid, rec.samples.back().H, rec.samples.back().V, ProfileRole::state);
    io::profile_table(last, d.C).write(e.out / "final_profile.csv");
  }
}

struct IssRun {
  TrajectoryRecord rec;
  std::vector<double> t, dev, Z;
  IssReport report;
};

IssRun iss_run(Env& e, const Discretization& d, const InflowSignal& inflow, const std::string& label) {
  ControllerSpec ctrl = e.spec.controller;
  ctrl.variant = ControllerVariant::pure_pi;
  const SimState eq = discrete_steady_state(d, ctrl, inflow(0.0));
  RunOptions ro;
  ro.horizon = e.horizon;
  ro.sample_every = e.sample_every;
  IssRun out;
  out.rec = run(d, ctrl, eq, inflow, ro);
  require_completed(out.rec, label);
  e.note_mass(out.rec, label);
  std::vector<double> qs_h2;
  for (const Sample& s : out.rec.samples) {
    const Profile qs = solve_steady(e.cfg, inflow(s.t), ctrl.H_c, e.grid);
    out.t.push_back(s.t);
    out.dev.push_back(h2_norm(s.H - qs.H, s.V - qs.V, e.grid));
    out.Z.push_back(s.Z);
  }
  IssOptions io_opt;
  io_opt.window_periods = e.spec.analysis.iss_window_periods;
  io_opt.transient = e.spec.analysis.iss_transient_periods * inflow.period();
  io_opt.trend_tolerance = e.spec.analysis.iss_trend_tolerance;
  out.report = iss_check(out.t, out.dev, out.Z, inflow, e.horizon, io_opt);
  e.m[label + ".gain"] = out.report.gain;
  e.m[label + ".deviation_sup"] = out.report.deviation_sup;
  e.m[label + ".forcing_sup"] = out.report.forcing_sup;
  e.m[label + ".trend_ratio"] = out.report.trend_ratio;
  e.m[label + ".bounded"] = out.report.bounded ? 1.0 : 0.0;
  e.m[label + ".z_drift"] = out.report.z_drift;
  if (e.writing()) {
    io::CsvTable t;
    t.add("t", out.t);
    t.add("deviation_qs", out.dev);
    t.add("Z", out.Z);
    std::vector<double> q0, qL;
    for (const Sample& s : out.rec.samples) {
      q0.push_back(s.Q0);
      qL.push_back(s.flux_L);
    }
    t.add("flux_0", q0);
    t.add("flux_L", qL);
    t.write(e.out / ("trajectory_" + label + ".csv"));
  }
  return out;
}

InflowSignal scaled_inflow(const Env& e, double factor) {
  Json doc = e.spec.inflow;
  doc["amplitude"] = doc.at("amplitude").get<double>() * factor;
  return io::inflow_from_json(doc, e.T);
}

void run_iss(Env& e, const Discretization& d) {
  std::vector<double> gains;
  double trend = 0.0, drift = 0.0;
  bool bounded = true;
  const auto& factors = e.spec.analysis.amplitude_factors;
  for (std::size_t k = 0; k < factors.size(); ++k) {
    const IssRun r = iss_run(e, d, scaled_inflow(e, factors[k]), "iss" + std::to_string(k));
    gains.push_back(r.report.gain);
    trend = std::max(trend, r.report.trend_ratio);
    drift = std::max(drift, r.report.z_drift);
    bounded = bounded && r.report.bounded;
  }
  e.m["iss.bounded"] = bounded ? 1.0 : 0.0;
  e.m["iss.trend_ratio"] = trend;
  e.m["iss.z_drift"] = drift;
  if (gains.size() >= 2) {
    const auto [lo, hi] = std::minmax_element(gains.begin(), gains.end());
    e.m["iss.gain_ratio"] = *hi / *lo;
    e.m["iss.gain_ratio_error"] = *hi / *lo - 1.0;
  }
}

void run_feedforward(Env& e, const Discretization& d) {
  const IssRun pi = iss_run(e, d, e.inflow, "pi");
  e.m["ff.pi_residual"] = pi.report.deviation_sup;

  ControllerSpec pin = e.spec.controller;
  pin.variant = ControllerVariant::pinned;
  const SimState ts = discrete_steady_state(d, pin, e.inflow(0.0));
  RunOptions rt;
  rt.horizon = e.horizon;
  rt.sample_every = e.sample_every;
  rt.record_step_flux = true;
  const TrajectoryRecord target = run(d, pin, ts, e.inflow, rt);
  require_completed(target, "target");
  e.note_mass(target, "target");

  ControllerSpec ff = e.spec.controller;
  ff.variant = ControllerVariant::feedforward;
  ff.feedforward_flux = SampledSignal(0.0, target.dt, target.step_flux_L);
  SimState init = perturbed(ts, e.spec.perturbation, e.grid, ff.H_c, e.q_ref / ff.H_c);
  init.Z = consistent_Z(d, ff, init.profile, 0.0);
  RunOptions rf;
  rf.horizon = e.horizon;
  rf.sample_every = e.sample_every;
  rf.dt = target.dt;
  const TrajectoryRecord rec = run(d, ff, init, e.inflow, rf);
  require_completed(rec, "feedforward");
  e.note_mass(rec, "ff");

  std::vector<double> t, dev;
  const std::size_t m = std::min(rec.samples.size(), target.samples.size());
  for (std::size_t i = 0; i < m; ++i) {
    const Sample& s = rec.samples[i];
    const Sample& r = target.samples[i];
    t.push_back(s.t);
    dev.push_back(h2_norm(s.H - r.H, s.V - r.V, e.grid));
  }
  const double P = e.inflow.period();
  double last = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] >= e.horizon - P - 1e-9) last = std::max(last, dev[i]);
  }
  e.m["ff.initial_deviation"] = dev.front();
  e.m["ff.final_deviation"] = last;
  if (dev.front() > 0.0) e.m["ff.decay_ratio"] = last / dev.front();
  if (pi.report.deviation_sup > 0.0) e.m["ff.ratio_to_pi"] = last / pi.report.deviation_sup;

  // Certificates along the target over its last forcing period.
  {
    const int per_period = 24;
    const long stride = std::max(1L, std::lround(P / per_period / e.sample_every));
    std::vector<Profile> snaps;
    for (std::size_t i = target.samples.size(); i-- > 0;) {
      if (target.samples[i].t < e.horizon - P - 1e-9) break;
      if ((target.samples.size() - 1 - i) % static_cast<std::size_t>(stride) == 0) {
        snaps.emplace_back(e.grid, target.samples[i].H, target.samples[i].V, ProfileRole::target);
      }
    }
    std::reverse(snaps.begin(), snaps.end());
    if (snaps.size() >= 3) {
      const auto certs = certify_along(e.cfg, snaps, stride * e.sample_every,
                                       e.spec.controller.k_p, e.spec.controller.k_I);
      const auto valid = std::count_if(certs.begin(), certs.end(),
                                       [](const Certificate& c) { return c.valid; });
      e.m["target_certificates.valid_fraction"] =
          static_cast<double>(valid) / static_cast<double>(certs.size());
      e.m["target_certificates.count"] = static_cast<double>(certs.size());
      e.m["target_certificates.epsilon"] = certs.front().epsilon;
    }
  }

  if (e.writing()) {
    io::CsvTable tab;
    tab.add("t", t);
    tab.add("deviation_target", dev);
    std::vector<double> Z, HL;
    for (std::size_t i = 0; i < m; ++i) {
      Z.push_back(rec.samples[i].Z);
      HL.push_back(rec.samples[i].H(e.grid.n - 1));
    }
    tab.add("Z", Z);
    tab.add("H_L", HL);
    tab.write(e.out / "trajectory_ff.csv");
    io::CsvTable ft;
    std::vector<double> tt(target.step_flux_L.size());
    for (std::size_t i = 0; i < tt.size(); ++i) tt[i] = static_cast<double>(i) * target.dt;
    ft.add("t", tt);
    ft.add("target_flux_L", target.step_flux_L);
    ft.write(e.out / "feedforward_flux.csv");
  }
}

void certificate_metrics(Metrics& m, const Certificate& c) {
  m["certificate.valid"] = c.valid ? 1.0 : 0.0;
  m["certificate.branch1"] = c.gains.branch == Branch::branch1 ? 1.0 : 0.0;
  m["certificate.branch2"] = c.gains.branch == Branch::branch2 ? 1.0 : 0.0;
  m["certificate.rejected"] = c.gains.branch == Branch::rejected ? 1.0 : 0.0;
  m["certificate.threshold2"] = c.gains.threshold2;
  if (c.valid) {
    m["certificate.epsilon"] = c.epsilon;
    m["certificate.mu"] = c.mu;
    m["certificate.q"] = c.q;
  }
  for (const auto& ch : c.checks) m["certificate.margin." + ch.name] = ch.margin;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ScenarioReport run_scenario(const ScenarioSpec& spec, const RunContext& ctx) {
  ScenarioReport rep;
  rep.name = spec.name;
  Json derived = Json::object();
  Env e{spec, ctx, rep.metrics, derived, {}, spec.channel, {}, {}, 0.0, 0.0, {}, 0.0, 0.0, 0.0};
  std::string stage = "setup";
  try {
    if (ctx.output_root) {
      e.out = *ctx.output_root / spec.name;
      fs::create_directories(e.out);
      rep.output_dir = e.out;
    }

    stage = "steady";
    e.grid = Grid::uniform(e.cfg.L, spec.n);
    e.q_ref = reference_flow(spec.inflow);
    e.base = solve_steady(e.cfg, e.q_ref, spec.controller.H_c, e.grid);
    e.T = e.cfg.L / min_lambda2(e.cfg, e.base);
    e.inflow = io::inflow_from_json(spec.inflow, e.T);
    rep.metrics["steady.residual"] = steady_residual(e.cfg, e.base);
    rep.metrics["steady.transit_time"] = e.T;
    rep.metrics["steady.min_fluvial_margin"] = validate_regime(e.cfg, e.base).min_fluvial_margin;
    derived["n"] = spec.n;
    derived["dx"] = e.grid.dx;
    derived["reference_flow"] = e.q_ref;
    derived["transit_time"] = e.T;
    if (e.inflow.period() > 0.0) derived["inflow_period"] = e.inflow.period();
    if (e.writing()) io::profile_table(e.base, slope_on(e.cfg, e.grid)).write(e.out / "steady_profile.csv");

    stage = "certificate";
    CertifyOptions co;
    co.epsilon = spec.epsilon;
    co.mu0 = spec.mu;
    const Certificate cert = certify(e.cfg, e.base, spec.controller.k_p, spec.controller.k_I, co);
    certificate_metrics(rep.metrics, cert);
    if (cert.fields.phi.size() == e.grid.n) {
      const Lemma2Report l2 = verify_lemma2(cert.fields, Field());
      rep.metrics["chi_identity.residual"] = l2.residual;
      rep.metrics["chi_identity.min_bracket"] = l2.min_bracket;
    }
    if (e.writing()) {
      io::write_json(e.out / "certificate.json", io::certificate_report(cert));
      io::certificate_table(cert).write(e.out / "certificate_fields.csv");
    }

    if (!ctx.certificate_only && spec.experiment != Experiment::certificate) {
      stage = "simulate";
      e.horizon = spec.horizon_periods ? *spec.horizon_periods * e.inflow.period()
                                       : *spec.horizon_transits * e.T;
      e.sample_every = spec.sample_every_transits * e.T;
      if (!(e.inflow.min_value(e.horizon) > 0.0)) {
        throw ParseError("inflow: discharge must stay positive over the horizon");
      }
      const Discretization d =
          Discretization::make(e.cfg, e.grid, default_sigma(e.cfg, e.base, spec.sigma_factor));
      derived["horizon"] = e.horizon;
      derived["sample_every"] = e.sample_every;
      derived["sigma"] = d.sigma;
      derived["cfl"] = d.cfl;
      derived["dt_safety"] = d.dt_safety;
      derived["dt"] = Json::object();
      switch (spec.experiment) {
        case Experiment::decay:
          run_decay(e, cert, d);
          break;
        case Experiment::iss:
          run_iss(e, d);
          break;
        case Experiment::feedforward:
          run_feedforward(e, d);
          break;
        case Experiment::certificate:
          break;
      }
      rep.metrics["hygiene.mass_balance"] = e.mass_worst;
    }
    stage.clear();
  } catch (const ParseError& err) {
    rep.code = ExitCode::parse;
    rep.message = err.what();
  } catch (const RegimeError& err) {
    rep.code = ExitCode::regime;
    rep.message = err.what();
  } catch (const StageError& err) {
    rep.code = err.is_regime ? ExitCode::regime : ExitCode::failure;
    rep.message = err.what();
  } catch (const std::exception& err) {
    rep.code = ExitCode::failure;
    rep.message = err.what();
  }
  rep.stage = stage;

  if (rep.code == ExitCode::ok) {
    bool cert_expected_valid_failed = false;
    bool other_failed = false;
    for (const Assertion& a : spec.assertions) {
      if (ctx.certificate_only && a.metric.rfind("certificate.", 0) != 0) continue;
      AssertionResult r;
      r.assertion = a;
      const auto it = rep.metrics.find(a.metric);
      if (it != rep.metrics.end()) r.actual = it->second;
      r.pass = r.actual && a.holds(*r.actual);
      if (!r.pass) {
        const bool expects_valid = a.metric == "certificate.valid" && a.holds(1.0) && !a.holds(0.0);
        (expects_valid ? cert_expected_valid_failed : other_failed) = true;
      }
      rep.assertions.push_back(r);
    }
    if (cert_expected_valid_failed) {
      rep.code = ExitCode::certificate;
      rep.stage = "certificate";
      rep.message = "certificate infeasible but expected valid";
    } else if (other_failed) {
      rep.code = ExitCode::assertion;
      rep.stage = "assertions";
      rep.message = "scenario assertions failed";
    }
  }

  if (!e.out.empty()) {
    try {
      Json manifest;
      manifest["name"] = spec.name;
      manifest["experiment"] = std::string(to_string(spec.experiment));
      manifest["timestamp"] = utc_timestamp();
      manifest["certificate_only"] = ctx.certificate_only;
      manifest["document"] = spec.document;
      manifest["derived"] = derived;
      io::write_json(e.out / "manifest.json", manifest);

      Json summary;
      summary["name"] = spec.name;
      summary["exit_code"] = static_cast<int>(rep.code);
      summary["stage"] = rep.stage;
      summary["message"] = rep.message;
      Json metrics = Json::object();
      for (const auto& [k, v] : rep.metrics) metrics[k] = std::isfinite(v) ? Json(v) : Json(nullptr);
      summary["metrics"] = metrics;
      Json asserts = Json::array();
      for (const auto& r : rep.assertions) {
        asserts.push_back({{"assertion", r.assertion.text()},
                           {"actual", r.actual ? Json(*r.actual) : Json(nullptr)},
                           {"pass", r.pass}});
      }
      summary["assertions"] = asserts;
      io::write_json(e.out / "summary.json", summary);
    } catch (const std::exception& err) {
      if (rep.code == ExitCode::ok) {
        rep.code = ExitCode::failure;
        rep.stage = "output";
        rep.message = err.what();
      }
    }
  }
  return rep;
}

}  // namespace svpi
