#include "svpi/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "svpi/errors.hpp"

namespace svpi::io {

namespace {

template <class F>
auto rethrow_as_parse(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(where + ": " + e.what());
  }
}

SlopeSpec slope_from_json(const Json& j, double L) {
  ObjectReader r(j, "channel.slope");
  const std::string variant = r.string("variant");
  SlopeSpec out;
  if (variant == "constant") {
    out = ConstantSlope{r.number("c0")};
  } else if (variant == "affine") {
    out = AffineSlope{r.number("c0"), r.number("c1")};
  } else if (variant == "tabulated") {
    if (r.has("sine")) {
      ObjectReader s(r.child("sine"), "channel.slope.sine");
      const double mean = s.number("mean");
      const double amp = s.number("amplitude");
      const double periods = s.number("periods", 1.0);
      const double samples = s.number("samples", 2049);
      s.finish();
      if (samples < 4 || samples != std::floor(samples)) {
        throw ParseError("channel.slope.sine: samples must be an integer >= 4");
      }
      const int m = static_cast<int>(samples);
      std::vector<double> xs(static_cast<std::size_t>(m)), cs(xs.size());
      for (int i = 0; i < m; ++i) {
        const double x = L * i / (m - 1);
        xs[static_cast<std::size_t>(i)] = x;
        cs[static_cast<std::size_t>(i)] = mean + amp * std::sin(2.0 * M_PI * periods * x / L);
      }
      out = rethrow_as_parse("channel.slope", [&] { return TabulatedSlope(xs, cs); });
    } else {
      auto xs = r.numbers("x");
      auto cs = r.numbers("c");
      out = rethrow_as_parse("channel.slope", [&] { return TabulatedSlope(xs, cs); });
    }
  } else {
    throw ParseError("channel.slope: unknown variant '" + variant + "'");
  }
  r.finish();
  return out;
}

Json numbers_json(const std::vector<double>& v) {
  Json a = Json::array();
  for (double d : v) a.push_back(d);
  return a;
}

}  // namespace

ObjectReader::ObjectReader(const Json& j, std::string where)
    : j_(j), where_(std::move(where)) {
  if (!j_.is_object()) throw ParseError(where_ + ": expected an object");
}

bool ObjectReader::has(const std::string& key) const { return j_.contains(key); }

double ObjectReader::as_number(const Json& v, const std::string& key) const {
  if (!v.is_number()) throw ParseError(where_ + ": '" + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ParseError(where_ + ": '" + key + "' is not finite");
  return d;
}

double ObjectReader::number(const std::string& key) {
  used_.insert(key);
  if (!j_.contains(key)) throw ParseError(where_ + ": missing '" + key + "'");
  return as_number(j_.at(key), key);
}

double ObjectReader::number(const std::string& key, double fallback) {
  if (!has(key)) {
    used_.insert(key);
    return fallback;
  }
  return number(key);
}

std::optional<double> ObjectReader::optional_number(const std::string& key) {
  if (!has(key)) return std::nullopt;
  return number(key);
}

int ObjectReader::integer(const std::string& key) {
  const double d = number(key);
  if (d != std::floor(d) || std::abs(d) > 1e9) {
    throw ParseError(where_ + ": '" + key + "' must be an integer");
  }
  return static_cast<int>(d);
}

std::string ObjectReader::string(const std::string& key) {
  used_.insert(key);
  if (!j_.contains(key) || !j_.at(key).is_string()) {
    throw ParseError(where_ + ": '" + key + "' must be a string");
  }
  return j_.at(key).get<std::string>();
}

std::string ObjectReader::string(const std::string& key, const std::string& fallback) {
  if (!has(key)) {
    used_.insert(key);
    return fallback;
  }
  return string(key);
}

std::vector<double> ObjectReader::numbers(const std::string& key) {
  used_.insert(key);
  if (!j_.contains(key) || !j_.at(key).is_array()) {
    throw ParseError(where_ + ": '" + key + "' must be an array of numbers");
  }
  std::vector<double> out;
  for (const auto& v : j_.at(key)) out.push_back(as_number(v, key));
  return out;
}

const Json& ObjectReader::child(const std::string& key) {
  used_.insert(key);
  if (!j_.contains(key)) throw ParseError(where_ + ": missing '" + key + "'");
  return j_.at(key);
}

void ObjectReader::finish() const {
  for (const auto& [key, value] : j_.items()) {
    if (!used_.count(key)) throw ParseError(where_ + ": unknown key '" + key + "'");
  }
}

ChannelConfig channel_from_json(const Json& j) {
  ObjectReader r(j, "channel");
  ChannelConfig cfg;
  cfg.g = r.number("g", 9.81);
  cfg.k = r.number("k", 0.0);
  cfg.L = r.number("L");
  cfg.v_g = r.number("v_g", 1.0);
  cfg.alpha = r.number("alpha");
  cfg.h_max = r.number("h_max");
  if (!(cfg.L > 0.0)) throw ParseError("channel: L must be positive");
  cfg.slope = r.has("slope") ? slope_from_json(r.child("slope"), cfg.L) : ConstantSlope{};
  r.finish();
  rethrow_as_parse("channel", [&] {
    cfg.validate();
    return 0;
  });
  return cfg;
}

Json to_json(const ChannelConfig& cfg) {
  Json j;
  j["g"] = cfg.g;
  j["k"] = cfg.k;
  j["L"] = cfg.L;
  j["v_g"] = cfg.v_g;
  j["alpha"] = cfg.alpha;
  j["h_max"] = cfg.h_max;
  Json s;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ConstantSlope>) {
          s["variant"] = "constant";
          s["c0"] = v.c0;
        } else if constexpr (std::is_same_v<T, AffineSlope>) {
          s["variant"] = "affine";
          s["c0"] = v.c0;
          s["c1"] = v.c1;
        } else {
          s["variant"] = "tabulated";
          s["x"] = numbers_json(v.x);
          s["c"] = numbers_json(v.c);
        }
      },
      cfg.slope);
  j["slope"] = s;
  return j;
}

InflowSignal inflow_from_json(const Json& j, std::optional<double> transit_time) {
  ObjectReader r(j, "inflow");
  const std::string variant = r.string("variant");
  InflowSignal out;
  if (variant == "constant") {
    const double q = r.number("q");
    if (!(q > 0.0)) throw ParseError("inflow: q must be positive");
    out = InflowSignal(ConstantInflow{q});
  } else if (variant == "sinusoid") {
    SinusoidInflow s;
    s.q_mean = r.number("mean");
    s.amplitude = r.number("amplitude");
    if (r.has("omega_transit")) {
      if (r.has("omega")) throw ParseError("inflow: give omega or omega_transit, not both");
      if (!transit_time) throw ParseError("inflow: omega_transit needs a transit time");
      s.omega = r.number("omega_transit") / *transit_time;
    } else {
      s.omega = r.number("omega");
    }
    if (!(s.omega > 0.0)) throw ParseError("inflow: omega must be positive");
    if (!(std::abs(s.amplitude) < s.q_mean)) {
      throw ParseError("inflow: sinusoid must stay positive (|amplitude| < mean)");
    }
    out = InflowSignal(s);
  } else if (variant == "ramp") {
    RampInflow q;
    q.q0 = r.number("q0");
    q.q1 = r.number("q1");
    q.t0 = r.number("t0", 0.0);
    q.duration = r.number("duration");
    if (!(q.q0 > 0.0 && q.q1 > 0.0)) throw ParseError("inflow: ramp levels must be positive");
    if (!(q.duration > 0.0)) throw ParseError("inflow: ramp duration must be positive");
    out = InflowSignal(q);
  } else if (variant == "tabulated") {
    auto ts = r.numbers("t");
    auto qs = r.numbers("q");
    out = rethrow_as_parse("inflow", [&] { return InflowSignal(TabulatedInflow(ts, qs)); });
  } else {
    throw ParseError("inflow: unknown variant '" + variant + "'");
  }
  r.finish();
  return out;
}

Json to_json(const InflowSignal& q) {
  Json j;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ConstantInflow>) {
          j["variant"] = "constant";
          j["q"] = v.q;
        } else if constexpr (std::is_same_v<T, SinusoidInflow>) {
          j["variant"] = "sinusoid";
          j["mean"] = v.q_mean;
          j["amplitude"] = v.amplitude;
          j["omega"] = v.omega;
        } else if constexpr (std::is_same_v<T, RampInflow>) {
          j["variant"] = "ramp";
          j["q0"] = v.q0;
          j["q1"] = v.q1;
          j["t0"] = v.t0;
          j["duration"] = v.duration;
        } else {
          j["variant"] = "tabulated";
          j["t"] = numbers_json(v.t);
          j["q"] = numbers_json(v.q);
        }
      },
      q.variant());
  return j;
}

ControllerSpec controller_from_json(const Json& j) {
  ObjectReader r(j, "controller");
  ControllerSpec c;
  c.k_p = r.number("k_p");
  c.k_I = r.number("k_I");
  c.H_c = r.number("H_c");
  const std::string v = r.string("variant", "pure_pi");
  if (v == "pure_pi") {
    c.variant = ControllerVariant::pure_pi;
  } else if (v == "feedforward") {
    c.variant = ControllerVariant::feedforward;
  } else {
    throw ParseError("controller: unknown variant '" + v + "'");
  }
  r.finish();
  if (!(c.H_c > 0.0)) throw ParseError("controller: H_c must be positive");
  return c;
}

Json to_json(const ControllerSpec& c) {
  Json j;
  j["k_p"] = c.k_p;
  j["k_I"] = c.k_I;
  j["H_c"] = c.H_c;
  j["variant"] = std::string(to_string(c.variant));
  return j;
}

Json certificate_report(const Certificate& c) {
  Json j;
  j["valid"] = c.valid;
  j["diagnostic"] = c.diagnostic;
  j["k_p"] = c.k_p;
  j["k_I"] = c.k_I;
  j["branch"] = std::string(to_string(c.gains.branch));
  j["threshold2"] = c.gains.threshold2;
  j["margin_kp1"] = c.gains.margin_kp1;
  j["margin_ki"] = c.gains.margin_ki;
  j["margin2"] = c.gains.margin2;
  j["k1"] = c.bc.k1;
  j["k2"] = c.bc.k2;
  j["k3"] = c.bc.k3;
  j["epsilon"] = c.epsilon;
  j["mu"] = c.mu;
  j["q"] = c.q;
  Json checks = Json::array();
  for (const auto& ch : c.checks) {
    checks.push_back({{"name", ch.name}, {"margin", ch.margin}, {"pass", ch.pass}});
  }
  j["checks"] = checks;
  j["discriminant"] = c.boundary.discriminant;
  j["linear_in_q"] = c.boundary.linear_in_q;
  j["identity_residual"] = c.interior.identity_residual;
  return j;
}

Json to_json(const RegimeReport& r) {
  return Json{{"pass", r.pass},
              {"min_fluvial_margin", r.min_fluvial_margin},
              {"max_height_excess", r.max_height_excess},
              {"min_height", r.min_height},
              {"worst_node", r.worst_node}};
}

Json to_json(const DecayFit& f) {
  return Json{{"gamma", f.gamma}, {"r2", f.r2}, {"log_c", f.log_c}, {"samples", f.samples}};
}

Json to_json(const IssReport& r) {
  Json j{{"exponential_regime", r.exponential_regime},
         {"forcing_sup", r.forcing_sup},
         {"deviation_sup", r.deviation_sup},
         {"window_start", r.window_start},
         {"window_end", r.window_end},
         {"trend_ratio", r.trend_ratio},
         {"bounded", r.bounded},
         {"z_drift", r.z_drift},
         {"z_stationary", r.z_stationary}};
  j["gain"] = std::isfinite(r.gain) ? Json(r.gain) : Json(nullptr);
  j["period_sup"] = numbers_json(r.period_sup);
  return j;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void CsvTable::add(std::string name, std::vector<double> values) {
  if (!cols_.empty() && values.size() != cols_.front().size()) {
    throw DomainError("CsvTable: column '" + name + "' has a different length");
  }
  names_.push_back(std::move(name));
  cols_.push_back(std::move(values));
}

void CsvTable::add(std::string name, const Field& values) {
  add(std::move(name), std::vector<double>(values.data(), values.data() + values.size()));
}

std::size_t CsvTable::rows() const { return cols_.empty() ? 0 : cols_.front().size(); }

void CsvTable::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (std::size_t c = 0; c < names_.size(); ++c) out << (c ? "," : "") << names_[c];
  out << '\n';
  for (std::size_t i = 0; i < rows(); ++i) {
    for (std::size_t c = 0; c < cols_.size(); ++c) {
      out << (c ? "," : "") << format_number(cols_[c][i]);
    }
    out << '\n';
  }
}

CsvTable profile_table(const Profile& p, const Field& slope) {
  CsvTable t;
  t.add("x", p.grid.x);
  t.add("H", p.H);
  t.add("V", p.V);
  t.add("flux", p.flux());
  if (slope.size() == p.grid.n) t.add("C", slope);
  return t;
}

CsvTable certificate_table(const Certificate& c) {
  CsvTable t;
  const auto& f = c.fields;
  t.add("x", f.grid.x);
  t.add("lambda1", f.lambda1);
  t.add("lambda2", f.lambda2);
  t.add("gamma1", f.gamma1);
  t.add("gamma2", f.gamma2);
  t.add("delta1", f.delta1);
  t.add("delta2", f.delta2);
  t.add("phi1", f.phi1);
  t.add("phi2", f.phi2);
  if (c.chi.size() == f.grid.n) t.add("chi", c.chi);
  if (c.w.f1.size() == f.grid.n) {
    t.add("f1", c.w.f1);
    t.add("f2", c.w.f2);
  }
  if (c.interior.c3a.size() == f.grid.n) {
    t.add("c3a", c.interior.c3a);
    t.add("c3c", c.interior.c3c);
    t.add("c3b", c.interior.c3b);
  }
  return t;
}

CsvTable trajectory_table(const TrajectoryRecord& rec, const NormSeries& ns) {
  CsvTable t;
  std::vector<double> Z, HL, q0, qL;
  for (const auto& s : rec.samples) {
    Z.push_back(s.Z);
    HL.push_back(s.H(s.H.size() - 1));
    q0.push_back(s.Q0);
    qL.push_back(s.flux_L);
  }
  t.add("t", ns.t);
  t.add("h2", ns.h2);
  t.add("l2", ns.l2);
  t.add("z_dev", ns.z_abs);
  if (!ns.lyap.empty()) {
    t.add("lyap", ns.lyap);
    t.add("lyap_a", ns.lyap_a);
    t.add("lyap_b", ns.lyap_b);
    t.add("lyap_c", ns.lyap_c);
  }
  t.add("Z", Z);
  t.add("H_L", HL);
  t.add("flux_0", q0);
  t.add("flux_L", qL);
  return t;
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

Json parse_json(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(origin + ": " + e.what());
  }
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str(), path.string());
}

}  // namespace svpi::io
