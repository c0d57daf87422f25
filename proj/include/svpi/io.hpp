#pragma once

// JSON conversion for configuration types and CSV output of fields and series.

#include <filesystem>
#include <initializer_list>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "svpi/analysis.hpp"
#include "svpi/certifier.hpp"
#include "svpi/channel.hpp"
#include "svpi/inflow.hpp"
#include "svpi/pde.hpp"

namespace svpi::io {

using Json = nlohmann::ordered_json;

/// Typed access to one JSON object. Remembers the keys read so finish() can
/// reject unknown ones. All failures throw ParseError naming the location.
class ObjectReader {
public:
  ObjectReader(const Json& j, std::string where);

  bool has(const std::string& key) const;
  double number(const std::string& key);
  double number(const std::string& key, double fallback);
  std::optional<double> optional_number(const std::string& key);
  int integer(const std::string& key);
  std::string string(const std::string& key);
  std::string string(const std::string& key, const std::string& fallback);
  std::vector<double> numbers(const std::string& key);
  const Json& child(const std::string& key);
  void finish() const;

private:
  double as_number(const Json& v, const std::string& key) const;

  const Json& j_;
  std::string where_;
  std::set<std::string> used_;
};

/// Keys: g, k, L, v_g, alpha, h_max, slope{variant, ...}. Slope variants:
/// constant{c0}, affine{c0, c1}, tabulated{x, c} or tabulated{sine{mean,
/// amplitude, periods, samples}}. Throws ParseError on missing, unknown or
/// invalid entries.
ChannelConfig channel_from_json(const Json& j);
Json to_json(const ChannelConfig& cfg);

/// Variants: constant{q}, sinusoid{mean, amplitude, omega},
/// ramp{q0, q1, t0, duration}, tabulated{t, q}. A sinusoid may give
/// omega_transit (omega times the transit time) instead of omega, in which
/// case transit_time must be supplied.
InflowSignal inflow_from_json(const Json& j,
                              std::optional<double> transit_time = std::nullopt);
Json to_json(const InflowSignal& q);

/// Keys: k_p, k_I, H_c, variant (pure_pi | feedforward). The feedforward
/// flux is never read from a document; scenarios generate it.
ControllerSpec controller_from_json(const Json& j);
Json to_json(const ControllerSpec& c);

/// Certificate report: gains, branch, coefficients, eps, mu, q and margins.
Json certificate_report(const Certificate& c);
Json to_json(const RegimeReport& r);
Json to_json(const DecayFit& f);
Json to_json(const IssReport& r);

/// Shortest round-trip text for a double ("nan", "inf", "-inf" otherwise).
std::string format_number(double v);

/// Column-oriented CSV file. All columns must have equal length.
class CsvTable {
public:
  void add(std::string name, std::vector<double> values);
  void add(std::string name, const Field& values);
  std::size_t rows() const;
  void write(const std::filesystem::path& path) const;

private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> cols_;
};

CsvTable profile_table(const Profile& p, const Field& slope);
CsvTable certificate_table(const Certificate& c);
/// t, h2, l2, |Z - Z_ref|, Lyapunov terms, H(L), boundary fluxes.
CsvTable trajectory_table(const TrajectoryRecord& rec, const NormSeries& ns);

/// Writes j with two-space indent and a trailing newline.
void write_json(const std::filesystem::path& path, const Json& j);
/// Throws ParseError on unreadable files or malformed JSON.
Json read_json_file(const std::filesystem::path& path);
Json parse_json(const std::string& text, const std::string& origin);

}  // namespace svpi::io
