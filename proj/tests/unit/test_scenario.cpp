#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "fixtures.hpp"
#include "svpi/errors.hpp"
#include "svpi/io.hpp"
#include "svpi/scenario.hpp"

namespace fs = std::filesystem;
using svpi::ExitCode;
using svpi::io::Json;

namespace {

Json bundled(const std::string& name) {
  return svpi::io::parse_json(svpi::bundled_scenario_text(name), name);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("svpi-unit-" + tag);
  fs::remove_all(p);
  return p;
}

// Small homogeneous decay run: a few transit times on a coarse grid.
Json quick_decay() {
  return svpi::apply_overrides(bundled("homogeneous-branch1"),
                               {"grid.n=129", "horizon_transits=3", "sample_every_transits=0.05",
                                "assertions=[]", "perturbation.relative_amplitude=1e-4"});
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("channel config round trip") {
  const svpi::ChannelConfig c = fixtures::friction_slope();
  const Json j = svpi::io::to_json(c);
  const svpi::ChannelConfig back = svpi::io::channel_from_json(j);
  CHECK(back.k == c.k);
  CHECK(back.L == c.L);
  for (double x : {0.0, 1.234, 7.7, 10.0}) {
    CHECK(svpi::slope_at(back, x) == doctest::Approx(svpi::slope_at(c, x)).epsilon(1e-15));
  }
  CHECK(svpi::io::to_json(back) == j);
}

TEST_CASE("inflow parsing") {
  const auto q = svpi::io::inflow_from_json(
      Json::parse(R"({"variant": "sinusoid", "mean": 2, "amplitude": 0.1, "omega_transit": 0.05})"), 2.5);
  CHECK(q.period() == doctest::Approx(2 * 3.141592653589793 * 2.5 / 0.05));
  CHECK_THROWS_AS(svpi::io::inflow_from_json(Json::parse(R"({"variant": "constant", "q": -1})")),
                  svpi::ParseError);
  CHECK_THROWS_AS(svpi::io::inflow_from_json(
                      Json::parse(R"({"variant": "sinusoid", "mean": 2, "amplitude": 0.1, "omega_transit": 0.05})")),
                  svpi::ParseError);
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 6.02e23}) {
    CHECK(std::stod(svpi::io::format_number(v)) == v);
  }
  CHECK(svpi::io::format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

}  // TEST_SUITE

TEST_SUITE("scenario") {

TEST_CASE("every bundled scenario parses") {
  const auto names = svpi::bundled_scenario_names();
  for (const char* required : {"homogeneous-branch1", "rejected-gains", "friction-slope-steady-hold",
                               "friction-slope-branch1", "friction-slope-branch2",
                               "homogeneous-necessity", "iss-sinusoid", "feedforward-tracking"}) {
    CHECK(std::find(names.begin(), names.end(), required) != names.end());
  }
  for (const auto& n : names) {
    const svpi::ScenarioSpec s = svpi::parse_scenario(bundled(n));
    CHECK(s.name == n);
    CHECK_FALSE(s.assertions.empty());
  }
}

TEST_CASE("list and describe") {
  const std::string list = svpi::list_scenarios();
  for (const auto& n : svpi::bundled_scenario_names()) CHECK(list.find(n) != std::string::npos);
  CHECK(svpi::describe_scenario("iss-sinusoid").find("time-varying inflow") != std::string::npos);
  CHECK_THROWS_AS(svpi::describe_scenario("nope"), svpi::DomainError);
}

TEST_CASE("malformed documents are parse errors") {
  CHECK_THROWS_AS(svpi::parse_scenario(svpi::apply_overrides(bundled("rejected-gains"), {"channel.L=-10"})),
                  svpi::ParseError);
  CHECK_THROWS_AS(svpi::parse_scenario(svpi::apply_overrides(bundled("rejected-gains"), {"grid.n=200"})),
                  svpi::ParseError);
  CHECK_THROWS_AS(svpi::parse_scenario(svpi::apply_overrides(bundled("rejected-gains"), {"colour=1"})),
                  svpi::ParseError);
  CHECK_THROWS_AS(svpi::parse_scenario(svpi::apply_overrides(bundled("homogeneous-branch1"),
                                                             {"perturbation.center=0.1"})),
                  svpi::ParseError);
  CHECK_THROWS_AS(svpi::parse_scenario(svpi::apply_overrides(bundled("iss-sinusoid"),
                                                             {"controller.variant=feedforward"})),
                  svpi::ParseError);
  CHECK_THROWS_AS(svpi::apply_overrides(bundled("rejected-gains"), {"grid.n"}), svpi::ParseError);
}

TEST_CASE("overrides address nested keys and array entries") {
  const Json j = svpi::apply_overrides(bundled("rejected-gains"),
                                       {"grid.n=401", "description=edited", "assertions.1.value=false"});
  CHECK(j["grid"]["n"] == 401);
  CHECK(j["description"] == "edited");
  CHECK(j["assertions"][1]["value"] == false);
}

TEST_CASE("assertions") {
  const svpi::Assertion a{"fit.gamma", ">", 0.01};
  CHECK(a.holds(0.02));
  CHECK_FALSE(a.holds(0.01));
  CHECK_FALSE(a.holds(std::numeric_limits<double>::quiet_NaN()));
  CHECK(svpi::Assertion{"x", "<=", 1.0}.holds(1.0));
  CHECK(svpi::Assertion{"x", "!=", 1.0}.holds(2.0));
}

TEST_CASE("rejected-gains exits 0 with its negative assertions satisfied") {
  const auto rep = svpi::run_scenario(svpi::parse_scenario(bundled("rejected-gains")));
  CHECK(rep.code == ExitCode::ok);
  CHECK(rep.metrics.at("certificate.valid") == 0.0);
  for (const auto& a : rep.assertions) CHECK(a.pass);
}

TEST_CASE("exit codes for regime, certificate and assertion failures") {
  SUBCASE("setpoint above the height cap is a regime failure") {
    const auto rep = svpi::run_scenario(
        svpi::parse_scenario(svpi::apply_overrides(bundled("rejected-gains"), {"controller.H_c=6"})));
    CHECK(rep.code == ExitCode::regime);
    CHECK(rep.stage == "steady");
  }
  SUBCASE("expected-valid certificate that is infeasible") {
    svpi::RunContext ctx;
    ctx.certificate_only = true;
    const auto rep = svpi::run_scenario(
        svpi::parse_scenario(svpi::apply_overrides(bundled("homogeneous-branch1"),
                                                   {"controller.k_p=-2", "controller.k_I=0.5"})),
        ctx);
    CHECK(rep.code == ExitCode::certificate);
  }
  SUBCASE("any other failed assertion") {
    const auto rep = svpi::run_scenario(svpi::parse_scenario(
        svpi::apply_overrides(bundled("rejected-gains"), {"assertions.1.value=false"})));
    CHECK(rep.code == ExitCode::assertion);
  }
}

TEST_CASE("runs are deterministic and the manifest records every parameter") {
  const svpi::ScenarioSpec spec = svpi::parse_scenario(quick_decay());
  const fs::path a = scratch_dir("a"), b = scratch_dir("b");
  const auto ra = svpi::run_scenario(spec, {a, false});
  const auto rb = svpi::run_scenario(spec, {b, false});
  REQUIRE(ra.code == ExitCode::ok);
  REQUIRE(rb.code == ExitCode::ok);
  CHECK(ra.metrics.at("fit_h2.gamma") == rb.metrics.at("fit_h2.gamma"));
  for (const char* f : {"trajectory.csv", "final_profile.csv", "steady_profile.csv",
                        "certificate_fields.csv", "certificate.json", "summary.json"}) {
    const fs::path pa = a / spec.name / f;
    REQUIRE(fs::exists(pa));
    CHECK_MESSAGE(slurp(pa) == slurp(b / spec.name / f), f);
  }
  const Json m = svpi::io::read_json_file(a / spec.name / "manifest.json");
  CHECK(m["document"] == spec.document);
  for (const char* key : {"n", "dx", "transit_time", "horizon", "sample_every", "sigma", "cfl", "dt"}) {
    CHECK_MESSAGE(m["derived"].contains(key), key);
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

}  // TEST_SUITE
