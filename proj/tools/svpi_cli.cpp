// svpi: run, list, describe and certify channel-control scenarios.
//
//   svpi list
//   svpi describe <name>
//   svpi run <file|name|all>... [--set key=value]... [--out DIR] [--parallel]
//   svpi certify <file|name>... [--set key=value]... [--out DIR]
//
// Artifacts go to --out, else $SVPI_OUTPUT_ROOT, else ./svpi-runs.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "svpi/errors.hpp"
#include "svpi/io.hpp"
#include "svpi/scenario.hpp"

namespace fs = std::filesystem;

namespace {

struct Job {
  std::string source;
  svpi::io::Json doc;
  std::string load_error;
};

Job load(const std::string& source, const std::vector<std::string>& overrides) {
  Job job{source, {}, {}};
  try {
    svpi::io::Json doc;
    if (fs::exists(source)) {
      doc = svpi::io::read_json_file(source);
    } else {
      const auto names = svpi::bundled_scenario_names();
      if (std::find(names.begin(), names.end(), source) == names.end()) {
        throw svpi::ParseError("'" + source + "' is neither a file nor a bundled scenario");
      }
      doc = svpi::io::parse_json(svpi::bundled_scenario_text(source), source);
    }
    job.doc = svpi::apply_overrides(std::move(doc), overrides);
  } catch (const std::exception& e) {
    job.load_error = e.what();
  }
  return job;
}

svpi::ScenarioReport execute(const Job& job, const svpi::RunContext& ctx) {
  if (!job.load_error.empty()) {
    svpi::ScenarioReport r;
    r.name = job.source;
    r.code = svpi::ExitCode::parse;
    r.stage = "parse";
    r.message = job.load_error;
    return r;
  }
  try {
    return svpi::run_scenario(svpi::parse_scenario(job.doc), ctx);
  } catch (const std::exception& e) {
    svpi::ScenarioReport r;
    r.name = job.source;
    r.code = svpi::ExitCode::parse;
    r.stage = "parse";
    r.message = e.what();
    return r;
  }
}

void print_report(const svpi::ScenarioReport& r) {
  const int code = static_cast<int>(r.code);
  std::cout << (code == 0 ? "PASS " : "FAIL ") << r.name << " (exit " << code << ")";
  if (!r.stage.empty()) std::cout << " stage=" << r.stage;
  std::cout << '\n';
  if (!r.message.empty()) std::cout << "  " << r.message << '\n';
  for (const auto& a : r.assertions) {
    std::cout << "  [" << (a.pass ? "ok" : "FAILED") << "] " << a.assertion.text() << "  actual=";
    if (a.actual) {
      std::cout << svpi::io::format_number(*a.actual);
    } else {
      std::cout << "missing";
    }
    std::cout << '\n';
  }
  if (!r.output_dir.empty()) std::cout << "  artifacts: " << r.output_dir.string() << '\n';
}

fs::path output_root(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("SVPI_OUTPUT_ROOT"); env && *env) return env;
  return "svpi-runs";
}

int run_all(std::vector<std::string> sources, const std::vector<std::string>& overrides,
            const std::string& out, bool parallel, bool certificate_only) {
  if (sources.size() == 1 && sources[0] == "all") sources = svpi::bundled_scenario_names();
  svpi::RunContext ctx;
  ctx.output_root = output_root(out);
  ctx.certificate_only = certificate_only;

  std::vector<Job> jobs;
  for (const auto& s : sources) jobs.push_back(load(s, overrides));

  std::vector<svpi::ScenarioReport> reports;
  if (parallel && jobs.size() > 1) {
    std::vector<std::future<svpi::ScenarioReport>> futures;
    for (const auto& job : jobs) {
      futures.push_back(std::async(std::launch::async, execute, std::cref(job), std::cref(ctx)));
    }
    for (auto& f : futures) reports.push_back(f.get());
  } else {
    for (const auto& job : jobs) reports.push_back(execute(job, ctx));
  }

  int worst = 0;
  for (const auto& r : reports) {
    print_report(r);
    worst = std::max(worst, static_cast<int>(r.code));
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PI boundary control of the Saint-Venant equations"};
  app.require_subcommand(1);

  std::vector<std::string> sources;
  std::vector<std::string> overrides;
  std::string out;
  bool parallel = false;
  std::string name;

  auto* run = app.add_subcommand("run", "Run scenarios end to end ('all' runs every bundled one)");
  run->add_option("scenario", sources, "Scenario file or bundled name")->required();
  run->add_option("--set", overrides, "Override a document entry, e.g. grid.n=401");
  run->add_option("--out", out, "Output root (default $SVPI_OUTPUT_ROOT or ./svpi-runs)");
  run->add_flag("--parallel", parallel, "Run the scenarios concurrently");

  auto* certify = app.add_subcommand("certify", "Steady state and certificate only");
  certify->add_option("scenario", sources, "Scenario file or bundled name")->required();
  certify->add_option("--set", overrides, "Override a document entry");
  certify->add_option("--out", out, "Output root");

  auto* list = app.add_subcommand("list", "List bundled scenarios");
  auto* describe = app.add_subcommand("describe", "Describe a bundled scenario");
  describe->add_option("name", name, "Scenario name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(svpi::ExitCode::parse);
  }

  try {
    if (*list) {
      std::cout << svpi::list_scenarios();
      return 0;
    }
    if (*describe) {
      std::cout << svpi::describe_scenario(name);
      return 0;
    }
    if (*run) return run_all(sources, overrides, out, parallel, false);
    if (*certify) return run_all(sources, overrides, out, false, true);
  } catch (const svpi::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(svpi::ExitCode::parse);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(svpi::ExitCode::failure);
  }
  return 0;
}
