#include "dnclab/harness/suites.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace dnclab;
using namespace dnclab::harness;

namespace {

enum Exit { kPass = 0, kFail = 1, kConfig = 2 };

struct Common {
  SuiteConfig config;
  std::string report;
  bool timings = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.config.seed, "root seed")->capture_default_str();
  cmd->add_option("--truncation", c.config.truncation, "truncation level for sequence operators")->capture_default_str();
  cmd->add_option("--depth", c.config.depth, "filtration depth")->capture_default_str();
  cmd->add_option("--tol", c.config.tol, "membership tolerance")->capture_default_str();
  cmd->add_option("--samples", c.config.samples, "samples per randomized check")->capture_default_str();
  cmd->add_option("--report", c.report, "write the JSON report to this path");
  cmd->add_flag("--timings", c.timings, "include wall-clock runtimes in the report");
}

void emit(const Json& j, const Common& c) {
  const std::string text = j.dump(2);
  std::cout << text << '\n';
  if (!c.report.empty()) write_report(j, c.report);
}

int verify(Common& c) {
  c.config.report_path.reset();
  const SuiteReport r = run_suite(c.config);
  emit(to_json(r, c.timings), c);
  std::cerr << (r.passed() ? "PASS " : "FAIL ") << r.suite << " (" << r.checks.size() << " checks)\n";
  return r.passed() ? kPass : kFail;
}

int verify_all(Common& c, int jobs) {
  c.config.report_path.reset();
  const AggregateReport agg = run_all(c.config, jobs);
  emit(to_json(agg, c.timings), c);
  for (const SuiteReport& s : agg.suites) {
    std::cerr << (s.passed() ? "PASS " : "FAIL ") << s.suite << '\n';
    for (const CheckResult& k : s.checks)
      if (!k.passed) std::cerr << "  " << k.name << ": " << k.detail << '\n';
  }
  return agg.passed() ? kPass : kFail;
}

int report_filtration(const Filtration& f, Common& c) {
  const ConditionReport r = verify_filtration(f, {.samples = c.config.samples, .seed = c.config.seed});
  emit(to_json(f, r), c);
  std::cerr << (r.passed() ? "PASS " : "FAIL ") << f.name << '\n';
  return r.passed() ? kPass : kFail;
}

/// Construction failures on user input count as configuration errors.
template <class Build>
Filtration build_filtration(Build build) {
  try {
    return build();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verification harness for DNC, tangent groupoids and Δ-filtrations"};
  app.require_subcommand(1);

  Common common;
  try {
    apply_env_overrides(common.config);
    if (common.config.report_path) common.report = *common.config.report_path;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kConfig;
  }

  CLI::App* verify_cmd = app.add_subcommand("verify", "run one suite");
  verify_cmd->add_option("--suite", common.config.suite, "suite name (see list-suites)")->required();
  add_common(verify_cmd, common);

  int jobs = 1;
  CLI::App* all_cmd = app.add_subcommand("verify-all", "run every suite");
  add_common(all_cmd, common);
  all_cmd->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();

  bool list_json = false;
  CLI::App* list_cmd = app.add_subcommand("list-suites", "print suite names and anchors");
  list_cmd->add_flag("--json", list_json, "print as JSON");

  std::vector<Index> delta{2, 4, 8};
  Index demo_depth = 3, margin = 5;
  CLI::App* demo_cmd = app.add_subcommand("demo", "example constructions");
  demo_cmd->require_subcommand(1);
  CLI::App* sphere_cmd = demo_cmd->add_subcommand("sphere-filtration", "verify the sphere filtration of a flag");
  sphere_cmd->add_option("--delta", delta, "dimension sequence")->delimiter(',')->capture_default_str();
  sphere_cmd->add_option("--depth", demo_depth, "number of levels")->capture_default_str();
  sphere_cmd->add_option("--margin", margin, "ambient dimensions beyond the last level")->capture_default_str();
  sphere_cmd->add_option("--samples", common.config.samples, "verifier samples")->capture_default_str();
  sphere_cmd->add_option("--seed", common.config.seed, "verifier seed")->capture_default_str();
  sphere_cmd->add_option("--report", common.report, "write the JSON report to this path");

  std::string spec_path;
  CLI::App* spec_cmd = app.add_subcommand("verify-filtration", "verify a filtration described in a JSON file");
  spec_cmd->add_option("--spec", spec_path, "JSON filtration spec")->required()->check(CLI::ExistingFile);
  spec_cmd->add_option("--samples", common.config.samples, "verifier samples")->capture_default_str();
  spec_cmd->add_option("--seed", common.config.seed, "verifier seed")->capture_default_str();
  spec_cmd->add_option("--report", common.report, "write the JSON report to this path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*list_cmd) {
      Json out = Json::array();
      for (const SuiteDef& s : builtin_registry().suites()) {
        if (list_json)
          out.push_back({{"suite", s.name}, {"anchor", s.anchor}});
        else
          std::cout << s.name << '\t' << s.anchor << '\n';
      }
      if (list_json) std::cout << out.dump(2) << '\n';
      return kPass;
    }
    if (*verify_cmd) return verify(common);
    if (*all_cmd) return verify_all(common, jobs);
    if (*sphere_cmd) {
      if (demo_depth < 1 || demo_depth > static_cast<Index>(delta.size()))
        throw ConfigError("--depth must lie in 1.." + std::to_string(delta.size()));
      if (common.config.samples < 1) throw ConfigError("--samples must be at least 1");
      delta.resize(static_cast<std::size_t>(demo_depth));
      return report_filtration(
          build_filtration([&] { return make_filtration_sphere(standard_flag(DimensionSequence(delta)), margin); }),
          common);
    }
    if (*spec_cmd) {
      if (common.config.samples < 1) throw ConfigError("--samples must be at least 1");
      const Json spec = read_json(spec_path);
      return report_filtration(build_filtration([&] { return filtration_from_json(spec); }), common);
    }
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kConfig;
  } catch (const UnknownSuite& e) {
    std::cerr << e.what() << '\n';
    return kConfig;
  } catch (const Json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return kFail;
  }
  return kConfig;
}
