#pragma once

// Suite configuration, the per-check recording context, the suite registry
// and deterministic JSON reports.

#include "dnclab/errors.hpp"
#include "dnclab/random.hpp"
#include "dnclab/serialization.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace dnclab::harness {

using dnclab::to_json;

struct SuiteConfig {
  std::string suite;
  std::uint64_t seed = 42;
  Index truncation = 24;
  Index depth = 4;
  double tol = 1e-7;
  int samples = 64;
  std::optional<std::string> report_path;

  void validate() const {
    if (!(tol > 0.0) || !std::isfinite(tol)) throw ConfigError("tol must be positive");
    if (samples < 1) throw ConfigError("samples must be at least 1");
    if (depth < 1) throw ConfigError("depth must be at least 1");
    if (truncation < 4) throw ConfigError("truncation must be at least 4");
  }
};

inline constexpr const char* kEnvPrefix = "DNCLAB_";

namespace detail {

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    T value{};
    if constexpr (std::is_same_v<T, double>)
      value = std::stod(text, &used);
    else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!text.empty() && text[0] == '-') throw std::invalid_argument("negative");
      value = std::stoull(text, &used);
    } else
      value = static_cast<T>(std::stoll(text, &used));
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    throw ConfigError(key + ": cannot parse '" + text + "'");
  }
}

}  // namespace detail

/// Applies DNCLAB_SEED, DNCLAB_TRUNCATION, DNCLAB_DEPTH, DNCLAB_TOL,
/// DNCLAB_SAMPLES and DNCLAB_REPORT. The lookup is injectable for tests.
inline void apply_env_overrides(SuiteConfig& c,
                                const std::function<const char*(const char*)>& lookup = [](const char* k) {
                                  return std::getenv(k);
                                }) {
  auto get = [&](const char* name) -> std::optional<std::string> {
    const std::string key = std::string(kEnvPrefix) + name;
    const char* v = lookup(key.c_str());
    if (!v) return std::nullopt;
    return std::string(v);
  };
  if (auto v = get("SEED")) c.seed = detail::parse_number<std::uint64_t>("DNCLAB_SEED", *v);
  if (auto v = get("TRUNCATION")) c.truncation = detail::parse_number<Index>("DNCLAB_TRUNCATION", *v);
  if (auto v = get("DEPTH")) c.depth = detail::parse_number<Index>("DNCLAB_DEPTH", *v);
  if (auto v = get("TOL")) c.tol = detail::parse_number<double>("DNCLAB_TOL", *v);
  if (auto v = get("SAMPLES")) c.samples = detail::parse_number<int>("DNCLAB_SAMPLES", *v);
  if (auto v = get("REPORT")) c.report_path = *v;
}

struct CheckResult {
  std::string name;
  std::string anchor;
  bool passed = true;
  Json residuals = Json::object();
  std::string detail;
  /// First offending instance, for replay.
  Json instance;
  double runtime_ms = 0.0;
};

/// Recording context of one check. Randomness comes from a stream keyed by
/// (seed, suite, check index).
class Check {
 public:
  Check(const SuiteConfig& config, Rng rng) : config(config), rng(rng) {}

  const SuiteConfig& config;
  Rng rng;

  void record(const std::string& key, const Json& value) { result_.residuals[key] = value; }

  /// Fails on the first false condition and keeps its instance.
  bool require(bool ok, const std::string& what, const Json& instance = nullptr) {
    if (!ok && result_.passed) {
      result_.passed = false;
      result_.detail = what;
      result_.instance = instance;
    }
    return ok;
  }

  /// Tracks max(value) under `key` and requires value <= bound.
  bool bound(const std::string& key, double value, double limit, const Json& instance = nullptr) {
    Json& r = result_.residuals[key];
    if (r.is_null() || (r.is_number() && r.get<double>() < value) || std::isnan(value)) r = value;
    return require(value <= limit, key + " = " + dnclab::detail::fmt(value) + " exceeds " + dnclab::detail::fmt(limit), instance);
  }

  /// Tracks min(value) under `key` and requires value >= limit.
  bool at_least(const std::string& key, double value, double limit, const Json& instance = nullptr) {
    Json& r = result_.residuals[key];
    if (r.is_null() || (r.is_number() && r.get<double>() > value) || std::isnan(value)) r = value;
    return require(value >= limit, key + " = " + dnclab::detail::fmt(value) + " below " + dnclab::detail::fmt(limit), instance);
  }

  void count(const std::string& key, long n = 1) {
    Json& r = result_.residuals[key];
    r = (r.is_null() ? 0L : r.get<long>()) + n;
  }

  CheckResult& result() { return result_; }

 private:
  CheckResult result_;
};

class SuiteContext {
 public:
  SuiteContext(const SuiteConfig& config, std::string suite, std::string anchor)
      : config(config), suite_(std::move(suite)), anchor_(std::move(anchor)) {}

  const SuiteConfig& config;

  /// Runs one check; exceptions become failures carrying their message.
  void check(const std::string& name, const std::function<void(Check&)>& body, const std::string& anchor = {}) {
    const auto index = static_cast<std::uint64_t>(results_.size());
    Check c(config, Rng::stream(config.seed, suite_, index));
    const auto start = std::chrono::steady_clock::now();
    try {
      body(c);
    } catch (const std::exception& e) {
      c.require(false, std::string("exception: ") + e.what());
    }
    CheckResult r = std::move(c.result());
    r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    r.name = name;
    r.anchor = anchor.empty() ? anchor_ : anchor;
    results_.push_back(std::move(r));
  }

  std::vector<CheckResult> take() { return std::move(results_); }

 private:
  std::string suite_;
  std::string anchor_;
  std::vector<CheckResult> results_;
};

struct SuiteDef {
  std::string name;
  std::string anchor;
  std::function<void(SuiteContext&)> run;
};

class Registry {
 public:
  void add(SuiteDef s) {
    for (const SuiteDef& d : suites_)
      if (d.name == s.name) throw ConfigError("duplicate suite " + s.name);
    suites_.push_back(std::move(s));
  }

  const SuiteDef& find(const std::string& name) const {
    for (const SuiteDef& d : suites_)
      if (d.name == name) return d;
    throw UnknownSuite("unknown suite '" + name + "'");
  }

  const std::vector<SuiteDef>& suites() const { return suites_; }

 private:
  std::vector<SuiteDef> suites_;
};

struct SuiteReport {
  std::string suite;
  std::string anchor;
  SuiteConfig config;
  std::vector<CheckResult> checks;
  double runtime_ms = 0.0;

  bool passed() const {
    for (const CheckResult& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

struct AggregateReport {
  SuiteConfig config;
  std::vector<SuiteReport> suites;
  double runtime_ms = 0.0;

  bool passed() const {
    for (const SuiteReport& s : suites)
      if (!s.passed()) return false;
    return true;
  }
};

inline Json config_json(const SuiteConfig& c, bool with_suite) {
  Json j;
  if (with_suite) j["suite"] = c.suite;
  j["seed"] = c.seed;
  j["truncation"] = c.truncation;
  j["depth"] = c.depth;
  j["tol"] = c.tol;
  j["samples"] = c.samples;
  return j;
}

/// Runtimes are wall-clock and excluded unless requested, keeping reports
/// byte-identical across runs.
inline Json to_json(const SuiteReport& r, bool timings = false) {
  Json j;
  j["suite"] = r.suite;
  j["anchor"] = r.anchor;
  j["config"] = config_json(r.config, false);
  Json checks = Json::array();
  for (const CheckResult& c : r.checks) {
    Json cj;
    cj["name"] = c.name;
    cj["anchor"] = c.anchor;
    cj["status"] = c.passed ? "pass" : "fail";
    cj["residuals"] = c.residuals;
    if (!c.passed) {
      cj["detail"] = c.detail;
      if (!c.instance.is_null()) cj["instance"] = c.instance;
    }
    if (timings) cj["runtime_ms"] = c.runtime_ms;
    checks.push_back(cj);
  }
  j["checks"] = checks;
  if (timings) j["runtime_ms"] = r.runtime_ms;
  j["overall"] = r.passed() ? "pass" : "fail";
  return j;
}

inline Json to_json(const AggregateReport& r, bool timings = false) {
  Json j;
  j["config"] = config_json(r.config, false);
  Json suites = Json::array();
  std::vector<std::string> failed;
  for (const SuiteReport& s : r.suites) {
    suites.push_back(to_json(s, timings));
    for (const CheckResult& c : s.checks)
      if (!c.passed) failed.push_back(s.suite + "/" + c.name);
  }
  j["suites"] = suites;
  j["failed_checks"] = failed;
  if (timings) j["runtime_ms"] = r.runtime_ms;
  j["overall"] = r.passed() ? "pass" : "fail";
  return j;
}

inline void write_report(const Json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write report to " + path);
  out << j.dump(2) << '\n';
}

inline SuiteReport run_suite(const SuiteConfig& config, const Registry& registry) {
  config.validate();
  const SuiteDef& def = registry.find(config.suite);
  SuiteContext ctx(config, def.name, def.anchor);
  const auto start = std::chrono::steady_clock::now();
  def.run(ctx);
  SuiteReport r{def.name, def.anchor, config, ctx.take(), 0.0};
  r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (config.report_path) write_report(to_json(r), *config.report_path);
  return r;
}

/// Every registered suite with the shared overrides. With jobs > 1 suites
/// run on worker threads; results stay in registry order.
inline AggregateReport run_all(const SuiteConfig& overrides, const Registry& registry, int jobs = 1) {
  overrides.validate();
  const std::vector<SuiteDef>& defs = registry.suites();
  AggregateReport agg{overrides, std::vector<SuiteReport>(defs.size()), 0.0};
  const auto start = std::chrono::steady_clock::now();
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(defs.size());
  auto worker = [&]() {
    for (std::size_t i = next++; i < defs.size(); i = next++) {
      SuiteConfig c = overrides;
      c.suite = defs[i].name;
      c.report_path.reset();
      try {
        agg.suites[i] = run_suite(c, registry);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(defs.size(), 1))));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
  agg.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (overrides.report_path) write_report(to_json(agg), *overrides.report_path);
  return agg;
}

}  // namespace dnclab::harness
