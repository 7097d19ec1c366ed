#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lpflow/sde_core.hpp"

namespace lpflow::harness {

using json = nlohmann::json;

struct TestReport {
  std::string experiment;
  std::string statistic;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation;  // "le", "ge" or "info" (never fails)
  bool passed = true;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  std::uint64_t seed = 0;
  double wall_time = 0.0;
};

bool within(double value, const std::string& relation, double threshold);
json to_json(const TestReport& r);

// Sections: params, integrator, samples, thresholds. Every section holds
// the experiment's defaults overridden by the user's config file.
struct ExperimentConfig {
  std::string id;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;  // empty: no files written
  json params = json::object();
  json integrator = json::object();
  json samples = json::object();
  json thresholds = json::object();

  IntegratorConfig integrator_config() const;
  json to_json() const;
};

class Context;
using ExperimentFn = std::function<void(Context&)>;

struct ExperimentInfo {
  std::string id;
  std::string description;
  json defaults;  // object with the four sections
  ExperimentFn run;
};

const std::vector<ExperimentInfo>& registry();
const ExperimentInfo& find_experiment(const std::string& id);

constexpr std::uint64_t kDefaultSeed = 20241015;

// Builds a config from defaults, an optional JSON override document and
// an optional seed override. Unknown keys anywhere are rejected.
ExperimentConfig make_config(const std::string& id, const json& overrides = json::object(),
                             std::optional<std::uint64_t> seed = std::nullopt,
                             const std::filesystem::path& out_dir = {});
ExperimentConfig load_config(const std::string& id, const std::filesystem::path& file,
                             std::optional<std::uint64_t> seed, const std::filesystem::path& out_dir);

std::vector<TestReport> run_experiment(const ExperimentConfig& cfg);

bool all_passed(const std::vector<TestReport>& reports);

class Context {
 public:
  explicit Context(const ExperimentConfig& cfg);

  const ExperimentConfig& cfg;

  double param(const char* key) const { return cfg.params.at(key).get<double>(); }
  std::vector<double> param_vec(const char* key) const {
    return cfg.params.at(key).get<std::vector<double>>();
  }
  std::size_t samples(const char* key) const { return cfg.samples.at(key).get<std::size_t>(); }
  double threshold(const char* key) const { return cfg.thresholds.at(key).get<double>(); }

  void report(const std::string& statistic, double value, const std::string& relation,
              double threshold, std::size_t n_a = 0, std::size_t n_b = 0);
  void info(const std::string& statistic, double value, std::size_t n_a = 0, std::size_t n_b = 0) {
    report(statistic, value, "info", 0.0, n_a, n_b);
  }

  // Opens <out_dir>/<id>/<name>.csv with the header line; nullptr if no
  // output directory was configured.
  std::unique_ptr<std::ofstream> csv(const std::string& name, const std::string& header);

  std::vector<TestReport> reports;

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace lpflow::harness
