#include "lpflow/harness.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "lpflow/io.hpp"

namespace lpflow::harness {

bool within(double value, const std::string& relation, double threshold) {
  if (relation == "info") return true;
  if (!std::isfinite(value)) return false;
  if (relation == "le") return value <= threshold;
  if (relation == "ge") return value >= threshold;
  throw std::invalid_argument("unknown relation " + relation);
}

json to_json(const TestReport& r) {
  return {{"experiment", r.experiment}, {"statistic", r.statistic}, {"value", r.value},
          {"threshold", r.threshold},   {"relation", r.relation},   {"pass", r.passed},
          {"n_a", r.n_a},               {"n_b", r.n_b},             {"seed", r.seed},
          {"wall_time", r.wall_time}};
}

IntegratorConfig ExperimentConfig::integrator_config() const {
  IntegratorConfig c = io::integrator_from_json(integrator);
  c.seed = seed;
  return c;
}

json ExperimentConfig::to_json() const {
  return {{"experiment", id},         {"seed", seed},       {"params", params},
          {"integrator", integrator}, {"samples", samples}, {"thresholds", thresholds}};
}

const ExperimentInfo& find_experiment(const std::string& id) {
  for (const auto& e : registry())
    if (e.id == id) return e;
  throw std::invalid_argument("unknown experiment id: " + id);
}

namespace {

void merge_section(json& target, const json& src, const std::string& where) {
  if (!src.is_object()) throw std::invalid_argument(where + ": expected an object");
  for (const auto& [key, value] : src.items()) {
    if (!target.contains(key)) throw std::invalid_argument(where + ": unknown key '" + key + "'");
    target[key] = value;
  }
}

}  // namespace

ExperimentConfig make_config(const std::string& id, const json& overrides,
                             std::optional<std::uint64_t> seed, const std::filesystem::path& out_dir) {
  const auto& info = find_experiment(id);
  io::reject_unknown_keys(overrides,
                          {"experiment", "seed", "output_dir", "params", "integrator", "samples",
                           "thresholds"},
                          "config");
  if (overrides.contains("experiment") && overrides["experiment"].get<std::string>() != id)
    throw std::invalid_argument("config: experiment id does not match");

  ExperimentConfig cfg;
  cfg.id = id;
  cfg.seed = overrides.value("seed", kDefaultSeed);
  if (seed) cfg.seed = *seed;
  if (overrides.contains("output_dir")) cfg.out_dir = overrides["output_dir"].get<std::string>();
  if (!out_dir.empty()) cfg.out_dir = out_dir;

  cfg.params = info.defaults.at("params");
  cfg.integrator = info.defaults.at("integrator");
  cfg.samples = info.defaults.at("samples");
  cfg.thresholds = info.defaults.at("thresholds");
  if (overrides.contains("params")) merge_section(cfg.params, overrides["params"], "params");
  if (overrides.contains("integrator"))
    merge_section(cfg.integrator, overrides["integrator"], "integrator");
  if (overrides.contains("samples")) merge_section(cfg.samples, overrides["samples"], "samples");
  if (overrides.contains("thresholds"))
    merge_section(cfg.thresholds, overrides["thresholds"], "thresholds");
  cfg.integrator_config();  // validates
  return cfg;
}

ExperimentConfig load_config(const std::string& id, const std::filesystem::path& file,
                             std::optional<std::uint64_t> seed, const std::filesystem::path& out_dir) {
  json overrides = json::object();
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open config " + file.string());
    overrides = json::parse(in);
  }
  return make_config(id, overrides, seed, out_dir);
}

Context::Context(const ExperimentConfig& c) : cfg(c), start_(std::chrono::steady_clock::now()) {}

void Context::report(const std::string& statistic, double value, const std::string& relation,
                     double threshold, std::size_t n_a, std::size_t n_b) {
  TestReport r;
  r.experiment = cfg.id;
  r.statistic = statistic;
  r.value = value;
  r.threshold = threshold;
  r.relation = relation;
  r.passed = within(value, relation, threshold);
  r.n_a = n_a;
  r.n_b = n_b;
  r.seed = cfg.seed;
  r.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  reports.push_back(std::move(r));
}

std::unique_ptr<std::ofstream> Context::csv(const std::string& name, const std::string& header) {
  if (cfg.out_dir.empty()) return nullptr;
  const auto dir = cfg.out_dir / cfg.id;
  std::filesystem::create_directories(dir);
  auto f = std::make_unique<std::ofstream>(dir / (name + ".csv"));
  f->precision(12);
  *f << header << '\n';
  return f;
}

std::vector<TestReport> run_experiment(const ExperimentConfig& cfg) {
  const auto& info = find_experiment(cfg.id);
  Context ctx(cfg);
  try {
    info.run(ctx);
  } catch (const std::exception& e) {
    throw std::runtime_error("experiment " + cfg.id + ": " + e.what());
  }
  if (!cfg.out_dir.empty()) {
    const auto dir = cfg.out_dir / cfg.id;
    std::filesystem::create_directories(dir);
    json doc = {{"config", cfg.to_json()}, {"reports", json::array()}, {"pass", all_passed(ctx.reports)}};
    for (const auto& r : ctx.reports) doc["reports"].push_back(to_json(r));
    std::ofstream(dir / "report.json") << doc.dump(2) << '\n';
  }
  return ctx.reports;
}

bool all_passed(const std::vector<TestReport>& reports) {
  for (const auto& r : reports)
    if (!r.passed) return false;
  return true;
}

}  // namespace lpflow::harness
