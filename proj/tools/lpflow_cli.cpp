#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "lpflow/harness.hpp"

namespace {

int run(const std::string& id, const std::string& config, std::optional<std::uint64_t> seed,
        const std::string& out) {
  using namespace lpflow::harness;
  const auto cfg = load_config(id, config, seed, out);
  const auto reports = run_experiment(cfg);
  for (const auto& r : reports) {
    const char* tag = r.relation == "info" ? "INFO" : (r.passed ? "PASS" : "FAIL");
    std::cout << '[' << tag << "] " << r.experiment << ' ' << r.statistic << " = "
              << std::setprecision(6) << r.value;
    if (r.relation != "info")
      std::cout << (r.relation == "le" ? " <= " : " >= ") << r.threshold;
    std::cout << '\n';
  }
  const bool ok = all_passed(reports);
  std::cout << (ok ? "all tests passed" : "some tests failed") << '\n';
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lpflow experiment runner"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "list experiments");
  auto* runc = app.add_subcommand("run", "run one experiment");
  std::string id, config, out;
  std::uint64_t seed_value = 0;
  runc->add_option("experiment-id", id, "experiment id")->required();
  runc->add_option("--config", config, "JSON config file");
  auto* seed_opt = runc->add_option("--seed", seed_value, "random seed");
  runc->add_option("--out", out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list) {
      for (const auto& e : lpflow::harness::registry())
        std::cout << std::left << std::setw(24) << e.id << e.description << '\n';
      return 0;
    }
    std::optional<std::uint64_t> seed;
    if (*seed_opt) seed = seed_value;
    return run(id, config, seed, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
