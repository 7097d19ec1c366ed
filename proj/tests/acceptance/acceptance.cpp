// Runs every acceptance experiment with its default config and prints one
// line per criterion.
#include <chrono>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "lpflow/harness.hpp"

namespace {

struct Criterion {
  int number;
  const char* experiment;
  bool graded;
};

constexpr Criterion kCriteria[] = {
    {1, "intertwining", true},      {2, "kernel_identity", true},  {3, "km_density", true},
    {4, "spde_finite_n", true},     {5, "gibbs_invariance", true}, {6, "supermartingale", true},
    {7, "stationarity_transfer", true}, {8, "dyson_exact", true},  {9, "unit_invariants", true},
    {10, "hp_conjecture", false},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string out;
  std::vector<int> only;
  app.add_option("--out", out, "directory for reports and data");
  app.add_option("--only", only, "criterion numbers to run");
  CLI11_PARSE(app, argc, argv);

  using namespace lpflow::harness;
  bool ok = true;
  for (const auto& c : kCriteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.number) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    std::string status, detail;
    try {
      const auto reports = run_experiment(make_config(c.experiment, json::object(), std::nullopt, out));
      std::size_t failed = 0, graded = 0;
      for (const auto& r : reports) {
        if (r.relation == "info") continue;
        ++graded;
        if (!r.passed) {
          ++failed;
          std::cerr << "  failed: " << r.statistic << " = " << r.value << " (threshold " << r.threshold
                    << ")\n";
        }
      }
      detail = std::to_string(graded - failed) + "/" + std::to_string(graded) + " checks";
      status = !c.graded ? "INFO" : (failed == 0 ? "PASS" : "FAIL");
      if (!c.graded) detail = std::to_string(reports.size()) + " table rows";
    } catch (const std::exception& e) {
      status = "FAIL";
      detail = std::string("error: ") + e.what();
    }
    if (status == "FAIL") ok = false;
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << '[' << status << "] criterion " << std::setw(2) << c.number << ' ' << std::left
              << std::setw(22) << c.experiment << std::right << ' ' << detail << " (" << std::fixed
              << std::setprecision(1) << secs << " s)" << std::endl;
  }
  return ok ? 0 : 1;
}
