#pragma once

#include <cstddef>
#include <vector>

#include "lpflow/rng.hpp"
#include "lpflow/sde_core.hpp"

namespace lpflow {

struct BridgeSpec {
  double a = 0.0;
  double b = 1.0;
  double x = 0.0;
  double y = 0.0;
  std::vector<double> grid;  // increasing, grid.front() == a, grid.back() == b

  void validate() const;
};

// Brownian bridge with diffusion sigma on the grid; endpoints exact.
std::vector<double> sample_brownian_bridge(const BridgeSpec& spec, CounterRng& rng,
                                           double sigma = 1.0);

// exp of a Brownian bridge between log x and log y (x, y > 0).
std::vector<double> sample_exp_bridge(const BridgeSpec& spec, CounterRng& rng);

struct BoundaryData {
  std::vector<double> x_vec;  // decreasing, length k
  std::vector<double> y_vec;
  std::vector<double> upper;  // on grid, +inf allowed
  std::vector<double> lower;  // on grid, -inf allowed
  std::vector<double> grid;

  void validate() const;
};

struct AvoidingBridges {
  std::vector<std::vector<double>> paths;  // k paths on the grid
  long attempts = 0;
  double acceptance_rate = 0.0;
};

constexpr double kAcceptanceFloor = 1e-4;

// Rejection sampling of k independent Brownian bridges conditioned to stay
// strictly ordered between lower and upper at every point of the grid.
// Every interval is refined into `refine` pieces for the check.
AvoidingBridges sample_avoiding_bridges(const BoundaryData& bd, CounterRng& rng,
                                        long max_attempts = static_cast<long>(10.0 / kAcceptanceFloor),
                                        int refine = 1);

// Applies log to every coordinate (GL lines in their Brownian coordinates).
PathEnsemble to_log_coordinates(const PathEnsemble& ens);

// Resamples lines [index_lo, index_lo + k) on the open window (a, b) of every
// path in the ensemble, a and b being grid times of the ensemble. Lines are
// indexed from the top (0 = largest).
PathEnsemble gibbs_resample(const PathEnsemble& ensemble, std::size_t index_lo, std::size_t k,
                            double a, double b, std::uint64_t seed,
                            long max_attempts = static_cast<long>(10.0 / kAcceptanceFloor),
                            int refine = 1);

}  // namespace lpflow
