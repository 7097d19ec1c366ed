#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lpflow/rng.hpp"
#include "lpflow/sde_core.hpp"

namespace lpflow {

struct KernelQuery {
  int N = 1;
  double theta = 0.0;
  double t = 1.0;
  void validate() const;
};

// One-particle log-normal density q_t^{(N)}(x, y).
double gbm_density(double x, double y, double t, int N, double theta);
double gbm_density_dx(double x, double y, double t, int N, double theta);

double lambda_const(int N, double theta);

// Karlin-McGregor density of the ordered N-particle process.
double km_transition_density(std::span<const double> x, std::span<const double> y, double t,
                             double theta);

double interlace_density(std::span<const double> x, std::span<const double> y);
bool interlaces(std::span<const double> x, std::span<const double> y, double slack = 0.0);

Eigen::MatrixXcd sample_haar_unitary(int n, CounterRng& rng);
ChamberPoint sample_corner(const ChamberPoint& x, CounterRng& rng);

// |q^{(N)}(x,y) - e^{-(theta/2-N)t} int_y^inf d/dx q^{(N+1)}(x,z) dz|
double check_1d_intertwining(double x, double y, double t, int N, double theta,
                             int quadrature_order = 21);

struct IntertwiningSamples {
  std::vector<std::vector<double>> a;  // evolve then project
  std::vector<std::vector<double>> b;  // project then evolve
};

IntertwiningSamples mc_intertwining_test(const ChamberPoint& x, double t, double theta,
                                         std::size_t n_samples, std::uint64_t seed,
                                         const IntegratorConfig& cfg = {});

}  // namespace lpflow
