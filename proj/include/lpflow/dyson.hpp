#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "lpflow/charpoly.hpp"

namespace lpflow {

std::vector<double> dyson_drift_vector(std::span<const double> d, double c);

// (1 - e^{-2ct}) / (2c), continued to t at c = 0
double ou_variance_factor(double c, double t);

cplx explicit_solution(const std::function<cplx(cplx)>& D0, double c, double t, cplx z);

UpsilonPoint parameter_flow(const UpsilonPoint& u0, double c, double t);

// dD/dt + (z^2/2) D + c z dD/dz by central differences.
cplx pde_residual(const std::function<cplx(double, cplx)>& D, double c, double t, cplx z,
                  double h_z = 1e-4, double h_t = 1e-4);

}  // namespace lpflow
