#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace lpflow {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

// Adaptive Gauss-Kronrod on [a,b]; order is 15 or 21 (Kronrod points).
QuadResult integrate_gk(const std::function<double(double)>& f, double a, double b,
                        double abs_tol = 1e-12, double rel_tol = 1e-10, int order = 21,
                        int max_intervals = 2000);

// Integral over [a, inf) using the map x = a + s/(1-s).
QuadResult integrate_to_infinity(const std::function<double(double)>& f, double a,
                                 double abs_tol = 1e-12, double rel_tol = 1e-10, int order = 21);

// Integral over (0, inf) in logarithmic coordinates x = e^u, with u
// restricted to [u_lo, u_hi].
QuadResult integrate_log_positive(const std::function<double(double)>& f, double u_lo,
                                  double u_hi, double abs_tol = 1e-12, double rel_tol = 1e-10,
                                  int order = 21);

// n-point Gauss-Legendre nodes and weights on [-1,1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n);

}  // namespace lpflow
