#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "lpflow/rng.hpp"

namespace lpflow::stats {

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Asymptotic Kolmogorov tail P(K > lambda).
double kolmogorov_tail(double lambda);

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);
KsResult ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf);

// Asymptotic critical value of D at level alpha for sample sizes n, m
// (m = 0 for the one-sample test).
double ks_critical_value(double alpha, std::size_t n, std::size_t m = 0);

std::complex<double> realized_covariation(const std::vector<std::complex<double>>& a,
                                          const std::vector<std::complex<double>>& b);

double mean(const std::vector<double>& v);
double variance(const std::vector<double>& v);  // unbiased

struct Interval95 {
  double lo = 0.0;
  double hi = 0.0;
};

// Percentile bootstrap interval of the mean.
Interval95 bootstrap_mean_ci(const std::vector<double>& v, int resamples, CounterRng& rng,
                             double level = 0.95);

}  // namespace lpflow::stats
