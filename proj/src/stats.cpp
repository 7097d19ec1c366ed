#include "lpflow/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lpflow::stats {

double kolmogorov_tail(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

namespace {

double effective_size(std::size_t n, std::size_t m) {
  if (m == 0) return static_cast<double>(n);
  return static_cast<double>(n) * m / (static_cast<double>(n) + m);
}

double p_from_d(double d, double ne) {
  const double s = std::sqrt(ne);
  // Stephens' small-sample correction
  return kolmogorov_tail((s + 0.12 + 0.11 / s) * d);
}

}  // namespace

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = a.size(), nb = b.size();
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return {d, p_from_d(d, effective_size(a.size(), b.size()))};
}

KsResult ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf) {
  if (a.empty()) throw std::invalid_argument("ks_one_sample: empty sample");
  std::sort(a.begin(), a.end());
  const double n = a.size();
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double f = cdf(a[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return {d, p_from_d(d, n)};
}

double ks_critical_value(double alpha, std::size_t n, std::size_t m) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("ks_critical_value: alpha");
  // invert the tail by bisection
  double lo = 0.2, hi = 5.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (kolmogorov_tail(mid) > alpha ? lo : hi) = mid;
  }
  const double s = std::sqrt(effective_size(n, m));
  return 0.5 * (lo + hi) / (s + 0.12 + 0.11 / s);
}

std::complex<double> realized_covariation(const std::vector<std::complex<double>>& a,
                                          const std::vector<std::complex<double>>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("realized_covariation: size mismatch");
  std::complex<double> s = 0.0;
  for (std::size_t k = 1; k < a.size(); ++k) s += (a[k] - a[k - 1]) * (b[k] - b[k - 1]);
  return s;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / v.size();
}

double variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / (v.size() - 1);
}

Interval95 bootstrap_mean_ci(const std::vector<double>& v, int resamples, CounterRng& rng,
                             double level) {
  if (v.empty() || resamples < 2) throw std::invalid_argument("bootstrap_mean_ci: bad input");
  std::vector<double> means(resamples);
  const std::size_t n = v.size();
  for (int r = 0; r < resamples; ++r) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[static_cast<std::size_t>(rng.uniform() * n) % n];
    means[r] = s / n;
  }
  std::sort(means.begin(), means.end());
  const double tail = 0.5 * (1.0 - level);
  auto pick = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::clamp(q * (resamples - 1), 0.0, resamples - 1.0));
    return means[idx];
  };
  return {pick(tail), pick(1.0 - tail)};
}

}  // namespace lpflow::stats
