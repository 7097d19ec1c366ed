#include <doctest.h>

#include <cmath>
#include <vector>

#include "lpflow/rng.hpp"
#include "lpflow/stats.hpp"

using namespace lpflow;

TEST_CASE("counter rng is deterministic per seed and stream") {
  CounterRng a(42, 3), b(42, 3), c(42, 4);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a(), y = b(), z = c();
    CHECK(x == y);
    differs |= x != z;
  }
  CHECK(differs);
}

TEST_CASE("uniform lies in the open unit interval and normal has unit moments") {
  CounterRng r(1, 0);
  std::vector<double> g;
  for (int i = 0; i < 200000; ++i) {
    const double u = r.uniform();
    CHECK((u > 0.0 && u < 1.0));
    g.push_back(r.normal());
  }
  CHECK(std::abs(stats::mean(g)) < 4.0 / std::sqrt(2e5));
  CHECK(std::abs(stats::variance(g) - 1.0) < 4.0 * std::sqrt(2.0 / 2e5));
}

TEST_CASE("split streams are independent of the parent sequence") {
  CounterRng r(9, 1);
  auto s1 = r.split(0), s2 = r.split(1);
  CHECK(s1() != s2());
}

TEST_CASE("ks two-sample basics") {
  std::vector<double> a{0.1, 0.4, 0.7};
  CHECK(stats::ks_two_sample(a, a).statistic == doctest::Approx(0.0));
  std::vector<double> b{1.1, 1.4, 1.7};
  CHECK(stats::ks_two_sample(a, b).statistic == doctest::Approx(1.0));
}

TEST_CASE("ks two-sample is calibrated on identical laws") {
  int passes = 0;
  for (int rep = 0; rep < 40; ++rep) {
    CounterRng r(77, rep);
    std::vector<double> a(10000), b(10000);
    for (auto& v : a) v = r.uniform();
    for (auto& v : b) v = r.uniform();
    passes += stats::ks_two_sample(a, b).p_value > 0.01;
  }
  CHECK(passes >= 38);
}

TEST_CASE("realized covariation") {
  std::vector<std::complex<double>> flat(100, {2.0, 1.0});
  CHECK(std::abs(stats::realized_covariation(flat, flat)) == doctest::Approx(0.0));

  CounterRng r(5, 0);
  const int n = 10000;
  std::vector<std::complex<double>> w(n + 1, 0.0);
  for (int i = 1; i <= n; ++i) w[i] = w[i - 1] + r.normal() / std::sqrt(double(n));
  const auto qv = stats::realized_covariation(w, w);
  CHECK(qv.real() >= 0.0);
  CHECK(std::abs(qv.real() - 1.0) < 0.05);
}

TEST_CASE("bootstrap interval covers the sample mean") {
  CounterRng r(3, 0);
  std::vector<double> v(500);
  for (auto& x : v) x = r.normal() + 2.0;
  const auto ci = stats::bootstrap_mean_ci(v, 1000, r);
  CHECK(ci.lo < stats::mean(v));
  CHECK(ci.hi > stats::mean(v));
  CHECK(ci.lo < 2.0);
  CHECK(ci.hi > 2.0);
}
