#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/bessel.hpp>

#include "lpflow/quadrature.hpp"
#include "lpflow/stationary_dpp.hpp"

using namespace lpflow;

namespace {

// power series of J_a, independent of the library routine
double bessel_series(double a, double x) {
  long double term = std::pow(0.5L * x, static_cast<long double>(a)) / std::tgamma(a + 1.0L);
  long double sum = term;
  for (int k = 1; k < 200; ++k) {
    term *= -0.25L * x * x / (k * (k + a));
    sum += term;
  }
  return static_cast<double>(sum);
}

}  // namespace

TEST_CASE("Bessel function values") {
  CHECK(bessel_j(0.0, 0.0) == 1.0);
  CHECK(bessel_j(1.0, 0.0) == 0.0);
  CHECK(bessel_j(0.5, std::numbers::pi / 2) == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-14));
  CHECK(bessel_j(-0.5, 1.3) == doctest::Approx(std::sqrt(2.0 / (std::numbers::pi * 1.3)) * std::cos(1.3)));
  for (double a : {0.0, 0.3, 1.5, 4.0, -0.4})
    for (double x : {0.2, 1.0, 3.7, 9.0}) {
      CHECK(bessel_j(a, x) == doctest::Approx(bessel_series(a, x)).epsilon(1e-10));
      // three-term recurrence
      const double r = bessel_j(a + 1.0, x) + bessel_j(a - 1.0, x) - 2.0 * a / x * bessel_j(a, x);
      CHECK(std::abs(r) < 1e-9);
    }
  CHECK_THROWS(bessel_j(0.0, -1.0));
}

TEST_CASE("kernels are symmetric with a smooth diagonal") {
  for (double nu : {0.0, 1.0})
    for (double x : {0.3, 2.0, 25.0})
      for (double y : {0.7, 11.0}) CHECK(inverse_bessel_kernel(nu, x, y) == doctest::Approx(inverse_bessel_kernel(nu, y, x)).epsilon(1e-12));
  for (double s : {0.0, 0.7})
    for (double x : {-3.0, -0.4, 0.5, 6.0})
      for (double y : {-1.5, 0.9, 4.0}) CHECK(hp_kernel(s, x, y) == doctest::Approx(hp_kernel(s, y, x)).epsilon(1e-12));

  for (double x : {0.4, 1.0, 7.0}) {
    CHECK(inverse_bessel_kernel(0.0, x, x) == doctest::Approx(inverse_bessel_kernel(0.0, x, x + 1e-6 * x)).epsilon(1e-4));
    CHECK(inverse_bessel_kernel(0.0, x, x) > 0.0);
  }
  for (double s : {0.0, 0.6})
    for (double x : {-2.0, 0.3, 5.0}) {
      CHECK(hp_kernel(s, x, x) == doctest::Approx(hp_kernel(s, x, x + 1e-6 * x)).epsilon(1e-4));
      CHECK(hp_kernel(s, x, x) > 0.0);
    }
}

TEST_CASE("Hua-Pickrell intensity at s = 0") {
  // sine kernel in 1/x: intensity 1/(pi x^2)
  for (double x : {-4.0, -0.5, 0.2, 3.0})
    CHECK(hp_kernel(0.0, x, x) == doctest::Approx(1.0 / (std::numbers::pi * x * x)).epsilon(1e-8));
  const double x = 0.8, y = -1.7;
  const double d = 1.0 / x - 1.0 / y;
  CHECK(hp_kernel(0.0, x, y) == doctest::Approx(std::sin(d) / (std::numbers::pi * d) / std::abs(x * y)));
}

TEST_CASE("inverse Bessel kernel decays like 1/x") {
  double prev = inverse_bessel_kernel(0.0, 10.0, 1.0);
  for (double x : {100.0, 1000.0, 10000.0}) {
    const double k = std::abs(inverse_bessel_kernel(0.0, x, 1.0));
    CHECK(k < prev);
    prev = k;
  }
  CHECK(prev < 1e-4);
  CHECK(inverse_bessel_kernel(0.0, 1e4, 1e4) * 1e4 == doctest::Approx(inverse_bessel_kernel(0.0, 2e4, 2e4) * 2e4).epsilon(1e-3));
}

TEST_CASE("discretization") {
  const auto zero = discretize_kernel([](double, double) { return 0.0; }, {{0.1, 1.0}}, 32);
  CHECK(zero.matrix.norm() == 0.0);
  CHECK(zero.trace() == 0.0);
  CounterRng rng(1, 0);
  CHECK(sample_dpp(zero, rng).points.empty());

  auto k0 = [](double x, double y) { return inverse_bessel_kernel(0.0, x, y); };
  const auto coarse = discretize_kernel(k0, {{0.1, 20.0}}, 64);
  const auto fine = discretize_kernel(k0, {{0.1, 20.0}}, 128);
  CHECK(std::abs(coarse.trace() - fine.trace()) < 1e-6);
  const auto exact = integrate_gk([&](double x) { return k0(x, x); }, 0.1, 20.0, 1e-12, 1e-12);
  CHECK(fine.trace() == doctest::Approx(exact.value).epsilon(1e-8));
  CHECK_FALSE(fine.clip_warning);
  CHECK_THROWS(discretize_kernel(k0, {{-1.0, 1.0}}, 16, "x", Spacing::Log));
}

TEST_CASE("eigenpairs reconstruct a wide reciprocal-spaced kernel") {
  // many eigenvalues sit at rounding level here
  const auto dk = discretize_kernel([](double x, double y) { return hp_kernel(0.0, x, y); },
                                    {{-500.0, -1.0 / 60}, {1.0 / 60, 500.0}}, 768, "hp",
                                    Spacing::Reciprocal);
  const Eigen::MatrixXd k =
      dk.eigenvectors * dk.eigenvalues.asDiagonal() * dk.eigenvectors.transpose();
  CHECK((k - dk.matrix).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(dk.clip_magnitude < 1e-12);
}

TEST_CASE("DPP sampling reproduces count and intensity") {
  auto k = [](double x, double y) { return hp_kernel(0.0, x, y); };
  const auto dk = discretize_kernel(k, {{-3.0, -0.25}, {0.25, 3.0}}, 64, "hp", Spacing::Reciprocal);
  CounterRng rng(2, 0);
  const int draws = 10000;
  std::vector<double> edges{-3.0, -1.0, -0.5, -0.25, 0.25, 0.5, 1.0, 3.0};
  std::vector<double> observed(edges.size() - 1, 0.0), expected(edges.size() - 1, 0.0);
  for (std::size_t b = 0; b + 1 < edges.size(); ++b)
    if (edges[b] * edges[b + 1] > 0.0)
      expected[b] = integrate_gk([&](double x) { return k(x, x); }, edges[b], edges[b + 1], 1e-12, 1e-12).value;
  double count = 0.0, count_sq = 0.0;
  for (int i = 0; i < draws; ++i) {
    const auto pc = sample_dpp(dk, rng);
    count += pc.points.size();
    count_sq += double(pc.points.size()) * pc.points.size();
    for (std::size_t j = 1; j < pc.points.size(); ++j) REQUIRE(pc.points[j - 1] >= pc.points[j]);
    for (double p : pc.points)
      for (std::size_t b = 0; b + 1 < edges.size(); ++b)
        if (p > edges[b] && p < edges[b + 1]) observed[b] += 1.0;
  }
  double var = 0.0;
  for (Eigen::Index i = 0; i < dk.eigenvalues.size(); ++i) var += dk.eigenvalues[i] * (1.0 - dk.eigenvalues[i]);
  CHECK(std::abs(count / draws - dk.trace()) < 3.0 * std::sqrt(var / draws) + 1e-9);
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    if (expected[b] == 0.0) continue;
    // a DPP count has variance at most its mean
    CHECK(std::abs(observed[b] - draws * expected[b]) < 3.0 * std::sqrt(draws * expected[b]) + 1e-6 * draws);
  }
}

TEST_CASE("characteristic functions of configurations") {
  PointConfiguration empty;
  CHECK(eval_zeta_bessel(empty, 0.7) == 1.0);
  PointConfiguration one;
  one.points = {0.4};
  CHECK(std::abs(eval_zeta_bessel(one, {0.3, 0.2}) - (1.0 - std::complex<double>(0.3, 0.2) * 0.4)) < 1e-15);
  CHECK(eval_zeta_bessel(one, 0.0) == 1.0);

  PointConfiguration sym;
  sym.points = {0.5, -0.5};
  const auto v = eval_zeta_hp(sym, 0.8, 2);
  CHECK(v.value.real() == doctest::Approx(1.0 - 0.64 * 0.25));
  CHECK(v.value.imag() == 0.0);
  for (int k : {1, 2, 5}) CHECK(eval_zeta_hp(sym, 0.0, k).value == 1.0);
  // no point between cutoffs 1/4 and 1/9
  PointConfiguration gap;
  gap.points = {2.0, 0.05};
  CHECK(eval_zeta_hp(gap, 0.3, 3).increment == 0.0);
}
