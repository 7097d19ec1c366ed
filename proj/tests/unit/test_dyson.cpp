#include <doctest.h>

#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include "lpflow/dyson.hpp"

using namespace lpflow;
using namespace std::complex_literals;

TEST_CASE("Dyson drift") {
  const auto b = dyson_drift_vector(std::vector{1.0, -1.0}, 0.0);
  CHECK(b[0] == doctest::Approx(0.5));
  CHECK(b[1] == doctest::Approx(-0.5));
  CHECK(dyson_drift_vector(std::vector{1.7}, 1.0)[0] == doctest::Approx(-1.7));
  const std::vector<double> d{2.0, 0.5, -0.1, -3.0};
  const auto s = dyson_drift_vector(d, 0.8);
  CHECK(std::accumulate(s.begin(), s.end(), 0.0) == doctest::Approx(-0.8 * std::accumulate(d.begin(), d.end(), 0.0)));
}

TEST_CASE("explicit solution") {
  auto one = [](cplx) { return cplx(1.0); };
  auto d0 = [](cplx z) { return (1.0 - 0.7 * z) * std::exp(0.7 * z) * std::exp(-0.2 * z); };
  CHECK(std::abs(explicit_solution(d0, 1.0, 0.0, 0.3 + 0.4i) - d0(0.3 + 0.4i)) < 1e-15);
  CHECK(std::abs(explicit_solution(one, 0.0, 2.0, 1.0) - std::exp(-1.0)) < 1e-15);
  CHECK(std::abs(explicit_solution(one, 1.0, 60.0, 1.3) - std::exp(-1.69 / 4.0)) < 1e-12);
  CHECK(ou_variance_factor(0.0, 0.7) == doctest::Approx(0.7));
  CHECK(ou_variance_factor(1e-12, 0.7) == doctest::Approx(0.7));
}

TEST_CASE("parameter flow matches the explicit solution") {
  const UpsilonPoint u0{{1.2, 0.4}, {0.9}, 0.3, 2.5};
  const auto same = parameter_flow(u0, 1.0, 0.0);
  CHECK(same.xs_plus == u0.xs_plus);
  CHECK(same.delta == u0.delta);
  CHECK(parameter_flow({{}, {}, 0.0, 0.0}, 1.0, 80.0).delta == doctest::Approx(0.5));
  auto D0 = [&](cplx z) { return eval_lp_full(u0, z); };
  for (double c : {0.0, 1.0, -0.5})
    for (double t : {0.3, 1.0})
      for (cplx z : {0.4 + 0.2i, -0.7 + 0.1i, 1.1i}) {
        const cplx a = eval_lp_full(parameter_flow(u0, c, t), z);
        const cplx b = explicit_solution(D0, c, t, z);
        CHECK(std::abs(a - b) < 1e-10 * (1.0 + std::abs(b)));
      }
}

TEST_CASE("heat-type equation residual") {
  auto d0 = [](cplx z) { return (1.0 - 0.7 * z) * std::exp(0.7 * z); };
  auto D = [&](double t, cplx z) { return explicit_solution(d0, 1.0, t, z); };
  CHECK(std::abs(pde_residual(D, 1.0, 0.7, 0.5 + 0.3i)) < 1e-6);
  CHECK(std::abs(pde_residual(D, 1.0, 0.7, 0.0)) < 1e-6);
  auto frozen = [&](double, cplx z) { return d0(z); };
  CHECK(std::abs(pde_residual(frozen, 1.0, 0.7, 0.5 + 0.3i)) > 1e-2);
}
