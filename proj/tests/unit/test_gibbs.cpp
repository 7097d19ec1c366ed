#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "lpflow/errors.hpp"
#include "lpflow/gibbs.hpp"
#include "lpflow/stats.hpp"

using namespace lpflow;

namespace {

std::vector<double> uniform_grid(double a, double b, int n) {
  std::vector<double> g(n + 1);
  for (int i = 0; i <= n; ++i) g[i] = a + (b - a) * i / n;
  g.back() = b;
  return g;
}

}  // namespace

TEST_CASE("Brownian bridge endpoints and covariance") {
  BridgeSpec spec{0.0, 1.0, 0.0, 0.0, {0.0, 0.25, 0.5, 0.75, 1.0}};
  CounterRng rng(1, 0);
  const int n = 100000;
  std::vector<double> mid(n), q1(n), q3(n);
  for (int i = 0; i < n; ++i) {
    const auto p = sample_brownian_bridge(spec, rng);
    REQUIRE(p.front() == 0.0);
    REQUIRE(p.back() == 0.0);
    q1[i] = p[1];
    mid[i] = p[2];
    q3[i] = p[3];
  }
  // Var of a sample variance is about 2 sigma^4 / n
  CHECK(std::abs(stats::variance(mid) - 0.25) < 3.0 * 0.25 * std::sqrt(2.0 / n));
  double cov = 0.0;
  for (int i = 0; i < n; ++i) cov += q1[i] * q3[i];
  cov /= n;
  CHECK(std::abs(cov - 0.0625) < 3.0 * std::sqrt((0.1875 * 0.1875 + 0.0625 * 0.0625) / n));

  BridgeSpec shifted{1.0, 3.0, 2.0, -1.0, uniform_grid(1.0, 3.0, 8)};
  const auto p = sample_brownian_bridge(shifted, rng, 0.7);
  CHECK(p.front() == 2.0);
  CHECK(p.back() == -1.0);
  CHECK_THROWS(BridgeSpec{0.0, 1.0, 0.0, 0.0, {0.0, 0.6, 0.5, 1.0}}.validate());
}

TEST_CASE("exponential bridge") {
  CounterRng rng(2, 0);
  BridgeSpec spec{0.0, 1.0, 2.0, 8.0, {0.0, 0.5, 1.0}};
  std::vector<double> mid;
  for (int i = 0; i < 20000; ++i) {
    const auto p = sample_exp_bridge(spec, rng);
    CHECK(p.front() == doctest::Approx(2.0));
    CHECK(p.back() == doctest::Approx(8.0));
    CHECK(p[1] > 0.0);
    mid.push_back(p[1]);
  }
  const double below = std::count_if(mid.begin(), mid.end(), [](double v) { return v < 4.0; });
  CHECK(std::abs(below / mid.size() - 0.5) < 3.0 * 0.5 / std::sqrt(double(mid.size())));
}

TEST_CASE("avoiding bridges") {
  CounterRng rng(3, 0);
  const auto grid = uniform_grid(0.0, 1.0, 20);
  const double inf = std::numeric_limits<double>::infinity();
  BoundaryData free{{0.5}, {0.2}, std::vector<double>(grid.size(), inf),
                    std::vector<double>(grid.size(), -inf), grid};
  const auto one = sample_avoiding_bridges(free, rng);
  CHECK(one.attempts == 1);
  CHECK(one.acceptance_rate == 1.0);

  std::vector<double> upper(grid.size()), lower(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    upper[i] = 4.0;
    lower[i] = -4.0;
  }
  BoundaryData two{{1.5, -1.5}, {1.0, -1.0}, upper, lower, grid};
  for (int rep = 0; rep < 50; ++rep) {
    const auto r = sample_avoiding_bridges(two, rng, 100000, 4);
    CHECK(r.acceptance_rate > 0.0);
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
      CHECK(r.paths[0][i] < upper[i]);
      CHECK(r.paths[0][i] > r.paths[1][i]);
      CHECK(r.paths[1][i] > lower[i]);
    }
  }

  BoundaryData crossed{{1.0}, {1.0}, std::vector<double>(grid.size(), 0.5),
                       std::vector<double>(grid.size(), -inf), grid};
  CHECK_THROWS_AS(sample_avoiding_bridges(crossed, rng), InvalidBoundaryData);

  std::vector<double> narrow_up(grid.size(), 0.01), narrow_lo(grid.size(), -0.01);
  narrow_up.front() = narrow_up.back() = 1.0;
  narrow_lo.front() = narrow_lo.back() = -1.0;
  BoundaryData starved{{0.0}, {0.0}, narrow_up, narrow_lo, grid};
  CHECK_THROWS_AS(sample_avoiding_bridges(starved, rng, 1000), AcceptanceStarvation);
}

TEST_CASE("Gibbs resampling keeps endpoints and ordering") {
  PathEnsemble ens;
  ens.times = uniform_grid(0.0, 1.0, 10);
  ens.n_paths = 20;
  ens.n_particles = 3;
  ens.params.model = Model::Dyson;
  ens.data.resize(ens.n_paths * ens.times.size() * 3);
  for (std::size_t p = 0; p < ens.n_paths; ++p)
    for (std::size_t k = 0; k < ens.times.size(); ++k) {
      auto s = ens.at(p, k);
      s[0] = 2.0 + 0.1 * p / 20.0;
      s[1] = 0.0;
      s[2] = -2.0;
    }
  const auto out = gibbs_resample(ens, 0, 3, ens.times.front(), ens.times.back(), 9);
  for (std::size_t p = 0; p < ens.n_paths; ++p) {
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(out.at(p, 0)[i] == ens.at(p, 0)[i]);
      CHECK(out.at(p, 10)[i] == ens.at(p, 10)[i]);
    }
    for (std::size_t k = 0; k < ens.times.size(); ++k) {
      CHECK(out.at(p, k)[0] > out.at(p, k)[1]);
      CHECK(out.at(p, k)[1] > out.at(p, k)[2]);
    }
  }

  // middle line between untouched neighbours
  const auto mid = gibbs_resample(ens, 1, 1, 0.2, 0.8, 10);
  for (std::size_t p = 0; p < ens.n_paths; ++p)
    for (std::size_t k = 0; k < ens.times.size(); ++k) {
      CHECK(mid.at(p, k)[0] == ens.at(p, k)[0]);
      CHECK(mid.at(p, k)[2] == ens.at(p, k)[2]);
      CHECK(mid.at(p, k)[1] < mid.at(p, k)[0]);
      CHECK(mid.at(p, k)[1] > mid.at(p, k)[2]);
    }
}
