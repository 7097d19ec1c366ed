#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "lpflow/charpoly.hpp"
#include "lpflow/errors.hpp"
#include "lpflow/rng.hpp"
#include "lpflow/sde_core.hpp"

using namespace lpflow;
using namespace std::complex_literals;

namespace {

bool close(cplx a, cplx b, double tol) { return std::abs(a - b) <= tol * (1.0 + std::abs(b)); }

// d f / d x_i for f = prod_j (1 - x_j z / N)
cplx partial(const std::vector<double>& x, int N, cplx z, std::size_t i) {
  cplx p = -z / static_cast<double>(N);
  for (std::size_t j = 0; j < x.size(); ++j)
    if (j != i) p *= 1.0 - x[j] * z / static_cast<double>(N);
  return p;
}

// Ito drift of f: f is affine in every coordinate, so only first derivatives enter.
cplx ito_drift(const std::vector<double>& x, const std::vector<double>& b, int N, cplx z) {
  cplx sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += b[i] * partial(x, N, z, i);
  return sum;
}

cplx ito_covariation(const std::vector<double>& x, const std::vector<double>& var, int N, cplx z,
                     cplx w) {
  cplx sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += var[i] * partial(x, N, z, i) * partial(x, N, w, i);
  return sum;
}

const std::vector<cplx> kPoints{0.3 + 0.2i, -0.5 + 0.1i, 0.7 - 0.4i, 0.6i, 1.2 + 0.5i};

}  // namespace

TEST_CASE("reverse characteristic polynomial examples") {
  CHECK(eval_revcharpoly(std::vector{2.0, 1.0}, 2, 0.0) == 1.0);
  CHECK(std::abs(eval_revcharpoly(std::vector{2.0, 1.0}, 2, 1.0)) == 0.0);
  CHECK(std::abs(eval_revcharpoly(std::vector{3.0}, 1, 1.0 / 3.0)) < 1e-16);
  CHECK_THROWS_AS(derivatives_revcharpoly(std::vector{2.0, 1.0}, 2, 1.0), PoleError);
}

TEST_CASE("derivatives match series at zero and central differences") {
  const std::vector<double> x{3.0, 1.2, 0.4};
  const int N = 3;
  const auto d0 = derivatives_revcharpoly(x, N, 0.0);
  CHECK(close(d0.f, 1.0, 1e-15));
  CHECK(close(d0.df, -(3.0 + 1.2 + 0.4) / N, 1e-14));
  const double e2 = 2.0 * (3.0 * 1.2 + 3.0 * 0.4 + 1.2 * 0.4) / (N * N);
  CHECK(close(d0.d2f, e2, 1e-14));

  const double h = 1e-4;
  for (cplx z : kPoints) {
    const auto d = derivatives_revcharpoly(x, N, z);
    const cplx fp = eval_revcharpoly(x, N, z + h), fm = eval_revcharpoly(x, N, z - h);
    const cplx f0 = eval_revcharpoly(x, N, z);
    CHECK(close(d.df, (fp - fm) / (2 * h), 1e-8));
    CHECK(close(d.d2f, (fp - 2.0 * f0 + fm) / (h * h), 1e-6));
  }
  const auto one = derivatives_revcharpoly(std::vector{2.0}, 1, 0.3 + 0.1i);
  CHECK(std::abs(one.d2f * one.f) < 1e-15);
}

TEST_CASE("LP function examples") {
  CHECK(eval_lp_plus({{}, 0.0}, 0.7 + 0.2i) == 1.0);
  CHECK(std::abs(eval_lp_plus({{1.0}, 1.0}, 1.0)) < 1e-15);
  CHECK(eval_lp_plus({{0.5}, 1.0}, 0.0) == 1.0);
  CHECK(close(eval_lp_full({{0.0, 0.0}, {0.0}, 0.0, 0.0}, 1.3 - 0.4i), 1.0, 1e-15));
  CHECK(std::abs(eval_lp_full({{1.0}, {}, 1.0, 1.0}, 1.0)) < 1e-15);
  CHECK(eval_lp_full({{2.0, 1.0}, {0.5}, 0.3, 6.0}, 0.0) == 1.0);
  CHECK_THROWS(UpsilonPlusPoint{{1.0, 2.0}, 3.0}.validate());
  CHECK_THROWS(UpsilonPlusPoint{{2.0, 1.0}, 2.0}.validate());

  // tail truncation changes the value by at most the discarded mass
  UpsilonPlusPoint v{{}, 0.0};
  for (int k = 1; k <= 2000; ++k) v.xs.push_back(1.0 / (k * k));
  v.gamma = 2.0;
  const auto cut = v.truncated(1e-3);
  CHECK(cut.xs.size() < v.xs.size());
  CHECK(close(eval_lp_plus(cut, 0.4), eval_lp_plus(v, 0.4), 1e-3));
}

TEST_CASE("drift operator examples") {
  const double x = 1.7, theta = 0.8;
  const cplx z = 0.4 - 0.3i;
  const CharPolyDerivs lin{1.0 - x * z, -x, 0.0};
  CHECK(close(gl_spde_drift(lin, z, theta), -0.5 * theta * x * z, 1e-15));
  CHECK(gl_spde_drift(lin, 0.0, theta) == 0.0);
  const CharPolyDerivs sq{z * z, 2.0 * z, 2.0};
  CHECK(close(gl_spde_drift(sq, z, 0.0), -z * z, 1e-15));

  const CharPolyDerivs unit{1.0, 0.0, 0.0};
  CHECK(close(rv_spde_drift(unit, 2.0, 3.3), -1.0, 1e-15));
  CHECK(rv_spde_drift(unit, 0.0, 3.3) == 0.0);
  CHECK(close(hp_spde_drift(unit, 1.0, 0.0), -1.0, 1e-15));
  CHECK(close(hp_spde_drift(unit, 1.0, 1i), -3.0, 1e-15));
  CHECK(hp_spde_drift(unit, 0.0, 1i) == 0.0);
  CHECK(std::abs(hp_spde_drift_finiteN(unit, 1.0, 0.0, 1)) < 1e-15);
  CHECK(close(hp_spde_drift_finiteN(lin, z, 0.3, 1000000), hp_spde_drift(lin, z, 0.3), 1e-5));
}

TEST_CASE("GL drift operator equals the Ito drift of the polynomial") {
  const std::vector<double> x{4.0, 2.2, 1.1, 0.3};
  const int N = 4;
  for (double theta : {0.0, 1.0, -2.5})
    for (cplx z : kPoints) {
      const auto d = derivatives_revcharpoly(x, N, z);
      CHECK(close(gl_spde_drift(d, z, theta), ito_drift(x, gl_drift_vector(x, theta), N, z), 1e-12));
    }
}

TEST_CASE("RV finite-N drift equals the Ito drift of the polynomial") {
  const std::vector<double> x{4.0, 2.2, 1.1, 0.3};
  const int N = 4;
  for (double nu : {0.0, 1.5})
    for (cplx z : kPoints) {
      const auto d = derivatives_revcharpoly(x, N, z);
      CHECK(close(rv_spde_drift_finiteN(d, z, nu, N), ito_drift(x, rv_drift_vector(x, nu), N, z),
                  1e-12));
    }
}

TEST_CASE("HP finite-N drift equals the Ito drift of the polynomial") {
  const std::vector<std::vector<double>> configs{
      {0.6}, {2.1, 0.9, -0.4, -1.7}, {11.0, 6.5, 3.0, 1.2, 0.2, -0.8, -2.9, -5.0, -9.5}};
  for (const auto& ys : configs) {
    const int N = static_cast<int>(ys.size());
    for (cplx s : {cplx(0.0), cplx(0.5, 0.3), cplx(1.2, -0.7)})
      for (cplx z : kPoints) {
        const auto d = derivatives_revcharpoly(ys, N, z);
        const auto b = hp_drift_vector(ys, s.real(), s.imag());
        CHECK(close(hp_spde_drift_finiteN(d, z, s, N), ito_drift(ys, b, N, z), 1e-12));
      }
  }
}

TEST_CASE("covariation kernels equal the Ito covariation") {
  const std::vector<double> x{4.0, 2.2, 1.1, 0.3};
  const int N = 4;
  std::vector<double> gl_var(x.size()), hp_var(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    gl_var[i] = x[i] * x[i];
    hp_var[i] = 2.0 * (1.0 + x[i] * x[i]);
  }
  for (cplx z : kPoints)
    for (cplx w : kPoints) {
      const auto dz = derivatives_revcharpoly(x, N, z), dw = derivatives_revcharpoly(x, N, w);
      CHECK(close(covariation_kernel(dz, dw, z, w, 1.0), ito_covariation(x, gl_var, N, z, w), 1e-9));
      const cplx hp = 2.0 * covariation_kernel(dz, dw, z, w, 1.0) + hp_cov_error(x, N, z, w);
      CHECK(close(hp, ito_covariation(x, hp_var, N, z, w), 1e-9));
    }
}

TEST_CASE("covariation kernel examples") {
  const double x = 1.3;
  const cplx z = 0.4 + 0.1i, w = -0.2 + 0.5i;
  const CharPolyDerivs fz{1.0 - x * z, -x, 0.0}, fw{1.0 - x * w, -x, 0.0};
  CHECK(close(covariation_kernel(fz, fw, z, w, 1.0), z * w * x * x, 1e-14));
  CHECK(close(covariation_kernel(fz, fz, z, z, 1.0), z * z * x * x, 1e-14));
  CHECK(covariation_kernel(fz, fw, 0.0, w, 1.0) == 0.0);
  const CharPolyDerivs c{2.0, 0.0, 0.0};
  CHECK(covariation_kernel(c, c, z, w, 1.0) == 0.0);

  const double y0 = 0.3;
  CHECK(close(hp_cov_error(std::vector{y0}, 1, 1.0, 1.0), 2.0, 1e-14));
  CHECK(hp_cov_error(std::vector{y0}, 1, 0.0, 1.0) == 0.0);
}

TEST_CASE("HP covariation error decays with N") {
  CounterRng rng(8, 0);
  const cplx z = 0.5 + 0.2i, w = -0.3 + 0.4i;
  double prev = 1e300;
  for (int N : {4, 16, 64, 256}) {
    std::vector<double> y(N);
    for (auto& v : y) v = N * (2.0 * rng.uniform() - 1.0);
    std::sort(y.begin(), y.end(), std::greater<>());
    const double e = std::abs(hp_cov_error(y, N, z, w)) / std::abs(eval_revcharpoly(y, N, z) * eval_revcharpoly(y, N, w));
    CHECK(e < prev);
    prev = e;
  }
}

TEST_CASE("Stieltjes transform and its drift") {
  CHECK(close(stieltjes_psi(std::vector{1.0}, 0.0), -1.0, 1e-15));
  CHECK(stieltjes_psi(std::vector<double>{}, 0.7) == 0.0);
  CHECK(psi_drift(0.0, 0.0, 0.4, 1.2) == 0.0);
  CHECK(close(psi_drift(0.7, -0.2, 0.0, 1.2), 0.6 * 0.7, 1e-15));

  const std::vector<double> x{2.0, 0.9, 0.25};
  const double h = 1e-5, theta = 0.7;
  for (cplx z : kPoints) {
    const cplx num = (stieltjes_psi(x, z + h) - stieltjes_psi(x, z - h)) / (2 * h);
    CHECK(close(stieltjes_psi_derivative(x, z), num, 1e-8));
    const cplx logd = (eval_revcharpoly(x, 1, z + h) / eval_revcharpoly(x, 1, z - h));
    CHECK(close(stieltjes_psi(x, z), std::log(logd) / (2 * h), 1e-8));

    // drift of psi = d/dz of the Ito drift of log f
    auto log_drift = [&](cplx u) {
      const auto d = derivatives_revcharpoly(x, 1, u);
      return gl_spde_drift(d, u, theta) / d.f - 0.5 * covariation_kernel(d, d, u, u, 1.0) / (d.f * d.f);
    };
    const cplx want = (log_drift(z + h) - log_drift(z - h)) / (2 * h);
    CHECK(close(psi_drift(stieltjes_psi(x, z), stieltjes_psi_derivative(x, z), z, theta), want, 1e-7));
  }
}
