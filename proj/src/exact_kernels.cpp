#include "lpflow/exact_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lpflow/errors.hpp"
#include "lpflow/parallel.hpp"
#include "lpflow/quadrature.hpp"

namespace lpflow {

void KernelQuery::validate() const {
  if (N < 1) throw std::invalid_argument("KernelQuery: N >= 1");
  if (!(t > 0.0)) throw std::invalid_argument("KernelQuery: t > 0");
}

namespace {

double log_drift(double t, int N, double theta) { return ((1.0 + theta) / 2.0 - N) * t; }

void require_gbm_args(double x, double y, double t) {
  if (!(x > 0.0) || !(y > 0.0) || !(t > 0.0))
    throw std::domain_error("gbm_density: x, y, t must be positive");
}

// log prod_{i<j} (v_i - v_j) for a strictly decreasing vector
double log_vandermonde(std::span<const double> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j) s += std::log(v[i] - v[j]);
  return s;
}

bool strictly_decreasing(std::span<const double> v) {
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    if (!(v[i] > v[i + 1])) return false;
  return true;
}

}  // namespace

double gbm_density(double x, double y, double t, int N, double theta) {
  require_gbm_args(x, y, t);
  const double e = std::log(y / x) - log_drift(t, N, theta);
  return std::exp(-e * e / (2.0 * t)) / (y * std::sqrt(2.0 * std::numbers::pi * t));
}

double gbm_density_dx(double x, double y, double t, int N, double theta) {
  const double e = std::log(y / x) - log_drift(t, N, theta);
  return gbm_density(x, y, t, N, theta) * e / (t * x);
}

double lambda_const(int N, double theta) {
  return N * (N - 1.0) * (3.0 * theta + 2.0 - 4.0 * N) / 12.0;
}

double km_transition_density(std::span<const double> x, std::span<const double> y, double t,
                             double theta) {
  const std::size_t n = x.size();
  if (y.size() != n) throw std::invalid_argument("km_transition_density: size mismatch");
  if (!(t > 0.0)) throw std::domain_error("km_transition_density: t must be positive");
  require_drift_evaluable(x, true);
  for (double v : y)
    if (!(v > 0.0)) return 0.0;
  if (!strictly_decreasing(y)) return 0.0;
  const int N = static_cast<int>(n);
  Eigen::MatrixXd q(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) q(i, j) = gbm_density(x[i], y[j], t, N, theta);
  const double det = Eigen::FullPivLU<Eigen::MatrixXd>(q).determinant();
  const double scale = std::exp(-lambda_const(N, theta) * t + log_vandermonde(y) - log_vandermonde(x));
  const double value = scale * det;
  if (value < -1e-12) throw NumericalFailure("km_transition_density: negative density");
  return std::max(0.0, value);
}

bool interlaces(std::span<const double> x, std::span<const double> y, double slack) {
  if (x.size() != y.size() + 1) return false;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] > x[i] + slack || y[i] < x[i + 1] - slack) return false;
  return true;
}

double interlace_density(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() + 1) throw std::invalid_argument("interlace_density: size mismatch");
  if (!strictly_decreasing(x)) throw DegenerateConfiguration("interlace_density: coincident x");
  if (!interlaces(x, y)) return 0.0;
  if (!strictly_decreasing(y)) return 0.0;
  double log_fact = std::lgamma(static_cast<double>(y.size()) + 1.0);
  return std::exp(log_fact + log_vandermonde(y) - log_vandermonde(x));
}

Eigen::MatrixXcd sample_haar_unitary(int n, CounterRng& rng) {
  Eigen::MatrixXcd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = {rng.normal(), rng.normal()};
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ();
  const auto& r = qr.matrixQR();
  for (int j = 0; j < n; ++j) {
    const std::complex<double> d = r(j, j);
    const double a = std::abs(d);
    q.col(j) *= (a > 0.0) ? d / a : std::complex<double>(1.0);
  }
  return q;
}

ChamberPoint sample_corner(const ChamberPoint& x, CounterRng& rng) {
  const int n1 = static_cast<int>(x.size());
  if (n1 < 2) throw std::invalid_argument("sample_corner: need at least 2 coordinates");
  const Eigen::MatrixXcd u = sample_haar_unitary(n1, rng);
  Eigen::VectorXd d(n1);
  for (int i = 0; i < n1; ++i) d[i] = x[i];
  const Eigen::MatrixXcd m = u.adjoint() * d.asDiagonal() * u;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m.topLeftCorner(n1 - 1, n1 - 1),
                                                      Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalFailure("sample_corner: eigensolver failed");
  std::vector<double> y(n1 - 1);
  const double scale = std::max(std::abs(x[0]), std::abs(x[n1 - 1]));
  const double slack = 1e-10 * std::max(1.0, scale);
  for (int i = 0; i < n1 - 1; ++i) {
    double v = es.eigenvalues()[n1 - 2 - i];
    if (v > x[i] + slack || v < x[i + 1] - slack)
      throw NumericalFailure("sample_corner: interlacing violated");
    y[i] = std::clamp(v, x[i + 1], x[i]);
  }
  return {std::move(y), x.positive};
}

double check_1d_intertwining(double x, double y, double t, int N, double theta,
                             int quadrature_order) {
  if (t < 1e-3) throw std::domain_error("check_1d_intertwining: requires t >= 1e-3");
  require_gbm_args(x, y, t);
  const double lhs = gbm_density(x, y, t, N, theta);
  // integrate over u = log z, where the integrand is Gaussian around m
  const double m = std::log(x) + log_drift(t, N + 1, theta);
  const double lo = std::log(y);
  const double hi = std::max(lo, m) + 40.0 * std::sqrt(t);
  auto f = [&](double u) {
    const double z = std::exp(u);
    return gbm_density_dx(x, z, t, N + 1, theta) * z;
  };
  const double integral = integrate_gk(f, lo, hi, 1e-14, 1e-12, quadrature_order).value;
  const double rhs = std::exp(-(theta / 2.0 - N) * t) * integral;
  return std::abs(lhs - rhs);
}

IntertwiningSamples mc_intertwining_test(const ChamberPoint& x, double t, double theta,
                                         std::size_t n_samples, std::uint64_t seed,
                                         const IntegratorConfig& cfg) {
  require_drift_evaluable(x.values, true);
  const ModelParams params{Model::GL, theta};
  IntertwiningSamples out;
  out.a.resize(n_samples);
  out.b.resize(n_samples);
  parallel_for(n_samples, [&](std::size_t i) {
    CounterRng ra(seed, 2 * i);
    const ChamberPoint xa = evolve(x, params, cfg, 0.0, t, ra, i);
    out.a[i] = sample_corner(xa, ra).values;

    CounterRng rb(seed, 2 * i + 1);
    const ChamberPoint yb = sample_corner(x, rb);
    out.b[i] = evolve(yb, params, cfg, 0.0, t, rb, i).values;
  });
  return out;
}

}  // namespace lpflow
