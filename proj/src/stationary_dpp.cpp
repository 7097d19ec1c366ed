#include "lpflow/stationary_dpp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/bessel.hpp>

#include "lpflow/errors.hpp"
#include "lpflow/quadrature.hpp"

namespace lpflow {

double bessel_j(double alpha, double x) {
  if (x < 0.0) throw std::domain_error("bessel_j: x must be >= 0");
  if (x == 0.0) {
    if (alpha == 0.0) return 1.0;
    if (alpha > 0.0 || alpha == std::floor(alpha)) return 0.0;
  }
  return boost::math::cyl_bessel_j(alpha, x);
}

namespace {

// d/du [sqrt(u) J_a(u)]
double sqrt_bessel_derivative(double a, double u) {
  const double ja = bessel_j(a, u);
  const double dja = 0.5 * (boost::math::cyl_bessel_j(a - 1.0, u) - bessel_j(a + 1.0, u));
  return ja / (2.0 * std::sqrt(u)) + std::sqrt(u) * dja;
}

constexpr double kDiagonalSwitch = 1e-5;

}  // namespace

double bessel_hard_edge_kernel(double nu, double u, double v) {
  if (!(u > 0.0) || !(v > 0.0)) throw std::domain_error("bessel kernel: arguments must be positive");
  if (std::abs(u - v) < kDiagonalSwitch * std::max(u, v)) {
    const double m = std::sqrt(0.5 * (u + v));
    const double jn = bessel_j(nu, m);
    return 0.25 * (jn * jn - bessel_j(nu + 1.0, m) * boost::math::cyl_bessel_j(nu - 1.0, m));
  }
  const double su = std::sqrt(u), sv = std::sqrt(v);
  const double num = su * bessel_j(nu + 1.0, su) * bessel_j(nu, sv) -
                     sv * bessel_j(nu + 1.0, sv) * bessel_j(nu, su);
  return num / (2.0 * (u - v));
}

double inverse_bessel_kernel(double nu, double x, double y) {
  if (!(nu > -1.0)) throw std::domain_error("inverse_bessel_kernel: nu > -1 required");
  if (!(x > 0.0) || !(y > 0.0)) throw std::domain_error("inverse_bessel_kernel: x, y > 0 required");
  return 4.0 / (x * y) * bessel_hard_edge_kernel(nu, 4.0 / x, 4.0 / y);
}

double hp_kernel(double s, double x, double y) {
  if (!(s > -0.5)) throw std::domain_error("hp_kernel: s > -1/2 required");
  if (x == 0.0 || y == 0.0) throw std::domain_error("hp_kernel: x, y must be nonzero");
  const double a = s + 0.5, b = s - 0.5;
  const double w1 = 1.0 / x, w2 = 1.0 / y;
  const double jac = 1.0 / (std::abs(x) * std::abs(y));
  if ((x > 0) == (y > 0) &&
      std::abs(w1 - w2) < kDiagonalSwitch * std::max(std::abs(w1), std::abs(w2))) {
    const double u = 0.5 * (std::abs(w1) + std::abs(w2));
    const double su = std::sqrt(u);
    const double diag = 0.5 * (sqrt_bessel_derivative(a, u) * su * bessel_j(b, u) -
                               sqrt_bessel_derivative(b, u) * su * bessel_j(a, u));
    return diag * jac;
  }
  auto A = [a](double w) {
    const double u = std::abs(w);
    return std::sqrt(u) * (w > 0 ? 1.0 : -1.0) * bessel_j(a, u);
  };
  auto B = [b](double w) {
    const double u = std::abs(w);
    return std::sqrt(u) * bessel_j(b, u);
  };
  const double kw = (A(w1) * B(w2) - B(w1) * A(w2)) / (2.0 * (w1 - w2));
  return kw * jac;
}

namespace {

// Panels are uniform in s = T(x): s = x, log|x| or 1/x. Nodes are placed in
// s, so every panel resolves the same share of the transformed interval.
struct PanelMap {
  Spacing spacing;
  double sign;
  double to_s(double x) const {
    switch (spacing) {
      case Spacing::Log: return std::log(std::abs(x));
      case Spacing::Reciprocal: return 1.0 / x;
      default: return x;
    }
  }
  double to_x(double s) const {
    switch (spacing) {
      case Spacing::Log: return sign * std::exp(s);
      case Spacing::Reciprocal: return 1.0 / s;
      default: return s;
    }
  }
  double jacobian(double x) const {  // |dx/ds|
    switch (spacing) {
      case Spacing::Log: return std::abs(x);
      case Spacing::Reciprocal: return x * x;
      default: return 1.0;
    }
  }
};

PanelMap panel_map(const Interval& iv, Spacing spacing) {
  const auto [lo, hi] = iv;
  if (!(lo < hi)) throw std::invalid_argument("discretize_kernel: empty interval");
  if (spacing != Spacing::Uniform && lo <= 0.0 && hi >= 0.0)
    throw std::invalid_argument("discretize_kernel: interval must not contain zero");
  return {spacing, lo > 0.0 ? 1.0 : -1.0};
}

constexpr int kPanelNodes = 16;

DiscretizedKernel build(const std::function<double(double, double)>& kernel,
                        const std::vector<Interval>& domain, int n_nodes, const std::string& id,
                        Spacing spacing) {
  DiscretizedKernel dk;
  dk.kernel_id = id;
  dk.domain = domain;
  dk.spacing = spacing;
  const int panels = std::max(1, (n_nodes + kPanelNodes - 1) / kPanelNodes);
  dk.resolution = panels * kPanelNodes;
  const auto [gx, gw] = gauss_legendre(kPanelNodes);
  for (const auto& iv : domain) {
    const auto map = panel_map(iv, spacing);
    const double s0 = map.to_s(iv.first), s1 = map.to_s(iv.second);
    for (int p = 0; p < panels; ++p) {
      const double a = s0 + (s1 - s0) * p / panels, b = s0 + (s1 - s0) * (p + 1) / panels;
      const double c = 0.5 * (a + b), h = 0.5 * std::abs(b - a);
      double edge = c - h;
      for (int i = 0; i < kPanelNodes; ++i) {
        const double x = map.to_x(c + h * gx[i]);
        dk.grid.push_back(x);
        dk.weights.push_back(h * gw[i] * map.jacobian(x));
        dk.cells.emplace_back(edge, edge + h * gw[i]);
        edge += h * gw[i];
      }
    }
  }
  // keep the grid increasing across intervals
  std::vector<std::size_t> order(dk.grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return dk.grid[i] < dk.grid[j]; });
  std::vector<double> g, w;
  std::vector<Interval> cells;
  for (auto i : order) {
    g.push_back(dk.grid[i]);
    w.push_back(dk.weights[i]);
    cells.push_back(dk.cells[i]);
  }
  dk.grid = std::move(g);
  dk.weights = std::move(w);
  dk.cells = std::move(cells);

  const auto n = static_cast<Eigen::Index>(dk.grid.size());
  dk.matrix.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = std::sqrt(dk.weights[i] * dk.weights[j]) * kernel(dk.grid[i], dk.grid[j]);
      dk.matrix(i, j) = v;
      dk.matrix(j, i) = v;
    }
  // The unit shift lifts the large cluster of near-zero eigenvalues, which
  // otherwise stalls deflation in the QR iteration.
  const Eigen::MatrixXd shifted = dk.matrix + Eigen::MatrixXd::Identity(n, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(shifted);
  if (es.info() != Eigen::Success) throw NumericalFailure("discretize_kernel: eigensolver failed");
  dk.eigenvalues = es.eigenvalues().array() - 1.0;
  dk.eigenvectors = es.eigenvectors();
  double clip = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double& l = dk.eigenvalues[i];
    clip = std::max({clip, -l, l - 1.0});
    l = std::clamp(l, 0.0, 1.0);
  }
  dk.clip_magnitude = clip;
  return dk;
}

}  // namespace

DiscretizedKernel discretize_kernel(const std::function<double(double, double)>& kernel,
                                    const std::vector<Interval>& domain, int n_nodes,
                                    const std::string& kernel_id, Spacing spacing) {
  auto dk = build(kernel, domain, n_nodes, kernel_id, spacing);
  if (dk.clip_magnitude > kClipTolerance) {
    dk = build(kernel, domain, 2 * dk.resolution, kernel_id, spacing);
    dk.clip_warning = dk.clip_magnitude > kClipTolerance;
  }
  return dk;
}

PointConfiguration sample_dpp(const DiscretizedKernel& dk, CounterRng& rng) {
  PointConfiguration cfg;
  cfg.kernel_id = dk.kernel_id;
  cfg.domain = dk.domain;
  cfg.resolution = dk.resolution;
  cfg.clip_magnitude = dk.clip_magnitude;
  cfg.clip_warning = dk.clip_warning;

  const auto n = dk.eigenvalues.size();
  std::vector<Eigen::Index> chosen;
  for (Eigen::Index i = 0; i < n; ++i)
    if (rng.uniform() < dk.eigenvalues[i]) chosen.push_back(i);
  const auto k = static_cast<Eigen::Index>(chosen.size());
  Eigen::MatrixXd V(n, k);
  for (Eigen::Index c = 0; c < k; ++c) V.col(c) = dk.eigenvectors.col(chosen[c]);

  // Chain rule for the projection kernel V V^T: the residual diagonal p is
  // the conditional intensity given the points chosen so far.
  Eigen::VectorXd p = V.rowwise().squaredNorm();
  Eigen::MatrixXd E(n, k);
  for (Eigen::Index step = 0; step < k; ++step) {
    for (Eigen::Index m = 0; m < n; ++m) p[m] = std::max(p[m], 0.0);
    const double u = rng.uniform() * p.sum();
    double acc = 0.0;
    Eigen::Index m = 0, last = 0;
    for (; m < n; ++m) {
      if (p[m] <= 0.0) continue;
      last = m;
      acc += p[m];
      if (acc >= u) break;
    }
    if (m == n) m = last;
    const auto [c0, c1] = dk.cells[m];
    const double sign = dk.grid[m] > 0.0 ? 1.0 : -1.0;
    cfg.points.push_back(PanelMap{dk.spacing, sign}.to_x(c0 + (c1 - c0) * rng.uniform()));

    Eigen::VectorXd e = V * V.row(m).transpose();
    for (Eigen::Index j = 0; j < step; ++j) e -= E.col(j) * E(m, j);
    e /= std::sqrt(p[m]);
    E.col(step) = e;
    p -= e.cwiseAbs2();
    p[m] = 0.0;
  }
  std::sort(cfg.points.begin(), cfg.points.end(), std::greater<>());
  return cfg;
}

std::complex<double> eval_zeta_bessel(const PointConfiguration& cfg, std::complex<double> z) {
  std::complex<double> prod = 1.0;
  for (double x : cfg.points) prod *= 1.0 - z * x;
  return prod;
}

ZetaCutoff eval_zeta_hp(const PointConfiguration& cfg, std::complex<double> z, int cutoff_k) {
  if (cutoff_k < 1) throw std::invalid_argument("eval_zeta_hp: cutoff_k >= 1");
  const double cut = 1.0 / (static_cast<double>(cutoff_k) * cutoff_k);
  const double prev = cutoff_k == 1 ? INFINITY : 1.0 / (static_cast<double>(cutoff_k - 1) * (cutoff_k - 1));
  std::complex<double> now = 1.0, before = 1.0;
  for (double x : cfg.points) {
    const double a = std::abs(x);
    if (a > cut) now *= 1.0 - z * x;
    if (a > prev) before *= 1.0 - z * x;
  }
  return {now, now - before};
}

}  // namespace lpflow
