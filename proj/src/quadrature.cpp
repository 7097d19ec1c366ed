#include "lpflow/quadrature.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <span>
#include <stdexcept>

namespace lpflow {

namespace {

// Kronrod abscissae (descending, centre last), Kronrod weights, and the
// weights of the embedded Gauss rule on the odd-indexed abscissae.
struct GKRule {
  std::span<const double> xgk;
  std::span<const double> wgk;
  std::span<const double> wg;
};

constexpr std::array<double, 8> kX15 = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWK15 = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWG7 = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

constexpr std::array<double, 11> kX21 = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720, 0.0};
constexpr std::array<double, 11> kWK21 = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208956759981, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr std::array<double, 5> kWG10 = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Piece {
  double a, b, value, error;
  bool operator<(const Piece& o) const { return error < o.error; }
};

Piece apply_rule(const GKRule& r, const std::function<double(double)>& f, double a, double b,
                 int& evals) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const std::size_t n = r.xgk.size();
  double k = 0.0, g = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool centre = (i + 1 == n);
    const double v = centre ? f(c) : f(c - h * r.xgk[i]) + f(c + h * r.xgk[i]);
    evals += centre ? 1 : 2;
    k += r.wgk[i] * v;
    if (i % 2 == 1) g += r.wg[i / 2] * v;
  }
  return {a, b, k * h, std::abs((k - g) * h)};
}

}  // namespace

QuadResult integrate_gk(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, double rel_tol, int order, int max_intervals) {
  GKRule rule;
  if (order == 15)
    rule = {kX15, kWK15, kWG7};
  else if (order == 21)
    rule = {kX21, kWK21, kWG10};
  else
    throw std::invalid_argument("integrate_gk: order must be 15 or 21");

  QuadResult res;
  if (a == b) return res;
  std::priority_queue<Piece> heap;
  Piece first = apply_rule(rule, f, a, b, res.evaluations);
  double total = first.value, err = first.error;
  heap.push(first);
  int intervals = 1;
  while (err > std::max(abs_tol, rel_tol * std::abs(total)) && intervals < max_intervals) {
    Piece worst = heap.top();
    heap.pop();
    const double m = 0.5 * (worst.a + worst.b);
    Piece l = apply_rule(rule, f, worst.a, m, res.evaluations);
    Piece r = apply_rule(rule, f, m, worst.b, res.evaluations);
    total += l.value + r.value - worst.value;
    err += l.error + r.error - worst.error;
    heap.push(l);
    heap.push(r);
    ++intervals;
  }
  // re-sum to shed accumulated cancellation in the running totals
  total = 0.0;
  err = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  res.value = total;
  res.error = err;
  return res;
}

QuadResult integrate_to_infinity(const std::function<double(double)>& f, double a, double abs_tol,
                                 double rel_tol, int order) {
  auto g = [&](double s) {
    if (s >= 1.0) return 0.0;
    const double d = 1.0 - s;
    return f(a + s / d) / (d * d);
  };
  return integrate_gk(g, 0.0, 1.0, abs_tol, rel_tol, order);
}

QuadResult integrate_log_positive(const std::function<double(double)>& f, double u_lo,
                                  double u_hi, double abs_tol, double rel_tol, int order) {
  auto g = [&](double u) {
    const double x = std::exp(u);
    return f(x) * x;
  };
  return integrate_gk(g, u_lo, u_hi, abs_tol, rel_tol, order);
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n >= 1");
  std::vector<double> x(n), w(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) p0 = 1.0;
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

}  // namespace lpflow
