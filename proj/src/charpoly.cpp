#include "lpflow/charpoly.hpp"

#include <cmath>
#include <stdexcept>

#include "lpflow/errors.hpp"

namespace lpflow {

namespace {

void require_nonincreasing_nonneg(const std::vector<double>& xs, const char* what) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] >= 0.0)) throw std::invalid_argument(std::string(what) + ": negative coordinate");
    if (i > 0 && xs[i] > xs[i - 1])
      throw std::invalid_argument(std::string(what) + ": coordinates must be nonincreasing");
  }
}

// keeps the shortest prefix whose discarded tail is below tol
std::size_t cut_length(const std::vector<double>& xs, double tol, bool squares) {
  double tail = 0.0;
  std::size_t k = xs.size();
  while (k > 0) {
    const double v = squares ? xs[k - 1] * xs[k - 1] : xs[k - 1];
    if (tail + v >= tol) break;
    tail += v;
    --k;
  }
  return k;
}

}  // namespace

void UpsilonPlusPoint::validate() const {
  require_nonincreasing_nonneg(xs, "UpsilonPlusPoint");
  double sum = 0.0;
  for (double v : xs) sum += v;
  if (sum > gamma * (1.0 + 1e-12) + 1e-300)
    throw std::invalid_argument("UpsilonPlusPoint: sum of coordinates exceeds gamma");
}

UpsilonPlusPoint UpsilonPlusPoint::truncated(double rel_tol) const {
  UpsilonPlusPoint out = *this;
  out.xs.resize(cut_length(xs, rel_tol * gamma, false));
  return out;
}

void UpsilonPoint::validate() const {
  require_nonincreasing_nonneg(xs_plus, "UpsilonPoint");
  require_nonincreasing_nonneg(xs_minus, "UpsilonPoint");
  if (delta < 0.0) throw std::invalid_argument("UpsilonPoint: delta must be >= 0");
  double sq = 0.0;
  for (double v : xs_plus) sq += v * v;
  for (double v : xs_minus) sq += v * v;
  if (sq > delta * (1.0 + 1e-12) + 1e-300)
    throw std::invalid_argument("UpsilonPoint: sum of squares exceeds delta");
}

UpsilonPoint UpsilonPoint::truncated(double rel_tol) const {
  UpsilonPoint out = *this;
  // split the budget evenly between the two sides
  out.xs_plus.resize(cut_length(xs_plus, 0.5 * rel_tol * delta, true));
  out.xs_minus.resize(cut_length(xs_minus, 0.5 * rel_tol * delta, true));
  return out;
}

cplx eval_lp_plus(const UpsilonPlusPoint& v, cplx z) {
  double sum = 0.0;
  cplx prod = 1.0;
  for (double x : v.xs) {
    sum += x;
    prod *= 1.0 - z * x;
  }
  return std::exp(-(v.gamma - sum) * z) * prod;
}

cplx eval_lp_full(const UpsilonPoint& u, cplx z) {
  double sq = 0.0;
  cplx prod = 1.0;
  for (double x : u.xs_plus) {
    sq += x * x;
    prod *= (1.0 - z * x) * std::exp(z * x);
  }
  for (double x : u.xs_minus) {
    sq += x * x;
    prod *= (1.0 + z * x) * std::exp(-z * x);
  }
  return std::exp(-u.gamma * z - 0.5 * (u.delta - sq) * z * z) * prod;
}

cplx LPFunction::operator()(cplx z) const {
  return std::visit(
      [z](const auto& c) -> cplx {
        if constexpr (std::is_same_v<std::decay_t<decltype(c)>, UpsilonPlusPoint>)
          return eval_lp_plus(c, z);
        else
          return eval_lp_full(c, z);
      },
      coords);
}

cplx eval_revcharpoly(std::span<const double> x, int N, cplx z) {
  cplx prod = 1.0;
  for (double v : x) prod *= 1.0 - v * z / static_cast<double>(N);
  return prod;
}

CharPolyDerivs derivatives_revcharpoly(std::span<const double> x, int N, cplx z) {
  cplx f = 1.0, s1 = 0.0, s2 = 0.0;
  for (double v : x) {
    const double a = v / N;
    const cplx d = 1.0 - a * z;
    if (std::abs(d) <= 1e-14 * (1.0 + std::abs(a * z))) throw PoleError("z at a reciprocal zero");
    f *= d;
    const cplx r = a / d;
    s1 += r;
    s2 += r * r;
  }
  return {f, -f * s1, f * (s1 * s1 - s2)};
}

cplx gl_spde_drift(const CharPolyDerivs& d, cplx z, double theta) {
  return 0.5 * theta * z * d.df - 0.5 * z * z * d.d2f;
}

cplx rv_spde_drift(const CharPolyDerivs& d, cplx z, double nu) {
  return -0.5 * z * d.f - 0.5 * nu * z * d.df - 0.5 * z * z * d.d2f;
}

cplx rv_spde_drift_finiteN(const CharPolyDerivs& d, cplx z, double nu, int N) {
  if (N < 1) throw std::invalid_argument("N must be >= 1");
  return rv_spde_drift(d, z, nu) + z * z / (2.0 * N) * d.df;
}

cplx hp_spde_drift(const CharPolyDerivs& d, cplx z, cplx s) {
  return -(2.0 * s.imag() * z + z * z) * d.f - 2.0 * s.real() * z * d.df - z * z * d.d2f;
}

cplx hp_spde_drift_finiteN(const CharPolyDerivs& d, cplx z, cplx s, int N) {
  if (N < 1) throw std::invalid_argument("N must be >= 1");
  const double n = N;
  const cplx z2 = z * z, z3 = z2 * z;
  const cplx corr =
      z2 * d.f + (2.0 * z2 * s.imag() + 2.0 * z3 - 2.0 * z3 / n) * d.df - (z2 * z2 / n) * d.d2f;
  return hp_spde_drift(d, z, s) + corr / n;
}

cplx covariation_kernel(const CharPolyDerivs& at_z, const CharPolyDerivs& at_w, cplx z, cplx w,
                        double factor) {
  if (std::abs(z - w) < 1e-6 * (1.0 + std::abs(z))) {
    // continuation at the midpoint data of z
    return factor * z * w * (at_z.df * at_w.df - 0.5 * (at_z.f * at_w.d2f + at_w.f * at_z.d2f));
  }
  return factor * z * w / (z - w) * (at_z.f * at_w.df - at_w.f * at_z.df);
}

cplx hp_cov_error(std::span<const double> y, int N, cplx z, cplx w, cplx f_z, cplx f_w) {
  cplx sum = 0.0;
  for (double v : y) {
    const cplx dz = 1.0 - v * z / static_cast<double>(N);
    const cplx dw = 1.0 - v * w / static_cast<double>(N);
    if (std::abs(dz) <= 1e-14 || std::abs(dw) <= 1e-14) throw PoleError("hp_cov_error: pole");
    sum += 1.0 / (dz * dw);
  }
  return 2.0 * z * w / (static_cast<double>(N) * N) * f_z * f_w * sum;
}

cplx hp_cov_error(std::span<const double> y, int N, cplx z, cplx w) {
  return hp_cov_error(y, N, z, w, eval_revcharpoly(y, N, z), eval_revcharpoly(y, N, w));
}

cplx stieltjes_psi(std::span<const double> x, cplx z) {
  cplx sum = 0.0;
  for (double v : x) {
    const cplx d = 1.0 - v * z;
    if (std::abs(d) <= 1e-14 * (1.0 + std::abs(v * z))) throw PoleError("stieltjes_psi: pole");
    sum -= v / d;
  }
  return sum;
}

cplx stieltjes_psi_derivative(std::span<const double> x, cplx z) {
  cplx sum = 0.0;
  for (double v : x) {
    const cplx d = 1.0 - v * z;
    if (std::abs(d) <= 1e-14 * (1.0 + std::abs(v * z))) throw PoleError("stieltjes_psi: pole");
    sum -= v * v / (d * d);
  }
  return sum;
}

cplx psi_drift(cplx psi, cplx dpsi, cplx z, double theta) {
  return 0.5 * theta * (psi + z * dpsi) - (z * psi * psi + z * z * psi * dpsi);
}

}  // namespace lpflow
