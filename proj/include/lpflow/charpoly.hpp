#pragma once

#include <complex>
#include <span>
#include <variant>
#include <vector>

namespace lpflow {

using cplx = std::complex<double>;

struct UpsilonPlusPoint {
  std::vector<double> xs;  // nonincreasing, nonnegative
  double gamma = 0.0;

  void validate() const;
  // drops the tail once its sum is below rel_tol * gamma
  UpsilonPlusPoint truncated(double rel_tol = 1e-10) const;
};

struct UpsilonPoint {
  std::vector<double> xs_plus;
  std::vector<double> xs_minus;
  double gamma = 0.0;
  double delta = 0.0;

  void validate() const;
  UpsilonPoint truncated(double rel_tol = 1e-10) const;
};

struct LPFunction {
  std::variant<UpsilonPlusPoint, UpsilonPoint> coords;
  cplx operator()(cplx z) const;
};

cplx eval_lp_plus(const UpsilonPlusPoint& v, cplx z);
cplx eval_lp_full(const UpsilonPoint& u, cplx z);

// prod_i (1 - x_i z / N)
cplx eval_revcharpoly(std::span<const double> x, int N, cplx z);

struct CharPolyDerivs {
  cplx f;
  cplx df;
  cplx d2f;
};

// Exact sum formulas; PoleError when z x_i / N == 1.
CharPolyDerivs derivatives_revcharpoly(std::span<const double> x, int N, cplx z);

cplx gl_spde_drift(const CharPolyDerivs& d, cplx z, double theta);
cplx rv_spde_drift(const CharPolyDerivs& d, cplx z, double nu);
cplx rv_spde_drift_finiteN(const CharPolyDerivs& d, cplx z, double nu, int N);
cplx hp_spde_drift(const CharPolyDerivs& d, cplx z, cplx s);
cplx hp_spde_drift_finiteN(const CharPolyDerivs& d, cplx z, cplx s, int N);

// factor * zw/(z-w) (f(z)f'(w) - f(w)f'(z)), continued analytically to z = w.
cplx covariation_kernel(const CharPolyDerivs& at_z, const CharPolyDerivs& at_w, cplx z, cplx w,
                        double factor);

// (2zw/N^2) sum_i f(z)f(w) / ((1 - y_i z/N)(1 - y_i w/N))
cplx hp_cov_error(std::span<const double> y, int N, cplx z, cplx w, cplx f_z, cplx f_w);
cplx hp_cov_error(std::span<const double> y, int N, cplx z, cplx w);

// sum_i -x_i / (1 - x_i z) for already rescaled x
cplx stieltjes_psi(std::span<const double> x, cplx z);
cplx stieltjes_psi_derivative(std::span<const double> x, cplx z);
cplx psi_drift(cplx psi, cplx dpsi, cplx z, double theta);

}  // namespace lpflow
