#include "lpflow/dyson.hpp"

#include <cmath>

#include "lpflow/sde_core.hpp"

namespace lpflow {

std::vector<double> dyson_drift_vector(std::span<const double> d, double c) {
  require_drift_evaluable(d, false);
  const std::size_t n = d.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = -c * d[i];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 1.0 / (d[i] - d[j]);
      out[i] += v;
      out[j] -= v;
    }
  return out;
}

double ou_variance_factor(double c, double t) {
  const double ct = c * t;
  if (std::abs(ct) < 1e-8) return t * (1.0 - ct);
  return -std::expm1(-2.0 * ct) / (2.0 * c);
}

cplx explicit_solution(const std::function<cplx(cplx)>& D0, double c, double t, cplx z) {
  return D0(z * std::exp(-c * t)) * std::exp(-0.5 * z * z * ou_variance_factor(c, t));
}

UpsilonPoint parameter_flow(const UpsilonPoint& u0, double c, double t) {
  UpsilonPoint u = u0;
  const double e = std::exp(-c * t);
  for (auto& v : u.xs_plus) v *= e;
  for (auto& v : u.xs_minus) v *= e;
  u.gamma *= e;
  u.delta = ou_variance_factor(c, t) + u0.delta * e * e;
  return u;
}

cplx pde_residual(const std::function<cplx(double, cplx)>& D, double c, double t, cplx z,
                  double h_z, double h_t) {
  const cplx dt = (D(t + h_t, z) - D(t - h_t, z)) / (2.0 * h_t);
  const cplx dz = (D(t, z + h_z) - D(t, z - h_z)) / (2.0 * h_z);
  return dt + 0.5 * z * z * D(t, z) + c * z * dz;
}

}  // namespace lpflow
