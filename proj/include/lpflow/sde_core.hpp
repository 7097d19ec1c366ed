#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lpflow/rng.hpp"

namespace lpflow {

struct ChamberPoint {
  std::vector<double> values;
  bool positive = true;  // GL/RV live in (0,inf), HP/Dyson on the line

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

enum class Model { GL, RV, HP, Dyson };

const char* model_name(Model m);
Model model_from_name(const std::string& name);
bool model_is_positive(Model m);

struct ModelParams {
  Model model = Model::GL;
  double theta = 0.0;
  double nu = 0.0;
  double s_re = 0.0;
  double s_im = 0.0;
  double c = 0.0;
};

struct IntegratorConfig {
  double dt_max = 1e-3;
  double dt_min = 1e-15;
  double collision_guard = 1e-6;
  int max_substeps = 40;  // maximal halving depth of one nominal step
  std::uint64_t seed = 0;

  void validate() const;
};

// Dense storage: data[(path * n_times + k) * n_particles + i].
struct PathEnsemble {
  std::vector<double> times;
  std::size_t n_paths = 0;
  std::size_t n_particles = 0;
  std::vector<double> data;
  ModelParams params;
  std::uint64_t seed = 0;

  std::size_t n_times() const { return times.size(); }
  std::span<const double> at(std::size_t path, std::size_t k) const {
    return {data.data() + (path * times.size() + k) * n_particles, n_particles};
  }
  std::span<double> at(std::size_t path, std::size_t k) {
    return {data.data() + (path * times.size() + k) * n_particles, n_particles};
  }
  ChamberPoint point(std::size_t path, std::size_t k) const;
};

// Throws DegenerateConfiguration unless strictly decreasing (and positive
// when required).
void require_drift_evaluable(std::span<const double> x, bool positive);

std::vector<double> gl_drift_vector(std::span<const double> x, double theta);
std::vector<double> rv_drift_vector(std::span<const double> x, double nu);
std::vector<double> hp_drift_vector(std::span<const double> y, double s_re, double s_im);
std::vector<double> hp_diffusion_vector(std::span<const double> y);

// Euler-Maruyama step; std::nullopt signals rejection (ordering, positivity
// or collision guard violated), and the caller refines dt.
std::optional<ChamberPoint> step_euler(const ChamberPoint& x, const ModelParams& params, double dt,
                                       std::span<const double> gaussians,
                                       double collision_guard = 1e-6);

// Same step driven by Brownian increments dW (variance dt each).
std::optional<ChamberPoint> step_increments(const ChamberPoint& x, const ModelParams& params,
                                            double dt, std::span<const double> dW,
                                            double collision_guard);

// Drift-implicit variant: the singular pair repulsion is evaluated at the end
// point, so the result stays ordered for every dt. Used when refinement of
// the explicit step is exhausted near a collision.
std::optional<ChamberPoint> step_pair_implicit(const ChamberPoint& x, const ModelParams& params,
                                               double dt, std::span<const double> dW,
                                               double collision_guard);

// Integrates one path over [t0, t1] with Brownian-bridge refinement of
// rejected steps. Throws StiffFailure tagged with path_id.
ChamberPoint evolve(const ChamberPoint& x0, const ModelParams& params, const IntegratorConfig& cfg,
                    double t0, double t1, CounterRng& rng, std::size_t path_id = 0);

PathEnsemble simulate_ensemble(const ChamberPoint& initial, const ModelParams& params,
                               const IntegratorConfig& cfg, const std::vector<double>& times,
                               std::size_t n_paths);

// ---- matrix model and time conventions ----

Eigen::MatrixXcd step_matrix_gl(const Eigen::MatrixXcd& Y, double theta, double dt,
                                const Eigen::MatrixXcd& gaussian_matrix);

// Eigenvalues of Y^dagger Y, decreasing.
ChamberPoint squared_singular_values(const Eigen::MatrixXcd& Y);

namespace timescale {
// matrix time at which the squared singular values feed x at time t
inline double matrix_time(double t) { return t / 4.0; }
// log of the per-N rescaled coordinate x/N
double log_rescaled(double x, int N);
}  // namespace timescale

ChamberPoint rescale_edge(const ChamberPoint& sing_sq, double t, int N);

// Squared singular values of the matrix model started at diag(sqrt(x0)),
// run to the matrix time matching t and rescaled to GL coordinates.
ChamberPoint simulate_matrix_gl(const ChamberPoint& x0, double theta, double t, double dt_matrix,
                                CounterRng& rng);

// ---- truncated infinite systems ----

std::vector<double> truncated_isde_drift(std::span<const double> x, double theta, double gamma);

std::optional<std::pair<ChamberPoint, double>> truncated_isde_step(
    const ChamberPoint& x, double theta, double gamma, double dt, std::span<const double> gaussians);

std::vector<double> hp_isde_drift_residual(std::span<const double> y, std::complex<double> s,
                                           double gamma_hp, double delta);

}  // namespace lpflow
