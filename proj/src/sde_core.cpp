#include "lpflow/sde_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "lpflow/dyson.hpp"
#include "lpflow/errors.hpp"
#include "lpflow/parallel.hpp"

namespace lpflow {

const char* model_name(Model m) {
  switch (m) {
    case Model::GL: return "GL";
    case Model::RV: return "RV";
    case Model::HP: return "HP";
    case Model::Dyson: return "DYSON";
  }
  return "?";
}

Model model_from_name(const std::string& name) {
  if (name == "GL") return Model::GL;
  if (name == "RV") return Model::RV;
  if (name == "HP") return Model::HP;
  if (name == "DYSON") return Model::Dyson;
  throw std::invalid_argument("unknown model: " + name);
}

bool model_is_positive(Model m) { return m == Model::GL || m == Model::RV; }

void IntegratorConfig::validate() const {
  if (!(dt_min > 0.0) || !(dt_min <= dt_max))
    throw std::invalid_argument("integrator: need 0 < dt_min <= dt_max");
  if (!(collision_guard > 0.0)) throw std::invalid_argument("integrator: collision_guard must be > 0");
  if (max_substeps < 0) throw std::invalid_argument("integrator: max_substeps must be >= 0");
}

ChamberPoint PathEnsemble::point(std::size_t path, std::size_t k) const {
  auto s = at(path, k);
  return {std::vector<double>(s.begin(), s.end()), model_is_positive(params.model)};
}

void require_drift_evaluable(std::span<const double> x, bool positive) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) throw DegenerateConfiguration("non-finite coordinate");
    if (positive && !(x[i] > 0.0)) throw DegenerateConfiguration("coordinate not positive");
    if (i + 1 < x.size() && !(x[i] > x[i + 1]))
      throw DegenerateConfiguration("coordinates not strictly decreasing");
  }
}

namespace {

// sum_{j != i} x_j / (x_i - x_j): the log-coordinate interaction of GL and RV
std::vector<double> log_interaction(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double inv = 1.0 / (x[i] - x[j]);
      out[i] += x[j] * inv;
      out[j] -= x[i] * inv;
    }
  return out;
}

}  // namespace

std::vector<double> gl_drift_vector(std::span<const double> x, double theta) {
  require_drift_evaluable(x, true);
  auto out = log_interaction(x);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * (0.5 * theta + out[i]);
  return out;
}

std::vector<double> rv_drift_vector(std::span<const double> x, double nu) {
  require_drift_evaluable(x, true);
  auto out = log_interaction(x);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * (-0.5 * nu + out[i]) + 0.5;
  return out;
}

std::vector<double> hp_drift_vector(std::span<const double> y, double s_re, double s_im) {
  require_drift_evaluable(y, false);
  const std::size_t n = y.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = 2.0 * (-s_re * y[i] + s_im);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 2.0 * (y[i] * y[j] + 1.0) / (y[i] - y[j]);
      out[i] += v;
      out[j] -= v;
    }
  return out;
}

std::vector<double> hp_diffusion_vector(std::span<const double> y) {
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = std::sqrt(2.0 * (y[i] * y[i] + 1.0));
  return out;
}

namespace {

bool acceptable(const std::vector<double>& x, bool positive, double guard) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) return false;
    if (positive && !(x[i] > 0.0)) return false;
    if (i + 1 < x.size()) {
      const double gap = x[i] - x[i + 1];
      double scale = std::abs(x[i]) + std::abs(x[i + 1]);
      if (!positive) scale = std::max(scale, 1.0);
      if (!(gap > 0.0) || gap < guard * scale) return false;
    }
  }
  return true;
}

// Largest admissible drift displacement, as a fraction of the distance to
// the nearest neighbour in stepping coordinates. Near a collision the
// explicit singular drift would otherwise throw a particle arbitrarily far.
constexpr double kDriftGapFraction = 0.5;

// An accepted step must not land closer to a collision than this fraction of
// its own noise scale; such steps are refined instead, so consecutive steps
// cannot walk a pair into the stiff regime.
constexpr double kNoiseGapFraction = 0.05;

bool noise_gap_ok(std::span<const double> coord, std::span<const double> noise_scale) {
  for (std::size_t i = 0; i + 1 < coord.size(); ++i)
    if (coord[i] - coord[i + 1] < kNoiseGapFraction * std::min(noise_scale[i], noise_scale[i + 1]))
      return false;
  return true;
}

bool drift_move_ok(std::span<const double> coord, std::span<const double> move) {
  const std::size_t n = coord.size();
  for (std::size_t i = 0; i < n; ++i) {
    double gap = std::numeric_limits<double>::infinity();
    if (i > 0) gap = coord[i - 1] - coord[i];
    if (i + 1 < n) gap = std::min(gap, coord[i] - coord[i + 1]);
    if (std::abs(move[i]) > kDriftGapFraction * gap) return false;
  }
  return true;
}

}  // namespace

namespace {

// Drift of one explicit step in stepping coordinates: log x for GL and RV,
// x otherwise. It depends only on the start point, so a rejected step can
// reuse it for its first half.
struct StepDrift {
  std::vector<double> coord;
  std::vector<double> rate;
  std::vector<double> sigma;  // HP diffusion coefficients, empty otherwise
};

StepDrift prepare_step(const ChamberPoint& x, const ModelParams& params) {
  const std::size_t n = x.size();
  require_drift_evaluable(x.values, model_is_positive(params.model));
  StepDrift d;
  switch (params.model) {
    case Model::GL:
    case Model::RV: {
      d.rate = log_interaction(x.values);
      const double shift =
          params.model == Model::GL ? 0.5 * params.theta - 0.5 : -0.5 * params.nu - 0.5;
      d.coord.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        d.coord[i] = std::log(x[i]);
        d.rate[i] += shift;
      }
      break;
    }
    case Model::HP:
      d.coord = x.values;
      d.rate = hp_drift_vector(x.values, params.s_re, params.s_im);
      d.sigma = hp_diffusion_vector(x.values);
      break;
    case Model::Dyson:
      d.coord = x.values;
      d.rate = dyson_drift_vector(x.values, params.c);
      break;
  }
  return d;
}

std::optional<ChamberPoint> step_prepared(const ChamberPoint& x, const ModelParams& params,
                                          const StepDrift& d, double dt,
                                          std::span<const double> dW, double collision_guard) {
  const std::size_t n = x.size();
  const bool positive = model_is_positive(params.model);
  std::vector<double> move(n), out(n);
  for (std::size_t i = 0; i < n; ++i) move[i] = d.rate[i] * dt;
  if (!drift_move_ok(d.coord, move)) return std::nullopt;
  const std::vector<double> unit(n, std::sqrt(dt));
  switch (params.model) {
    case Model::GL: {
      std::vector<double> logx(n);
      for (std::size_t i = 0; i < n; ++i) {
        logx[i] = d.coord[i] + move[i] + dW[i];
        out[i] = std::exp(logx[i]);
      }
      if (!noise_gap_ok(logx, unit)) return std::nullopt;
      break;
    }
    case Model::RV: {
      std::vector<double> logx(n);
      for (std::size_t i = 0; i < n; ++i) {
        out[i] = x[i] * std::exp(move[i] + dW[i]) + 0.5 * dt;
        logx[i] = std::log(std::max(out[i], 1e-300));
      }
      if (!noise_gap_ok(logx, unit)) return std::nullopt;
      break;
    }
    case Model::HP: {
      std::vector<double> scale(n);
      for (std::size_t i = 0; i < n; ++i) {
        out[i] = x[i] + move[i] + d.sigma[i] * dW[i];
        scale[i] = d.sigma[i] * std::sqrt(dt);
      }
      if (!noise_gap_ok(out, scale)) return std::nullopt;
      break;
    }
    case Model::Dyson: {
      for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + move[i] + dW[i];
      if (!noise_gap_ok(out, unit)) return std::nullopt;
      break;
    }
  }
  if (!acceptable(out, positive, collision_guard)) return std::nullopt;
  return ChamberPoint{std::move(out), positive};
}

}  // namespace

std::optional<ChamberPoint> step_increments(const ChamberPoint& x, const ModelParams& params,
                                            double dt, std::span<const double> dW,
                                            double collision_guard) {
  if (dW.size() != x.size()) throw std::invalid_argument("step: one increment per coordinate");
  if (dt == 0.0) return x;
  return step_prepared(x, params, prepare_step(x, params), dt, dW, collision_guard);
}

namespace {

// 1/(e^d - 1) - 1/d, bounded near d = 0
double log_interaction_remainder(double d) {
  if (std::abs(d) < 1e-4) return -0.5 + d / 12.0;
  return 1.0 / std::expm1(d) - 1.0 / d;
}

// Minimises 0.5 |v - z|^2 - h sum_{i<j} c_ij log(v_i - v_j) over the ordered
// chamber by damped Newton from the ordered start v. The minimiser solves
// the drift-implicit equation for the singular pair repulsion.
bool solve_pair_implicit(std::vector<double>& v, const std::vector<double>& z,
                         const Eigen::MatrixXd& c, double h) {
  const auto n = static_cast<Eigen::Index>(v.size());
  auto objective = [&](const std::vector<double>& w) {
    double f = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      f += 0.5 * (w[i] - z[i]) * (w[i] - z[i]);
      for (Eigen::Index j = i + 1; j < n; ++j)
        if (c(i, j) > 0.0) {
          if (!(w[i] > w[j])) return std::numeric_limits<double>::infinity();
          f -= h * c(i, j) * std::log(w[i] - w[j]);
        }
    }
    return f;
  };
  Eigen::VectorXd grad(n);
  Eigen::MatrixXd hess(n, n);
  double f = objective(v);
  for (int iter = 0; iter < 200; ++iter) {
    hess.setIdentity();
    for (Eigen::Index i = 0; i < n; ++i) grad[i] = v[i] - z[i];
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) {
        if (!(c(i, j) > 0.0)) continue;
        const double inv = 1.0 / (v[i] - v[j]);
        const double g = h * c(i, j) * inv;
        const double k = g * inv;
        grad[i] -= g;
        grad[j] += g;
        hess(i, i) += k;
        hess(j, j) += k;
        hess(i, j) -= k;
        hess(j, i) -= k;
      }
    const Eigen::VectorXd step = hess.ldlt().solve(-grad);
    const double decrement = -grad.dot(step);
    if (!std::isfinite(decrement)) return false;
    if (decrement < 1e-28) return true;
    double alpha = 1.0;
    std::vector<double> trial(v.size());
    for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
      for (Eigen::Index i = 0; i < n; ++i) trial[i] = v[i] + alpha * step[i];
      const double ft = objective(trial);
      if (ft <= f - 0.25 * alpha * decrement) break;
    }
    const double ft = objective(trial);
    if (!(ft < f)) {
      // the decrease is below rounding of f: finish with a plain Newton step
      if (decrement > 1e-12 * (1.0 + std::abs(f))) return false;
      for (Eigen::Index i = 0; i < n; ++i) trial[i] = v[i] + step[i];
      if (std::isfinite(objective(trial))) v = trial;
      return true;
    }
    v = trial;
    f = ft;
  }
  return false;
}

}  // namespace

std::optional<ChamberPoint> step_pair_implicit(const ChamberPoint& x, const ModelParams& params,
                                               double dt, std::span<const double> dW,
                                               double collision_guard) {
  if (dW.size() != x.size()) throw std::invalid_argument("step: one increment per coordinate");
  if (dt == 0.0) return x;
  const std::size_t n = x.size();
  const bool positive = model_is_positive(params.model);
  require_drift_evaluable(x.values, positive);
  const bool log_coords = positive;
  std::vector<double> u(n), z(n);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) u[i] = log_coords ? std::log(x[i]) : x[i];

  switch (params.model) {
    case Model::GL:
    case Model::RV: {
      const double base = params.model == Model::GL ? 0.5 * params.theta - 0.5 : -0.5 * params.nu - 0.5;
      for (std::size_t i = 0; i < n; ++i) {
        double f = base;
        for (std::size_t j = 0; j < n; ++j)
          if (j != i) f += log_interaction_remainder(u[i] - u[j]);
        z[i] = u[i] + f * dt + dW[i];
      }
      c.setOnes();
      break;
    }
    case Model::HP: {
      const auto sig = hp_diffusion_vector(x.values);
      for (std::size_t i = 0; i < n; ++i) z[i] = u[i] + 2.0 * (-params.s_re * u[i] + params.s_im) * dt + sig[i] * dW[i];
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
          const double num = 2.0 * (u[i] * u[j] + 1.0);
          if (num > 0.0) {
            c(i, j) = num;
          } else {
            const double v = num / (u[i] - u[j]) * dt;
            z[i] += v;
            z[j] -= v;
          }
        }
      break;
    }
    case Model::Dyson: {
      for (std::size_t i = 0; i < n; ++i) z[i] = u[i] - params.c * u[i] * dt + dW[i];
      c.setOnes();
      break;
    }
  }
  std::vector<double> v = u;
  if (!solve_pair_implicit(v, z, c, dt)) return std::nullopt;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = log_coords ? std::exp(v[i]) : v[i];
    if (params.model == Model::RV) out[i] += 0.5 * dt;
  }
  if (!acceptable(out, positive, collision_guard)) return std::nullopt;
  return ChamberPoint{std::move(out), positive};
}

std::optional<ChamberPoint> step_euler(const ChamberPoint& x, const ModelParams& params, double dt,
                                       std::span<const double> gaussians, double collision_guard) {
  std::vector<double> dW(gaussians.begin(), gaussians.end());
  const double sq = std::sqrt(dt);
  for (auto& g : dW) g *= sq;
  return step_increments(x, params, dt, dW, collision_guard);
}

namespace {

struct Stepper {
  const ModelParams& params;
  const IntegratorConfig& cfg;
  CounterRng& rng;
  std::size_t path_id;
  double t_now;

  // Advances by h with fixed Brownian increment dW; a rejected step is
  // split in two halves whose increments are drawn from the bridge.
  ChamberPoint advance(const ChamberPoint& x, const StepDrift& drift, double h,
                       const std::vector<double>& dW, int depth) {
    if (auto next = step_prepared(x, params, drift, h, dW, cfg.collision_guard))
      return std::move(*next);
    if (depth >= cfg.max_substeps || 0.5 * h < cfg.dt_min) {
      // last resort: the drift-implicit step keeps the order at any h
      if (auto next = step_pair_implicit(x, params, h, dW, cfg.collision_guard)) return std::move(*next);
      std::ostringstream os;
      os.precision(17);
      for (double v : x.values) os << v << ' ';
      throw StiffFailure(path_id, t_now, os.str());
    }
    const double sd = std::sqrt(0.25 * h);
    std::vector<double> first(dW.size()), second(dW.size());
    for (std::size_t i = 0; i < dW.size(); ++i) {
      first[i] = 0.5 * dW[i] + sd * rng.normal();
      second[i] = dW[i] - first[i];
    }
    ChamberPoint mid = advance(x, drift, 0.5 * h, first, depth + 1);
    return advance(mid, prepare_step(mid, params), 0.5 * h, second, depth + 1);
  }
};

}  // namespace

ChamberPoint evolve(const ChamberPoint& x0, const ModelParams& params, const IntegratorConfig& cfg,
                    double t0, double t1, CounterRng& rng, std::size_t path_id) {
  if (t1 < t0) throw std::invalid_argument("evolve: t1 < t0");
  ChamberPoint x = x0;
  x.positive = model_is_positive(params.model);
  Stepper stepper{params, cfg, rng, path_id, t0};
  std::vector<double> dW(x.size());
  double t = t0;
  while (t < t1) {
    double h = std::min(cfg.dt_max, t1 - t);
    // avoid a sliver final step
    if (t1 - t - h < 1e-3 * cfg.dt_max) h = t1 - t;
    const double sd = std::sqrt(h);
    for (auto& w : dW) w = sd * rng.normal();
    stepper.t_now = t;
    x = stepper.advance(x, prepare_step(x, params), h, dW, 0);
    t = (h == t1 - t) ? t1 : t + h;
  }
  return x;
}

PathEnsemble simulate_ensemble(const ChamberPoint& initial, const ModelParams& params,
                               const IntegratorConfig& cfg, const std::vector<double>& times,
                               std::size_t n_paths) {
  cfg.validate();
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < 0.0) throw std::invalid_argument("simulate_ensemble: negative time");
    if (k > 0 && !(times[k] > times[k - 1]))
      throw std::invalid_argument("simulate_ensemble: times must be strictly increasing");
  }
  if (initial.size() > 0 && n_paths > 0)
    require_drift_evaluable(initial.values, model_is_positive(params.model));

  PathEnsemble ens;
  ens.times = times;
  ens.n_paths = n_paths;
  ens.n_particles = initial.size();
  ens.params = params;
  ens.seed = cfg.seed;
  ens.data.assign(n_paths * times.size() * initial.size(), 0.0);

  parallel_for(n_paths, [&](std::size_t p) {
    CounterRng rng(cfg.seed, p);
    ChamberPoint x = initial;
    double t = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      x = evolve(x, params, cfg, t, times[k], rng, p);
      t = times[k];
      std::copy(x.values.begin(), x.values.end(), ens.at(p, k).begin());
    }
  });
  return ens;
}

Eigen::MatrixXcd step_matrix_gl(const Eigen::MatrixXcd& Y, double theta, double dt,
                                const Eigen::MatrixXcd& gaussian_matrix) {
  return Y + Y * gaussian_matrix + (theta * dt) * Y;
}

ChamberPoint squared_singular_values(const Eigen::MatrixXcd& Y) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Y.adjoint() * Y, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalFailure("eigensolver failed");
  const auto& ev = es.eigenvalues();
  std::vector<double> out(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) out[i] = ev[ev.size() - 1 - i];
  return {std::move(out), true};
}

double timescale::log_rescaled(double x, int N) { return std::log(x / N); }

ChamberPoint rescale_edge(const ChamberPoint& sing_sq, double t, int N) {
  ChamberPoint out = sing_sq;
  const double f = std::exp(-0.5 * N * t);
  for (auto& v : out.values) v *= f;
  return out;
}

ChamberPoint simulate_matrix_gl(const ChamberPoint& x0, double theta, double t, double dt_matrix,
                                CounterRng& rng) {
  const auto n = static_cast<Eigen::Index>(x0.size());
  Eigen::MatrixXcd Y = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) Y(i, i) = std::sqrt(x0[i]);
  const double T = timescale::matrix_time(t);
  double s = 0.0;
  Eigen::MatrixXcd dB(n, n);
  while (s < T) {
    const double h = std::min(dt_matrix, T - s);
    const double sd = std::sqrt(h);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) dB(i, j) = {sd * rng.normal(), sd * rng.normal()};
    Y = step_matrix_gl(Y, theta, h, dB);
    s = (h == T - s) ? T : s + h;
  }
  return rescale_edge(squared_singular_values(Y), t, static_cast<int>(n));
}

std::vector<double> truncated_isde_drift(std::span<const double> x, double theta, double gamma) {
  require_drift_evaluable(x, true);
  double sum = 0.0;
  for (double v : x) sum += v;
  if (gamma < sum * (1.0 - 1e-14)) throw InvalidBoundaryData("gamma below sum of coordinates");
  const double extra = std::max(0.0, gamma - sum);
  auto out = log_interaction(x);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * (0.5 * theta + out[i]) + extra;
  return out;
}

std::optional<std::pair<ChamberPoint, double>> truncated_isde_step(
    const ChamberPoint& x, double theta, double gamma, double dt, std::span<const double> gaussians) {
  if (gaussians.size() != x.size()) throw std::invalid_argument("step: one gaussian per coordinate");
  const auto b = truncated_isde_drift(x.values, theta, gamma);
  if (dt == 0.0) return std::make_pair(x, gamma);
  const double sq = std::sqrt(dt);
  std::vector<double> out(x.size());
  double noise = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dw = sq * gaussians[i];
    out[i] = x[i] + b[i] * dt + x[i] * dw;
    noise += x[i] * dw;
  }
  // gamma follows d gamma = (theta/2) gamma dt + sum x_i dw_i
  const double gamma_next = gamma + 0.5 * theta * gamma * dt + noise;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!(out[i] > 0.0) || (i + 1 < out.size() && !(out[i] > out[i + 1]))) return std::nullopt;
  return std::make_pair(ChamberPoint{std::move(out), true}, gamma_next);
}

std::vector<double> hp_isde_drift_residual(std::span<const double> y, std::complex<double> s,
                                           double gamma_hp, double delta) {
  for (double v : y)
    if (v == 0.0) throw std::domain_error("hp_isde_drift_residual: zero coordinate");
  require_drift_evaluable(y, false);
  double sq = 0.0;
  for (double v : y) sq += v * v;
  const std::size_t n = y.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double inter = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) inter += y[j] * y[j] / (y[i] - y[j]);
    out[i] = -2.0 * (s.real() + 1.0) * y[i] + 2.0 * inter + 2.0 * (gamma_hp + (delta - sq) / y[i]);
  }
  return out;
}

}  // namespace lpflow
