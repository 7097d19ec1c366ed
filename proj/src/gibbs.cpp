#include "lpflow/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lpflow/errors.hpp"
#include "lpflow/parallel.hpp"

namespace lpflow {

void BridgeSpec::validate() const {
  if (!(a < b)) throw std::invalid_argument("BridgeSpec: need a < b");
  if (grid.size() < 2 || grid.front() != a || grid.back() != b)
    throw std::invalid_argument("BridgeSpec: grid must start at a and end at b");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("BridgeSpec: grid not increasing");
}

namespace {

void fill_bridge(const std::vector<double>& grid, double x, double y, double sigma,
                 CounterRng& rng, std::vector<double>& out) {
  const std::size_t n = grid.size();
  out.resize(n);
  out[0] = x;
  const double b = grid.back();
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double dt = grid[k] - grid[k - 1];
    const double rest = b - grid[k - 1];
    const double mean = out[k - 1] + dt / rest * (y - out[k - 1]);
    const double var = sigma * sigma * dt * (b - grid[k]) / rest;
    out[k] = mean + std::sqrt(var) * rng.normal();
  }
  out[n - 1] = y;
}

std::vector<double> refine_grid(const std::vector<double>& grid, int refine) {
  if (refine <= 1) return grid;
  std::vector<double> out;
  out.reserve((grid.size() - 1) * refine + 1);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    for (int r = 0; r < refine; ++r)
      out.push_back(grid[i] + (grid[i + 1] - grid[i]) * r / refine);
  out.push_back(grid.back());
  return out;
}

std::vector<double> refine_values(const std::vector<double>& v, int refine) {
  if (refine <= 1) return v;
  std::vector<double> out;
  out.reserve((v.size() - 1) * refine + 1);
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    for (int r = 0; r < refine; ++r) {
      if (!std::isfinite(v[i]) || !std::isfinite(v[i + 1]))
        out.push_back(std::isfinite(v[i]) ? v[i + 1] : v[i]);
      else
        out.push_back(v[i] + (v[i + 1] - v[i]) * r / refine);
    }
  out.push_back(v.back());
  return out;
}

}  // namespace

std::vector<double> sample_brownian_bridge(const BridgeSpec& spec, CounterRng& rng, double sigma) {
  spec.validate();
  std::vector<double> out;
  fill_bridge(spec.grid, spec.x, spec.y, sigma, rng, out);
  return out;
}

std::vector<double> sample_exp_bridge(const BridgeSpec& spec, CounterRng& rng) {
  if (!(spec.x > 0.0) || !(spec.y > 0.0))
    throw std::invalid_argument("sample_exp_bridge: endpoints must be positive");
  BridgeSpec log_spec = spec;
  log_spec.x = std::log(spec.x);
  log_spec.y = std::log(spec.y);
  auto path = sample_brownian_bridge(log_spec, rng);
  for (auto& v : path) v = std::exp(v);
  path.front() = spec.x;
  path.back() = spec.y;
  return path;
}

void BoundaryData::validate() const {
  const std::size_t k = x_vec.size();
  if (k == 0 || y_vec.size() != k) throw InvalidBoundaryData("boundary: x_vec/y_vec size");
  if (grid.size() < 2 || upper.size() != grid.size() || lower.size() != grid.size())
    throw InvalidBoundaryData("boundary: tabulation size");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw InvalidBoundaryData("boundary: grid not increasing");
  for (std::size_t i = 0; i + 1 < k; ++i)
    if (!(x_vec[i] > x_vec[i + 1]) || !(y_vec[i] > y_vec[i + 1]))
      throw InvalidBoundaryData("boundary: endpoints not strictly decreasing");
  if (!(upper.front() > x_vec.front()) || !(upper.back() > y_vec.front()) ||
      !(lower.front() < x_vec.back()) || !(lower.back() < y_vec.back()))
    throw InvalidBoundaryData("boundary: endpoints outside the boundary curves");
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (!(upper[i] > lower[i])) throw InvalidBoundaryData("boundary: upper <= lower");
}

AvoidingBridges sample_avoiding_bridges(const BoundaryData& bd, CounterRng& rng, long max_attempts,
                                        int refine) {
  bd.validate();
  const std::size_t k = bd.x_vec.size();
  const auto grid = refine_grid(bd.grid, std::max(1, refine));
  const auto up = refine_values(bd.upper, std::max(1, refine));
  const auto lo = refine_values(bd.lower, std::max(1, refine));
  const std::size_t n = grid.size();
  const std::size_t step = static_cast<std::size_t>(std::max(1, refine));

  std::vector<std::vector<double>> paths(k);
  for (long attempt = 1; attempt <= max_attempts; ++attempt) {
    bool ok = true;
    for (std::size_t i = 0; i < k && ok; ++i) {
      fill_bridge(grid, bd.x_vec[i], bd.y_vec[i], 1.0, rng, paths[i]);
      for (std::size_t s = 1; s + 1 < n; ++s) {
        const double above = (i == 0) ? up[s] : paths[i - 1][s];
        if (!(paths[i][s] < above) || (i + 1 == k && !(paths[i][s] > lo[s]))) {
          ok = false;
          break;
        }
      }
    }
    if (!ok) continue;
    AvoidingBridges res;
    res.attempts = attempt;
    res.acceptance_rate = 1.0 / static_cast<double>(attempt);
    res.paths.resize(k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t s = 0; s < n; s += step) res.paths[i].push_back(paths[i][s]);
    return res;
  }
  throw AcceptanceStarvation(max_attempts, 0.0);
}

PathEnsemble to_log_coordinates(const PathEnsemble& ens) {
  PathEnsemble out = ens;
  for (auto& v : out.data) {
    if (!(v > 0.0)) throw std::domain_error("to_log_coordinates: nonpositive value");
    v = std::log(v);
  }
  return out;
}

PathEnsemble gibbs_resample(const PathEnsemble& ensemble, std::size_t index_lo, std::size_t k,
                            double a, double b, std::uint64_t seed, long max_attempts, int refine) {
  const auto& times = ensemble.times;
  const auto ia = std::find(times.begin(), times.end(), a);
  const auto ib = std::find(times.begin(), times.end(), b);
  if (ia == times.end() || ib == times.end() || !(a < b))
    throw std::invalid_argument("gibbs_resample: a and b must be grid times with a < b");
  if (k == 0 || index_lo + k > ensemble.n_particles)
    throw std::invalid_argument("gibbs_resample: line indices out of range");
  const auto ka = static_cast<std::size_t>(ia - times.begin());
  const auto kb = static_cast<std::size_t>(ib - times.begin());
  const std::vector<double> grid(ia, ib + 1);
  constexpr double inf = std::numeric_limits<double>::infinity();

  PathEnsemble out = ensemble;
  parallel_for(ensemble.n_paths, [&](std::size_t p) {
    CounterRng rng(seed, p);
    BoundaryData bd;
    bd.grid = grid;
    for (std::size_t i = 0; i < k; ++i) {
      bd.x_vec.push_back(ensemble.at(p, ka)[index_lo + i]);
      bd.y_vec.push_back(ensemble.at(p, kb)[index_lo + i]);
    }
    for (std::size_t s = ka; s <= kb; ++s) {
      const auto row = ensemble.at(p, s);
      bd.upper.push_back(index_lo == 0 ? inf : row[index_lo - 1]);
      bd.lower.push_back(index_lo + k == ensemble.n_particles ? -inf : row[index_lo + k]);
    }
    const auto res = sample_avoiding_bridges(bd, rng, max_attempts, refine);
    for (std::size_t s = ka + 1; s < kb; ++s)
      for (std::size_t i = 0; i < k; ++i) out.at(p, s)[index_lo + i] = res.paths[i][s - ka];
  });
  return out;
}

}  // namespace lpflow
