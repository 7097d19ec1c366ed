#pragma once

#include <complex>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lpflow/rng.hpp"

namespace lpflow {

double bessel_j(double alpha, double x);

// Hard-edge Bessel kernel in its standard variables u, v > 0.
double bessel_hard_edge_kernel(double nu, double u, double v);

// Hua-Pickrell kernel on R \ {0}, s > -1/2.
double hp_kernel(double s, double x, double y);

// Inverse-Bessel kernel on (0, inf), nu > -1: the hard-edge kernel pulled
// back along u = 4/x.
double inverse_bessel_kernel(double nu, double x, double y);

using Interval = std::pair<double, double>;

// How panel boundaries are spread over an interval. Log and Reciprocal need
// intervals that do not contain zero.
enum class Spacing { Uniform, Log, Reciprocal };

struct DiscretizedKernel {
  std::string kernel_id;
  std::vector<Interval> domain;
  int resolution = 0;  // nodes per interval
  std::vector<double> grid;
  std::vector<double> weights;
  // Quadrature cell of each node in the panel variable; cell lengths are the
  // Gauss weights, so a node's mass spreads uniformly over its cell.
  std::vector<Interval> cells;
  Spacing spacing = Spacing::Uniform;
  Eigen::MatrixXd matrix;       // W^{1/2} K W^{1/2}
  Eigen::VectorXd eigenvalues;  // clipped to [0,1]
  Eigen::MatrixXd eigenvectors;
  double clip_magnitude = 0.0;  // largest distance of a raw eigenvalue from [0,1]
  bool clip_warning = false;    // clip still above tolerance after refinement

  double trace() const { return matrix.trace(); }
};

constexpr double kClipTolerance = 0.05;

// Gauss-Legendre panels of 16 nodes; n_nodes per interval is rounded up to a
// multiple of 16. Resolution doubles once when clipping exceeds
// kClipTolerance.
DiscretizedKernel discretize_kernel(const std::function<double(double, double)>& kernel,
                                    const std::vector<Interval>& domain, int n_nodes,
                                    const std::string& kernel_id = "custom",
                                    Spacing spacing = Spacing::Log);

struct PointConfiguration {
  std::vector<double> points;  // sorted decreasing
  std::string kernel_id;
  std::vector<Interval> domain;
  int resolution = 0;
  double clip_magnitude = 0.0;
  bool clip_warning = false;
};

// Selected nodes are placed uniformly within their cells, so the sample has
// a continuous law rather than living on the grid.
PointConfiguration sample_dpp(const DiscretizedKernel& dk, CounterRng& rng);

std::complex<double> eval_zeta_bessel(const PointConfiguration& cfg, std::complex<double> z);

struct ZetaCutoff {
  std::complex<double> value;
  std::complex<double> increment;  // value(k) - value(k-1)
};

ZetaCutoff eval_zeta_hp(const PointConfiguration& cfg, std::complex<double> z, int cutoff_k);

}  // namespace lpflow
