#pragma once

#include <string>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "curvlab/grid_function.hpp"

namespace curvlab {

/// c_{beta,1} = 2^beta Gamma((1+beta)/2) / (sqrt(pi) |Gamma(-beta/2)|),
/// the constant making (-Delta)^{beta/2} e^{i xi x} = |xi|^beta e^{i xi x}.
double frac_laplacian_norm(double beta);

/// Pointwise fractional heat kernel G(t,x) = (1/pi) int_0^inf cos(xi x)
/// e^{-t xi^beta} d xi by quadrature segmented at the cosine zeros and the
/// decay scale.
double stable_density(double beta, double t, double x);

/// Large-|x| series sum_m (-1)^{m+1} Gamma(m beta + 1) sin(pi m beta / 2)
/// t^m / (pi m! |x|^{1 + m beta}); convergent for beta < 1, asymptotic with
/// optimal truncation otherwise. error_out receives the truncation estimate.
double stable_density_series(double beta, double t, double x, double* error_out = nullptr);

// Sampled fractional heat kernel on a symmetric uniform grid.
struct FracKernelGrid {
  double beta = 1, t = 1, X = 1, h = 0.1;
  double c_norm = 0;    // c_{beta,1}
  Eigen::VectorXd x, G;
  double grid_mass = 0;   // Simpson over the grid
  double tail_mass = 0;   // series tail beyond X (both sides)
  double mass_defect = 0; // |grid_mass + tail_mass - 1|

  int n() const { return static_cast<int>(G.size()); }
  /// log G as a grid function with the log-power tail fitted on the outer
  /// quarter of the grid.
  GridFunction log_grid() const;

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

/// Computes the kernel on [-X, X] with spacing ~h (snapped so that x = 0 is a
/// node). beta in (0,2), t > 0, h < X.
FracKernelGrid frac_kernel(double beta, double t, double X, double h);

}  // namespace curvlab
