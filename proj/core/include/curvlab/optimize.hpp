#pragma once

#include <functional>

#include <Eigen/Core>

namespace curvlab {

struct NelderMeadOptions {
  int max_iters = 400;
  double ftol = 1e-12;
  double initial_step = 0.5;
};

/// Derivative-free simplex descent; returns the best vertex found.
Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x0, const NelderMeadOptions& opts = {});

}  // namespace curvlab
