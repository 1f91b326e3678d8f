#pragma once

#include <functional>

namespace curvlab {

/// Gauss-Legendre on [a, b] with a fixed node count (8, 16 or 20).
double gauss_legendre(const std::function<double(double)>& f, double a, double b, int nodes = 16);

/// Adaptive bisection built on nested Gauss-Legendre panels. `tol` is an
/// absolute tolerance on the whole interval.
double adaptive_quadrature(const std::function<double(double)>& f, double a, double b,
                           double tol, int max_depth = 48);

}  // namespace curvlab
