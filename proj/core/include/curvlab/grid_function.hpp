#pragma once

#include <Eigen/Core>

namespace curvlab {

// Behaviour of a grid function beyond its grid, used by the outer zone of
// nonlocal quadratures.
struct TailModel {
  enum class Kind { Zero, Constant, LogPower, Power, Trig };
  Kind kind = Kind::Zero;
  // Constant: v = a
  // LogPower: v(y) = a * log|y| + b
  // Power:    v(y) = a * |y|^(-b)
  // Trig:     v(y) = a * cos(b*y + c)
  double a = 0, b = 0, c = 0;

  double eval(double y) const;

  static TailModel zero() { return {}; }
  static TailModel constant(double a);
  static TailModel log_power(double slope, double intercept);
  static TailModel power(double amplitude, double exponent);
  static TailModel trig(double amplitude, double freq, double phase);
};

// Real function sampled on a uniform grid with a declared tail model.
struct GridFunction {
  double x0 = 0;  // coordinate of node 0
  double h = 1;
  Eigen::VectorXd v;
  TailModel tail;

  int n() const { return static_cast<int>(v.size()); }
  double x(int i) const { return x0 + h * i; }
  double x_last() const { return x0 + h * (n() - 1); }
};

}  // namespace curvlab
