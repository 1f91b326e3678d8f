#pragma once

#include <vector>

#include "curvlab/grid_function.hpp"

namespace curvlab {

enum class NonlocalKind {
  FracLaplacian,  // (-Delta)^{beta/2} v(x), Fourier-symbol normalization
  PsiUpsilon,     // c int Upsilon(v(y)-v(x)) |y-x|^{-1-beta} dy
  SquaredDiff,    // c int (v(y)-v(x))^2 |y-x|^{-1-beta} dy  (continuum Gamma)
};

struct NonlocalEvaluation {
  double value = 0;
  double error_estimate = 0;
};

// Principal-value quadrature in three zones: |y-x| < 4h symmetrized with a
// local degree-8 interpolant (exact moment integration for the linear kind,
// Gauss-Legendre in u = s^{2-beta} otherwise), grid cells beyond with exact
// kernel moments against linear interpolation of the numerator, and the
// declared tail model beyond the grid. Error estimates come from a stride-2
// re-evaluation (the middle zone is the order-2 bottleneck).
class NonlocalEvaluator {
 public:
  NonlocalEvaluator(GridFunction v, double beta);

  double eval(int xi, NonlocalKind kind) const { return eval_stride(xi, kind, 1); }
  /// evaluation on the stride-coarsened subgrid through xi
  double eval_at_stride(int xi, NonlocalKind kind, int stride) const {
    return eval_stride(xi, kind, stride);
  }
  NonlocalEvaluation eval_with_error(int xi, NonlocalKind kind) const;

  /// smallest margin (in cells) required around xi for eval_with_error
  static constexpr int kMargin = 8;
  const GridFunction& grid() const { return v_; }

 private:
  double eval_stride(int xi, NonlocalKind kind, int stride) const;
  double inner_zone(int xi, NonlocalKind kind, int stride) const;
  double middle_zone(int xi, NonlocalKind kind, int stride) const;
  double outer_zone(int xi, NonlocalKind kind, int stride) const;
  double tail_integral(double vx, double xc, int sign, double R, NonlocalKind kind) const;
  const std::vector<double>& moments0(int stride) const;
  const std::vector<double>& moments1(int stride) const;

  GridFunction v_;
  double beta_;
  double c_;
  mutable std::vector<double> mu0_[3], mu1_[3];  // per-stride caches (1, 2)
};

NonlocalEvaluation nonlocal_eval(const GridFunction& v, double beta, int xi, NonlocalKind kind);

}  // namespace curvlab
