#pragma once

#include <memory>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "curvlab/cd_function.hpp"

namespace curvlab {

struct AsymptoticTag {
  enum class Kind { LogType, PowerType };
  Kind kind = Kind::PowerType;
  // LogType:   phi(t) ~ c * log(1/t) + b
  // PowerType: phi(t) ~ c * t^{-p}
  double c = 0, b = 0, p = 0;
  double relative_rms = 0;  // fit quality on the fitted decade
};

namespace detail {
class RelaxationTable;
}

// Numerical solution of phi' + F(phi) = 0 on [t_min, t_max] realizing the
// maximal solution with phi(0+) = infinity. phi is strictly decreasing and
// log-convex.
struct RelaxationProfile {
  std::vector<double> t;    // log-spaced grid
  std::vector<double> phi;  // solution values
  CdFunction F;
  AsymptoticTag small_t, large_t;
  double tol = 0;
  double M_final = 0;  // final start value of the blow-up surrogate
  int doublings = 0;

  /// Evaluates phi at any t in [t_min, t_max] from the underlying quadrature
  /// table (not grid interpolation).
  double eval(double t) const;

  nlohmann::json metadata_json() const;

  std::shared_ptr<const detail::RelaxationTable> table;  // evaluation engine
};

/// Constructs phi by inverting t = integral_phi^M ds/F(s), doubling M until
/// phi(t_min) is stable to relative `tol`. Throws if F is invalid or the
/// doubling budget is exhausted before reaching `tol`.
RelaxationProfile solve_relaxation(const CdFunction& F, double t_min, double t_max,
                                   double tol, int grid_points = 400);

/// integral_{t1}^{t2} phi dt. For t1 below the solved range the fitted
/// small-t tag is integrated analytically; a power tag with exponent >= 1
/// and t1 = 0 yields +infinity.
double integrate_relaxation(const RelaxationProfile& p, double t1, double t2);

}  // namespace curvlab
