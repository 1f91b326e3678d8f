#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace curvlab {

// A CD-function: continuous F: [0,inf) -> [0,inf) with F(0) = 0, F(x)/x
// strictly increasing and 1/F integrable at infinity. Replaces the quadratic
// dimension term of the classical curvature-dimension inequality.
class CdFunction {
 public:
  enum class Family { Power, TwoRegime, Tabulated };

  /// Defaults to the quadratic F(x) = x^2.
  CdFunction() = default;

  /// F(x) = nu * x^gamma; a CD-function iff nu > 0 and gamma > 1.
  static CdFunction power(double nu, double gamma);

  /// F(x) = c x^gamma for x <= x0, F(x0) e^{a (x - x0)} beyond (continuous).
  static CdFunction two_regime(double c, double gamma, double x0, double a);

  /// Log-log interpolated table with power extension c_low x^gamma_low below
  /// the first node and exponential extension e^{a_high (x - x_max)} above
  /// the last, both anchored for continuity.
  static CdFunction tabulated(std::vector<double> x, std::vector<double> f,
                              double gamma_low, double a_high);

  double operator()(double x) const;

  /// log F(x) for x > 0; safe where F overflows double range.
  double log_value(double x) const;

  Family family() const { return family_; }
  /// Small-x exponent: gamma for the analytic families, fitted gamma_low for
  /// tabulated envelopes.
  double small_x_exponent() const;
  double small_x_coefficient() const;

  /// Checks the defining properties: F(0)=0, F(x)/x strictly increasing on a
  /// log grid spanning [1e-8, 1e8] (200 points), 1/F integrable at infinity
  /// (analytic per family). Throws std::invalid_argument on failure.
  void validate() const;

  nlohmann::json to_json() const;
  static CdFunction from_json(const nlohmann::json& j);

 private:
  Family family_ = Family::Power;
  // Power / TwoRegime parameters
  double nu_ = 1, gamma_ = 2, x0_ = 0, a_ = 0;
  // Tabulated data (log-log nodes) plus extension parameters
  std::vector<double> tx_, tf_;
  double gamma_low_ = 0, a_high_ = 0;
};

struct EnvelopeOptions {
  int bins_per_decade = 32;
  /// Deflation applied to binned minima; empirical minima can only
  /// overestimate the true infimum, so the envelope is shrunk by this factor.
  double safety = 0.9;
  int min_positive_samples = 10;
};

/// Lower envelope of scatter pairs (w, z) with w > 0: log-binned per-bin
/// minima, conservative isotonic adjustment of z/w (suffix minimum), power
/// fit on the lowest populated decade and exponential fit on the highest.
CdFunction fit_envelope(std::span<const std::pair<double, double>> wz, const EnvelopeOptions& opts = {});

}  // namespace curvlab
