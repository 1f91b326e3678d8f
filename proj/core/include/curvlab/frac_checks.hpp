#pragma once

#include <map>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "curvlab/frac_kernel.hpp"
#include "curvlab/grid_function.hpp"

namespace curvlab {

struct ClyReport {
  double C_LY_hat = 0;           // max over t of S(t)
  std::vector<double> t;
  std::vector<double> S;         // sup_x t (-Delta)^{beta/2} log G(t, .)
  std::vector<double> S_error;   // propagated quadrature error estimate
  std::vector<double> T;         // sup_x t |dG/dt| / G
  std::vector<double> better_dh; // sup_x t (|d log G/dt| + Psi_Upsilon(log G))

  nlohmann::json to_json() const;
};

/// Li-Yau functional of the fractional heat kernel across times. Throws when
/// the quadrature error estimate exceeds 1% of S(t).
ClyReport estimate_cly(double beta, std::span<const double> t_list, double X, double h);

struct FracHarnackPair {
  double t1 = 0, x1 = 0, t2 = 0, x2 = 0;
};

struct FracHarnackReport {
  double C_fit = 0;  // smallest C making the Harnack bound hold on every pair
  std::vector<double> per_pair_C;
  std::vector<double> residual_at_fit;  // slack at C = C_fit per pair

  nlohmann::json to_json() const;
};

/// Positive solution values indexed by time; each entry shares the kernel's
/// grid geometry.
using SolutionFamily = std::map<double, FracKernelGrid>;

/// Kernel-as-solution source for the given times.
SolutionFamily kernel_solution(double beta, std::span<const double> times, double X, double h);

/// Smallest C per pair in
/// u(t1,x1) <= u(t2,x2) (t2/t1)^{C_LY} exp(C [1 + |x1-x2|^{beta+1}/(t2-t1)^{1+1/beta}]).
FracHarnackReport harnack_fit(double beta, double c_ly, std::span<const FracHarnackPair> pairs,
                              const SolutionFamily& u);

struct ReductionReport {
  double min_slack = 0;      // over all (x, weight set); >= 0 means the bound holds
  double min_slack_classical = 0;
  int evaluations = 0;

  nlohmann::json to_json() const;
};

// Discretized key inequality: the z-sum of Psi and the y-sum of P share one
// node set, which preserves the Jensen structure of the proof termwise, so
// the discrete slack is nonnegative up to roundoff. The classical variant
// uses one central-difference operator on both sides (Cauchy-Schwarz).
ReductionReport reduction_inequality_check(double beta, const FracKernelGrid& H,
                                           const Eigen::MatrixXd& weight_sets,
                                           std::span<const int> x_indices);

struct CounterexamplePoint {
  double x = 0;
  double gamma = 0, gamma2 = 0, lu = 0;
  double gamma_err = 0, gamma2_err = 0, lu_err = 0;
  // strict two-sided inequality 0 < Gamma_2 < kappa Gamma + (1/N)(Lu)^2
  enum class Verdict { Holds, Fails, Inconclusive } verdict = Verdict::Inconclusive;
};

struct CounterexampleReport {
  std::vector<CounterexamplePoint> points;
  bool certificate = false;  // strict inequality verified at every sampled x

  nlohmann::json to_json() const;
};

/// Verifies the two-sided CD-failure certificate for a compactly supported u
/// at sample points in B(0, R); quadrature error bars drive the per-point
/// verdicts. Throws when the Gamma_2 double-quadrature error exceeds 10%.
CounterexampleReport verify_cd_counterexample(double beta, const GridFunction& u, double kappa,
                                              double N, double R, int x_samples);

/// Diagnostic companion: simplex search over sums of scaled bump translates
/// maximizing the certificate margin; returns the best report found.
CounterexampleReport counterexample_search(double beta, double kappa, double N, double R,
                                           int iterations, std::uint64_t seed);

}  // namespace curvlab
