#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "curvlab/cd_function.hpp"
#include "curvlab/chain.hpp"
#include "curvlab/relaxation.hpp"

namespace curvlab {

// Long-range jump kernel k(j) = c/|j|^{1+beta} truncated at |j| <= J,
// realized on the torus Z_M (M > 4J keeps wrap-around away from the
// two-step neighborhood of any point).
struct LatticeKernel {
  double beta = 1.0;
  double c = 1.0;
  int J = 1;
  int M = 8;
  std::vector<double> k;  // k[j] for j = 1..J; k[0] unused

  double rate(int j) const { return j == 0 ? 0.0 : k[std::abs(j) <= J ? std::abs(j) : 0]; }
  double sum_rates() const;  // sum over j != 0, |j| <= J
};

struct LatticeDiagnostics {
  double sum_k = 0;            // sum_{j != 0} k(j)
  double second_moment = 0;    // sum k(j) j^2 over the truncation window
  double second_moment_last_half = 0;  // contribution of j in (J/2, J]; growth proxy
  std::vector<double> delta = {};      // echo of the probed deltas
  std::vector<double> sum_k_power = {};           // sum k(j)^{1-delta}
  std::vector<double> sum_k_power_last_half = {};
};

LatticeKernel build_lattice_kernel(double beta, double c, int J, int M);
LatticeDiagnostics kernel_diagnostics(const LatticeKernel& kern, std::span<const double> deltas);

/// Equivalent M-state circulant chain with uniform pi.
Chain to_chain(const LatticeKernel& kern);

/// Psi_{2,Upsilon}(f)(x) by the closed-form double sum
/// (1/2) sum_{j,l} k(j)k(l) e^{f(x+l)-f(x)} Upsilon(f(x+j+l)-f(x+j)-f(x+l)+f(x)),
/// indices mod M. Agrees with the circulant-chain operator.
double lattice_psi2(const LatticeKernel& kern, const Eigen::VectorXd& f, int x);

struct LatticeCdReport {
  bool holds = false;
  double min_eigenvalue = 0;
  double d = 0;
  Eigen::VectorXd witness;  // on support coordinates -2J..2J; empty when PSD
};

// CD(0,d) at the origin: smallest eigenvalue of the quadratic form
// Gamma_2(f)(0) - (1/d)(Lf)(0)^2 over f supported in [-2J, 2J]. Gamma_2 has
// the exact closed form (1/4) sum_{j,l} k(j)k(l) D_{j,l}^2 for
// translation-invariant jump operators.
LatticeCdReport check_classical_cd(const LatticeKernel& kern, double d);

struct LiYauReport {
  std::vector<double> times;
  std::vector<double> max_neg_l_log_u;
  std::vector<double> phi;
  int violations = 0;
  double worst_slack = 0;  // min over times of phi(t) - max_x(-L log u)

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

/// Evolves u0 > 0 on the torus chain and compares max_x -L log u(t,x)
/// against the relaxation function phi(t) at each grid time.
LiYauReport li_yau_check(const LatticeKernel& kern, const Eigen::VectorXd& u0,
                         const RelaxationProfile& phi, const std::vector<double>& times);

struct HarnackPair {
  double t1 = 0;
  int x1 = 0;
  double t2 = 0;
  int x2 = 0;
};

struct HarnackReport {
  std::vector<double> residuals;  // log RHS - log LHS per pair; >= 0 means the bound holds
  double min_residual = 0;
  int infinite_integrals = 0;  // pairs where the phi-integral is +inf (trivially hold, flagged)

  nlohmann::json to_json() const;
};

/// u(t1,x1) <= u(t2,x2) exp( int_{t1}^{t2} phi + 2 d(x1,x2)^{min(1+beta,2)} / (t2-t1) )
/// with d the torus distance; t1 = 0 is admissible.
HarnackReport harnack_check(const LatticeKernel& kern, const Eigen::VectorXd& u0,
                            const RelaxationProfile& phi, std::span<const HarnackPair> pairs);

/// Envelope of (w, z) = (-Lf(0), Psi_{2,Upsilon}(f)(0)) over sampled and
/// descent-refined f supported in [-2J, 2J]; per-bin constrained minimization
/// uses the analytic gradient of the closed-form double sum.
CdFunction fit_cd_function(const LatticeKernel& kern, int samples, std::uint64_t seed,
                           const EnvelopeOptions& opts = {});

}  // namespace curvlab
