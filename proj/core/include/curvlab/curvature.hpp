#pragma once

#include <cstdint>
#include <limits>

#include <nlohmann/json_fwd.hpp>

#include "curvlab/cd_function.hpp"
#include "curvlab/chain.hpp"

namespace curvlab {

struct SearchBudget {
  int samples = 20000;
  int descents = 30;
  int descent_iters = 300;
};

struct CurvatureReport {
  enum class Mode { Classical, Upsilon };
  Mode mode = Mode::Classical;
  double global_kappa = 0;
  Eigen::VectorXd per_state_kappa;  // +/-inf sentinels possible
  StateFunction witness;
  int witness_state = 0;
  double dimension = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
  SearchBudget budget;

  nlohmann::json to_json() const;
};

// Largest kappa with Gamma_2(f)(x) - (1/d)(Lf)(x)^2 >= kappa Gamma(f)(x) for
// all f, per state. Both sides are quadratic forms; the answer is the
// smallest generalized eigenvalue of the pair with the Gamma-form kernel
// deflated. Isolated states get +inf; a state whose Gamma_2-form is negative
// on the Gamma-kernel gets -inf.
CurvatureReport classical_optimal_kappa(const Chain& c, double d);

// Upper bound on the optimal kappa of CD_Upsilon(kappa, infinity): infimum
// over sampled nonconstant f and states of Psi_{2,Upsilon}(f)/Psi_Upsilon(f),
// refined by simplex descent and a small-amplitude pass (the infimum is often
// attained in the Gamma-limit). Deterministic given the seed. Two-state
// chains take an exhaustive one-parameter scan.
CurvatureReport estimate_upsilon_kappa(const Chain& c, const SearchBudget& budget,
                                       std::uint64_t seed);

struct CdVerification {
  bool violation_found = false;
  double min_slack = 0;         // most negative (or least positive) slack seen
  double kappa = 0;
  StateFunction witness;        // populated when a violation was found
  int witness_state = -1;
  double psi2_at_witness = 0, psi_at_witness = 0, f0_term_at_witness = 0, neg_lf_at_witness = 0;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
};

// Searches for (f, x) violating Psi_{2,Upsilon}(f) >= kappa Psi_Upsilon(f) +
// F0(-Lf) within the budget. F may be null (no dimension term).
CdVerification verify_cd_upsilon(const Chain& c, double kappa, const CdFunction* F,
                                 const SearchBudget& budget, std::uint64_t seed);

/// Lower envelope of (w, z) = (-Lf(x), Psi_{2,Upsilon}(f)(x)) over sampled f,
/// projected onto the CD-function constraints.
CdFunction fit_cd_function(const Chain& c, int samples, std::uint64_t seed,
                           const EnvelopeOptions& opts = {});

}  // namespace curvlab
