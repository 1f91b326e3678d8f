#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "curvlab/chain.hpp"

namespace curvlab {

// Trace of P_t f along a time grid with entropy and Fisher information.
struct SemigroupTrace {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> densities;
  std::vector<double> entropy;
  std::vector<double> fisher;
};

/// e^{tQ} v by uniformization (Poisson-weighted jump-chain powers). Keeps
/// nonnegativity and mass exactly; series truncated at relative 1e-15.
Eigen::VectorXd propagate(const Chain& c, const Eigen::VectorXd& v, double t);

/// Evolves a density with respect to mu along the given increasing time grid.
/// Non-reversible chains are rejected: pass the reversible form explicitly.
SemigroupTrace evolve(const Chain& c, const ProbabilityDensity& f0, const std::vector<double>& times);

/// H(f) = sum_x f log f pi with the 0 log 0 = 0 convention.
double relative_entropy(const Chain& c, const Eigen::VectorXd& f);

/// I(f) = (1/2) sum_{x,y} k(x,y)(f(y)-f(x))(log f(y)-log f(x)) pi(x);
/// +inf sentinel when an edge pair has f(x) = 0 < f(y).
double fisher_information(const Chain& c, const Eigen::VectorXd& f);

struct EntropyIdentityReport {
  double max_residual_first = 0;   // d/dt H  vs  -I, relative
  double max_residual_second = 0;  // d2/dt2 H vs 2 int f Psi2(log f) dmu, relative
  int stencil_order = 4;
};

/// Verifies both entropy-derivative identities by central finite differences
/// on the trace grid (interior points only). `stencil_order` in {2, 4, 6}.
EntropyIdentityReport check_entropy_identities(const Chain& c, const SemigroupTrace& trace,
                                               int stencil_order = 4);

struct DecayReport {
  double worst_entropy_slack = 0;   // min over t of e^{-2 kappa t} H(f0) - H(P_t f0)
  double worst_gradient_slack = 0;  // min over (t,x) of e^{-2 kappa t} P_t Psi(f0) - Psi(P_t f0)
};

/// Checks the entropy decay bound and the pointwise gradient bound
/// characterizing CD_Upsilon(kappa, infinity).
DecayReport check_decay_and_gradient_bound(const Chain& c, double kappa,
                                           const Eigen::VectorXd& f0,
                                           const std::vector<double>& times);

/// Upper bound on the modified log-Sobolev constant: inf over sampled
/// positive densities of I(f) / (2 H(f)), with simplex refinement.
double estimate_mlsi(const Chain& c, int samples, std::uint64_t seed);

nlohmann::json trace_report_json(const SemigroupTrace& trace);
std::string trace_to_csv(const SemigroupTrace& trace);

}  // namespace curvlab
