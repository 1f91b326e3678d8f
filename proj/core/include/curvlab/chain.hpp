#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

namespace curvlab {

/// Real-valued function on the states of a chain.
using StateFunction = Eigen::VectorXd;

/// Rates below this are treated as exact zeros when building adjacency.
inline constexpr double kRateZeroThreshold = 1e-15;

/// Relative tolerance of the detailed-balance test that sets the
/// reversibility flag.
inline constexpr double kDetailedBalanceTol = 1e-12;

struct Edge {
  int to;
  double rate;
};

/// Measure choice when building a chain.
struct PiSpec {
  enum class Kind { Uniform, Stationary, Explicit };
  Kind kind = Kind::Uniform;
  Eigen::VectorXd values;  // used by Explicit only

  static PiSpec uniform() { return {Kind::Uniform, {}}; }
  static PiSpec stationary() { return {Kind::Stationary, {}}; }
  static PiSpec explicit_measure(Eigen::VectorXd v) { return {Kind::Explicit, std::move(v)}; }
};

// Finite-state Markov generator with a strictly positive reference measure.
// The diagonal is always derived (k(x,x) = -sum_{y!=x} k(x,y)), never stored.
// Immutable after construction.
class Chain {
 public:
  int n() const { return n_; }
  const Eigen::VectorXd& pi() const { return pi_; }
  bool reversible() const { return reversible_; }
  const std::vector<Edge>& neighbors(int x) const { return adj_[x]; }

  /// Off-diagonal rate k(x,y); 0 if no edge.
  double rate(int x, int y) const;

  /// Derived diagonal entry k(x,x) = -sum of outgoing rates.
  double diagonal(int x) const { return -out_rate_[x]; }
  double out_rate(int x) const { return out_rate_[x]; }

  /// Full generator as a dense matrix (rows sum to zero).
  Eigen::MatrixXd dense_generator() const;

  nlohmann::json to_json() const;
  static Chain from_json(const nlohmann::json& j);

  friend Chain build_chain(const Eigen::MatrixXd& rates, const PiSpec& pi);

 private:
  Chain() = default;
  void finalize();  // derives out_rate_, tests detailed balance

  int n_ = 0;
  std::vector<std::vector<Edge>> adj_;
  Eigen::VectorXd pi_;
  std::vector<double> out_rate_;
  bool reversible_ = false;
};

/// Builds a chain from an off-diagonal rate matrix (diagonal entries of
/// `rates` are ignored). Throws std::invalid_argument on negative rates,
/// non-positive pi entries, or a stationary request whose null space is not
/// one-dimensional.
Chain build_chain(const Eigen::MatrixXd& rates, const PiSpec& pi);

/// Unweighted complete graph on n >= 2 vertices, unit edge rates, uniform pi.
Chain complete_graph(int n);

/// n-dimensional hypercube (2^n states, bit-coded), unit edge rates; n >= 1.
Chain hypercube_graph(int n);

/// Star with m >= 2 leaves; the center is state 0.
Chain star_graph(int m);

/// Product chain with generator L1 (+) L2; product states ordered
/// lexicographically (first factor major), pi the product measure.
Chain tensor_product(const Chain& a, const Chain& b);

/// Density with respect to mu = pi d#: values >= 0 with sum f(x) pi(x) = 1.
struct ProbabilityDensity {
  Eigen::VectorXd values;
};

/// Validates and wraps a density (tolerance 1e-12 on the mass).
ProbabilityDensity make_density(const Chain& c, const Eigen::VectorXd& values);

/// Rescales a nonnegative, not identically zero vector to unit mass.
ProbabilityDensity normalize_density(const Chain& c, const Eigen::VectorXd& values);

}  // namespace curvlab
