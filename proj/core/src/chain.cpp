#include "curvlab/chain.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace curvlab {

double Chain::rate(int x, int y) const {
  for (const Edge& e : adj_[x])
    if (e.to == y) return e.rate;
  return 0.0;
}

Eigen::MatrixXd Chain::dense_generator() const {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n_, n_);
  for (int x = 0; x < n_; ++x) {
    for (const Edge& e : adj_[x]) q(x, e.to) = e.rate;
    q(x, x) = -out_rate_[x];
  }
  return q;
}

void Chain::finalize() {
  out_rate_.assign(n_, 0.0);
  for (int x = 0; x < n_; ++x) {
    std::sort(adj_[x].begin(), adj_[x].end(), [](const Edge& a, const Edge& b) { return a.to < b.to; });
    for (const Edge& e : adj_[x]) out_rate_[x] += e.rate;
  }
  // detailed balance: pi(x)k(x,y) == pi(y)k(y,x) for all pairs
  double scale = 0.0;
  for (int x = 0; x < n_; ++x)
    for (const Edge& e : adj_[x]) scale = std::max(scale, pi_[x] * e.rate);
  if (scale == 0.0) scale = 1.0;
  reversible_ = true;
  for (int x = 0; x < n_ && reversible_; ++x) {
    for (const Edge& e : adj_[x]) {
      const double fwd = pi_[x] * e.rate;
      const double bwd = pi_[e.to] * rate(e.to, x);
      if (std::abs(fwd - bwd) > kDetailedBalanceTol * scale) {
        reversible_ = false;
        break;
      }
    }
  }
}

namespace {

Eigen::VectorXd stationary_measure(const Eigen::MatrixXd& rates, int n) {
  // positive left null vector of the full generator, pi Q = 0
  Eigen::MatrixXd q = rates;
  for (int x = 0; x < n; ++x) {
    q(x, x) = 0.0;
    double s = 0.0;
    for (int y = 0; y < n; ++y)
      if (y != x) s += q(x, y);
    q(x, x) = -s;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(q.transpose());
  lu.setThreshold(1e-10);
  if (lu.dimensionOfKernel() != 1)
    throw std::invalid_argument("stationary measure requested but the generator null space is not one-dimensional");
  Eigen::VectorXd v = lu.kernel().col(0);
  if (v.sum() < 0) v = -v;
  if (v.minCoeff() <= 0.0)
    throw std::invalid_argument("stationary null vector is not strictly positive");
  return v / v.sum();
}

}  // namespace

Chain build_chain(const Eigen::MatrixXd& rates, const PiSpec& pi) {
  if (rates.rows() != rates.cols() || rates.rows() < 1)
    throw std::invalid_argument("rate matrix must be square and non-empty");
  const int n = static_cast<int>(rates.rows());
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      if (x != y && rates(x, y) < 0.0) throw std::invalid_argument("negative rate");

  Chain c;
  c.n_ = n;
  c.adj_.resize(n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      if (x != y && rates(x, y) > kRateZeroThreshold) c.adj_[x].push_back({y, rates(x, y)});

  switch (pi.kind) {
    case PiSpec::Kind::Uniform:
      c.pi_ = Eigen::VectorXd::Constant(n, 1.0 / n);
      break;
    case PiSpec::Kind::Stationary:
      c.pi_ = stationary_measure(rates, n);
      break;
    case PiSpec::Kind::Explicit:
      if (pi.values.size() != n) throw std::invalid_argument("pi length mismatch");
      if (pi.values.minCoeff() <= 0.0) throw std::invalid_argument("pi must be strictly positive");
      c.pi_ = pi.values;
      break;
  }
  c.finalize();
  return c;
}

Chain complete_graph(int n) {
  if (n < 2) throw std::invalid_argument("complete graph needs n >= 2");
  Eigen::MatrixXd r = Eigen::MatrixXd::Ones(n, n);
  r.diagonal().setZero();
  return build_chain(r, PiSpec::uniform());
}

Chain hypercube_graph(int n) {
  if (n < 1) throw std::invalid_argument("hypercube needs n >= 1");
  if (n > 20) throw std::invalid_argument("hypercube dimension too large");
  const int m = 1 << n;
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(m, m);
  for (int v = 0; v < m; ++v)
    for (int b = 0; b < n; ++b) r(v, v ^ (1 << b)) = 1.0;
  return build_chain(r, PiSpec::uniform());
}

Chain star_graph(int m) {
  if (m < 2) throw std::invalid_argument("star needs m >= 2 leaves");
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(m + 1, m + 1);
  for (int leaf = 1; leaf <= m; ++leaf) r(0, leaf) = r(leaf, 0) = 1.0;
  return build_chain(r, PiSpec::uniform());
}

Chain tensor_product(const Chain& a, const Chain& b) {
  const int na = a.n(), nb = b.n();
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(na * nb, na * nb);
  for (int xa = 0; xa < na; ++xa) {
    for (int xb = 0; xb < nb; ++xb) {
      const int from = xa * nb + xb;
      for (const Edge& e : a.neighbors(xa)) r(from, e.to * nb + xb) = e.rate;
      for (const Edge& e : b.neighbors(xb)) r(from, xa * nb + e.to) = e.rate;
    }
  }
  Eigen::VectorXd pi(na * nb);
  for (int xa = 0; xa < na; ++xa)
    for (int xb = 0; xb < nb; ++xb) pi[xa * nb + xb] = a.pi()[xa] * b.pi()[xb];
  return build_chain(r, PiSpec::explicit_measure(std::move(pi)));
}

nlohmann::json Chain::to_json() const {
  nlohmann::json j;
  j["n"] = n_;
  nlohmann::json triplets = nlohmann::json::array();
  for (int x = 0; x < n_; ++x)
    for (const Edge& e : adj_[x]) triplets.push_back({x, e.to, e.rate});
  j["rates"] = std::move(triplets);
  j["pi"] = std::vector<double>(pi_.data(), pi_.data() + n_);
  j["reversible_hint"] = reversible_;
  return j;
}

Chain Chain::from_json(const nlohmann::json& j) {
  const int n = j.at("n").get<int>();
  if (n < 1) throw std::invalid_argument("chain file: n must be >= 1");
  Eigen::MatrixXd rates = Eigen::MatrixXd::Zero(n, n);
  std::map<std::pair<int, int>, bool> seen;
  for (const auto& t : j.at("rates")) {
    if (!t.is_array() || t.size() != 3) throw std::invalid_argument("chain file: rate entries must be [x, y, value] triplets");
    const int x = t[0].get<int>(), y = t[1].get<int>();
    const double v = t[2].get<double>();
    if (x < 0 || x >= n || y < 0 || y >= n) throw std::invalid_argument("chain file: state index out of range");
    if (x == y) throw std::invalid_argument("chain file: triplets must be off-diagonal");
    if (seen.count({x, y})) throw std::invalid_argument("chain file: duplicate rate triplet");
    seen[{x, y}] = true;
    rates(x, y) = v;
  }
  PiSpec pi = PiSpec::uniform();
  const auto& jpi = j.at("pi");
  if (jpi.is_string()) {
    const std::string s = jpi.get<std::string>();
    if (s == "uniform")
      pi = PiSpec::uniform();
    else if (s == "stationary")
      pi = PiSpec::stationary();
    else
      throw std::invalid_argument("chain file: pi must be a vector, \"uniform\" or \"stationary\"");
  } else {
    const auto v = jpi.get<std::vector<double>>();
    pi = PiSpec::explicit_measure(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<int>(v.size())));
  }
  return build_chain(rates, pi);
}

ProbabilityDensity make_density(const Chain& c, const Eigen::VectorXd& values) {
  if (values.size() != c.n()) throw std::invalid_argument("density length mismatch");
  if (values.minCoeff() < 0.0) throw std::invalid_argument("density must be nonnegative");
  const double mass = values.dot(c.pi());
  if (std::abs(mass - 1.0) > 1e-12)
    throw std::invalid_argument("density mass differs from 1 beyond tolerance");
  return {values};
}

ProbabilityDensity normalize_density(const Chain& c, const Eigen::VectorXd& values) {
  if (values.size() != c.n()) throw std::invalid_argument("density length mismatch");
  if (values.minCoeff() < 0.0) throw std::invalid_argument("density must be nonnegative");
  const double mass = values.dot(c.pi());
  if (mass <= 0.0) throw std::invalid_argument("density mass must be positive");
  return {values / mass};
}

}  // namespace curvlab
