#include "curvlab/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "curvlab/gamma_ops.hpp"
#include "curvlab/optimize.hpp"
#include "curvlab/rng.hpp"

namespace curvlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Gamma form at x as a dense symmetric matrix:
// Gamma(f)(x) = (1/2) sum_y k(x,y) (f(y)-f(x))^2.
Eigen::MatrixXd gamma_form(const Chain& c, int x) {
  const int n = c.n();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : c.neighbors(x)) {
    const double w = 0.5 * e.rate;
    B(e.to, e.to) += w;
    B(x, x) += w;
    B(e.to, x) -= w;
    B(x, e.to) -= w;
  }
  return B;
}

// row x of the full generator as a vector (linear functional f -> Lf(x))
Eigen::VectorXd generator_row(const Chain& c, int x) {
  Eigen::VectorXd q = Eigen::VectorXd::Zero(c.n());
  for (const Edge& e : c.neighbors(x)) {
    q[e.to] += e.rate;
    q[x] -= e.rate;
  }
  return q;
}

// Gamma_2 form at x: (1/2)[ sum_y k(x,y)(G_y - G_x) ] - sym(C) with
// C = (1/2) sum_y k(x,y) (e_y - e_x)(q_y - q_x)^T.
Eigen::MatrixXd gamma2_form(const Chain& c, int x) {
  const int n = c.n();
  Eigen::MatrixXd lg = Eigen::MatrixXd::Zero(n, n);
  const Eigen::MatrixXd gx = gamma_form(c, x);
  for (const Edge& e : c.neighbors(x)) lg += e.rate * (gamma_form(c, e.to) - gx);

  Eigen::MatrixXd cmat = Eigen::MatrixXd::Zero(n, n);
  const Eigen::VectorXd qx = generator_row(c, x);
  for (const Edge& e : c.neighbors(x)) {
    const Eigen::VectorXd dq = generator_row(c, e.to) - qx;
    cmat.row(e.to) += 0.5 * e.rate * dq.transpose();
    cmat.row(x) -= 0.5 * e.rate * dq.transpose();
  }
  return 0.5 * lg - 0.5 * (cmat + cmat.transpose());
}

struct StateKappa {
  double kappa;
  Eigen::VectorXd witness;
};

// sup{kappa : A - kappa B >= 0} for B >= 0 singular. Splitting along
// ker B (+) ran B, the block condition is A_kk >= 0, the coupling A_kr
// confined to ran A_kk, and the Schur complement
// A_rr - A_rk A_kk^+ A_kr >= kappa B_rr. Plain kernel deflation without the
// Schur term overstates kappa whenever the optimal f leans on states the
// Gamma-form at x cannot see (distance-2 vertices of the hypercube).
StateKappa state_optimal_kappa(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  const int n = static_cast<int>(A.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esB(B);
  const Eigen::VectorXd evB = esB.eigenvalues();
  const double bmax = evB.cwiseAbs().maxCoeff();
  if (bmax <= 0.0) return {kInf, Eigen::VectorXd()};  // isolated state
  const double cut_b = 1e-12 * bmax;
  const double amag = std::max(1.0, A.cwiseAbs().maxCoeff());

  std::vector<int> range_idx, kernel_idx;
  for (int i = 0; i < n; ++i) (evB[i] > cut_b ? range_idx : kernel_idx).push_back(i);

  const int nr = static_cast<int>(range_idx.size());
  const int nk = static_cast<int>(kernel_idx.size());
  Eigen::MatrixXd R(n, nr), N(n, nk);
  for (int i = 0; i < nr; ++i) R.col(i) = esB.eigenvectors().col(range_idx[i]);
  for (int i = 0; i < nk; ++i) N.col(i) = esB.eigenvectors().col(kernel_idx[i]);

  const Eigen::MatrixXd Arr = R.transpose() * A * R;
  const Eigen::MatrixXd Brr = R.transpose() * B * R;

  Eigen::MatrixXd S = Arr;
  Eigen::MatrixXd kernel_lift;  // maps range coefficients to the kernel part of the witness
  if (nk > 0) {
    const Eigen::MatrixXd Akk = N.transpose() * A * N;
    const Eigen::MatrixXd Akr = N.transpose() * A * R;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esk(Akk);
    const double cut_a = 1e-11 * amag;
    // negative on the kernel: no kappa works
    if (esk.eigenvalues().minCoeff() < -1e-10 * amag)
      return {-kInf, N * esk.eigenvectors().col(0)};
    Eigen::MatrixXd pinv = Eigen::MatrixXd::Zero(nk, nk);
    for (int i = 0; i < nk; ++i) {
      const double ev = esk.eigenvalues()[i];
      const Eigen::VectorXd u = esk.eigenvectors().col(i);
      const double coupling = (u.transpose() * Akr).norm();
      if (ev <= cut_a) {
        // a kernel direction A cannot control but the coupling excites
        if (coupling > 1e-8 * amag) return {-kInf, N * u};
        continue;
      }
      pinv += u * u.transpose() / ev;
    }
    S -= Akr.transpose() * pinv * Akr;
    kernel_lift = -pinv * Akr;
  }

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(S, Brr);
  const Eigen::VectorXd vr = ges.eigenvectors().col(0);
  Eigen::VectorXd witness = R * vr;
  if (nk > 0) witness += N * (kernel_lift * vr);
  witness /= witness.norm();
  return {ges.eigenvalues()[0], witness};
}

double state_ratio(const StateFunction& psi2, const StateFunction& psi, int x) {
  // near-constant neighborhoods are degenerate; discard
  if (psi[x] < 1e-13) return kInf;
  return psi2[x] / psi[x];
}

}  // namespace

CurvatureReport classical_optimal_kappa(const Chain& c, double d) {
  if (!(d >= 1.0)) throw std::invalid_argument("dimension must satisfy d >= 1 (or infinity)");
  const int n = c.n();
  CurvatureReport rep;
  rep.mode = CurvatureReport::Mode::Classical;
  rep.dimension = d;
  rep.per_state_kappa.resize(n);
  rep.global_kappa = kInf;
  rep.witness_state = -1;

  for (int x = 0; x < n; ++x) {
    Eigen::MatrixXd A = gamma2_form(c, x);
    if (std::isfinite(d)) {
      const Eigen::VectorXd q = generator_row(c, x);
      A -= (1.0 / d) * q * q.transpose();
    }
    const Eigen::MatrixXd B = gamma_form(c, x);
    const StateKappa sk = state_optimal_kappa(A, B);
    rep.per_state_kappa[x] = sk.kappa;
    if (sk.kappa < rep.global_kappa) {
      rep.global_kappa = sk.kappa;
      rep.witness = sk.witness;
      rep.witness_state = x;
    }
  }
  // all states isolated: report +inf with an empty witness
  if (rep.witness_state < 0) rep.witness = Eigen::VectorXd();
  return rep;
}

CurvatureReport estimate_upsilon_kappa(const Chain& c, const SearchBudget& budget,
                                       std::uint64_t seed) {
  if (budget.samples < 1) throw std::invalid_argument("budget must allow at least one sample");
  const int n = c.n();
  CounterRng rng(seed);

  CurvatureReport rep;
  rep.mode = CurvatureReport::Mode::Upsilon;
  rep.seed = seed;
  rep.budget = budget;
  rep.per_state_kappa = Eigen::VectorXd::Constant(n, kInf);
  rep.global_kappa = kInf;
  rep.witness_state = -1;

  auto consider = [&](const StateFunction& f) {
    const StateFunction psi = psi_upsilon(c, f);
    const StateFunction psi2 = psi2_upsilon(c, f);
    for (int x = 0; x < n; ++x) {
      const double r = state_ratio(psi2, psi, x);
      if (r < rep.per_state_kappa[x]) rep.per_state_kappa[x] = r;
      if (r < rep.global_kappa) {
        rep.global_kappa = r;
        rep.witness = f;
        rep.witness_state = x;
      }
    }
  };

  if (n == 2) {
    // exhaustive scan over the single gauge-fixed direction f = (0, s)
    for (int i = 0; i <= 4000; ++i) {
      const double mag = std::pow(10.0, -6.0 + 7.5 * i / 4000.0);
      for (const double s : {mag, -mag}) {
        StateFunction f(2);
        f << 0.0, s;
        consider(f);
      }
    }
    return rep;
  }

  // dense random pass, gauge-fixed via ratio invariance
  std::vector<std::pair<double, StateFunction>> pool;
  for (int i = 0; i < budget.samples; ++i) {
    const StateFunction g = rng.gaussian_vector(static_cast<std::uint64_t>(i), n);
    const StateFunction psi = psi_upsilon(c, g);
    const StateFunction psi2 = psi2_upsilon(c, g);
    double best = kInf;
    for (int x = 0; x < n; ++x) best = std::min(best, state_ratio(psi2, psi, x));
    if (best < kInf) pool.emplace_back(best, g);
    consider(g);
  }
  std::sort(pool.begin(), pool.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  // small-amplitude pass: the infimum is often attained in the Gamma-limit
  const CurvatureReport classical = classical_optimal_kappa(c, kInf);
  std::vector<StateFunction> small_seeds;
  if (classical.witness.size() == n) small_seeds.push_back(classical.witness);
  for (std::size_t i = 0; i < pool.size() && i < 8; ++i) small_seeds.push_back(pool[i].second);
  for (const StateFunction& g : small_seeds)
    for (const double eps : {1e-1, 1e-2, 1e-3}) consider(eps * g / std::max(1.0, g.cwiseAbs().maxCoeff()));

  // local descent from the best candidates, gauge fixed at coordinate 0
  auto objective = [&](const Eigen::VectorXd& y) {
    StateFunction f(n);
    f[0] = 0.0;
    f.tail(n - 1) = y;
    const StateFunction psi = psi_upsilon(c, f);
    const StateFunction psi2 = psi2_upsilon(c, f);
    double best = kInf;
    for (int x = 0; x < n; ++x) best = std::min(best, state_ratio(psi2, psi, x));
    return best;
  };
  const int descents = std::min<int>(budget.descents, static_cast<int>(pool.size()));
  for (int i = 0; i < descents; ++i) {
    const StateFunction& g = pool[i].second;
    Eigen::VectorXd y = (g.tail(n - 1).array() - g[0]).matrix();
    NelderMeadOptions opts;
    opts.max_iters = budget.descent_iters;
    const Eigen::VectorXd yb = nelder_mead(objective, y, opts);
    StateFunction f(n);
    f[0] = 0.0;
    f.tail(n - 1) = yb;
    consider(f);
  }
  return rep;
}

CdVerification verify_cd_upsilon(const Chain& c, double kappa, const CdFunction* F,
                                 const SearchBudget& budget, std::uint64_t seed) {
  const int n = c.n();
  CounterRng rng(seed);
  CdVerification rep;
  rep.kappa = kappa;
  rep.seed = seed;
  rep.min_slack = kInf;

  auto slack_at = [&](const StateFunction& f, const StateFunction& psi2, const StateFunction& psi,
                      const StateFunction& lf, int x) {
    double s = psi2[x] - kappa * psi[x];
    if (F && -lf[x] > 0.0) s -= (*F)(-lf[x]);
    return s;
  };
  // numerical noise floor: slacks this close to zero are not violations
  auto tolerance_at = [&](const StateFunction& psi2, const StateFunction& psi, int x) {
    return 1e-9 * std::max({1.0, std::abs(kappa) * psi[x], std::abs(psi2[x])});
  };

  auto consider = [&](const StateFunction& f) {
    const StateFunction psi = psi_upsilon(c, f);
    const StateFunction psi2 = psi2_upsilon(c, f);
    const StateFunction lf = apply_generator(c, f);
    for (int x = 0; x < n; ++x) {
      if (psi[x] < 1e-13) continue;  // constant-on-neighborhood degenerate
      const double s = slack_at(f, psi2, psi, lf, x);
      if (s < rep.min_slack) rep.min_slack = s;
      if (s < -tolerance_at(psi2, psi, x) && (!rep.violation_found || s < rep.min_slack + 1e-300)) {
        rep.violation_found = true;
        rep.witness = f;
        rep.witness_state = x;
        rep.psi2_at_witness = psi2[x];
        rep.psi_at_witness = psi[x];
        rep.neg_lf_at_witness = -lf[x];
        rep.f0_term_at_witness = (F && -lf[x] > 0.0) ? (*F)(-lf[x]) : 0.0;
      }
    }
  };

  std::vector<std::pair<double, StateFunction>> pool;
  for (int i = 0; i < budget.samples; ++i) {
    StateFunction g = rng.gaussian_vector(static_cast<std::uint64_t>(i), n);
    // mix amplitudes so both the Gamma-limit and the exponential regime are probed
    const double amp = std::pow(10.0, -2.0 + 3.0 * rng.uniform(0x5ca1e, i));
    g *= amp;
    const StateFunction psi = psi_upsilon(c, g);
    const StateFunction psi2 = psi2_upsilon(c, g);
    const StateFunction lf = apply_generator(c, g);
    double worst = kInf;
    for (int x = 0; x < n; ++x) {
      if (psi[x] < 1e-13) continue;
      worst = std::min(worst, slack_at(g, psi2, psi, lf, x));
    }
    if (worst < kInf) pool.emplace_back(worst, g);
    consider(g);
  }
  std::sort(pool.begin(), pool.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  auto objective = [&](const Eigen::VectorXd& y) {
    StateFunction f(n);
    f[0] = 0.0;
    if (n > 1) f.tail(n - 1) = y;
    const StateFunction psi = psi_upsilon(c, f);
    const StateFunction psi2 = psi2_upsilon(c, f);
    const StateFunction lf = apply_generator(c, f);
    double worst = kInf;
    for (int x = 0; x < n; ++x) {
      if (psi[x] < 1e-13) continue;
      worst = std::min(worst, slack_at(f, psi2, psi, lf, x));
    }
    return worst;
  };
  const int descents = std::min<int>(budget.descents, static_cast<int>(pool.size()));
  for (int i = 0; i < descents; ++i) {
    Eigen::VectorXd y = (pool[i].second.tail(n - 1).array() - pool[i].second[0]).matrix();
    NelderMeadOptions opts;
    opts.max_iters = budget.descent_iters;
    const Eigen::VectorXd yb = nelder_mead(objective, y, opts);
    StateFunction f(n);
    f[0] = 0.0;
    f.tail(n - 1) = yb;
    consider(f);
  }
  return rep;
}

CdFunction fit_cd_function(const Chain& c, int samples, std::uint64_t seed,
                           const EnvelopeOptions& opts) {
  if (samples < 100) throw std::invalid_argument("fit_cd_function needs samples >= 100");
  const int n = c.n();
  CounterRng rng(seed);
  std::vector<std::pair<double, double>> wz;
  wz.reserve(static_cast<std::size_t>(samples) * n);
  for (int i = 0; i < samples; ++i) {
    StateFunction g = rng.gaussian_vector(static_cast<std::uint64_t>(i), n);
    const double amp = std::pow(10.0, -2.5 + 4.0 * rng.uniform(0xab1e, i));
    g *= amp;
    const StateFunction psi2 = psi2_upsilon(c, g);
    const StateFunction lf = apply_generator(c, g);
    for (int x = 0; x < n; ++x)
      if (-lf[x] > 0.0) wz.emplace_back(-lf[x], psi2[x]);
  }
  return fit_envelope(wz, opts);
}

nlohmann::json CurvatureReport::to_json() const {
  nlohmann::json j;
  j["mode"] = mode == Mode::Classical ? "classical" : "upsilon";
  j["global_kappa"] = global_kappa;
  j["dimension"] = std::isfinite(dimension) ? nlohmann::json(dimension) : nlohmann::json("inf");
  j["per_state"] = std::vector<double>(per_state_kappa.data(), per_state_kappa.data() + per_state_kappa.size());
  j["witness"] = std::vector<double>(witness.data(), witness.data() + witness.size());
  j["witness_state"] = witness_state;
  j["seed"] = seed;
  j["budget"] = {{"samples", budget.samples}, {"descents", budget.descents}, {"descent_iters", budget.descent_iters}};
  return j;
}

nlohmann::json CdVerification::to_json() const {
  nlohmann::json j;
  j["violation_found"] = violation_found;
  j["min_slack"] = min_slack;
  j["kappa"] = kappa;
  j["seed"] = seed;
  if (violation_found) {
    j["witness"] = std::vector<double>(witness.data(), witness.data() + witness.size());
    j["witness_state"] = witness_state;
    j["psi2"] = psi2_at_witness;
    j["psi_upsilon"] = psi_at_witness;
    j["neg_lf"] = neg_lf_at_witness;
    j["f0_term"] = f0_term_at_witness;
  }
  return j;
}

}  // namespace curvlab
