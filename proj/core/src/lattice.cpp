#include "curvlab/lattice.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "curvlab/gamma_ops.hpp"
#include "curvlab/rng.hpp"
#include "curvlab/semigroup.hpp"

namespace curvlab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double LatticeKernel::sum_rates() const {
  double s = 0.0;
  for (int j = 1; j <= J; ++j) s += 2.0 * k[j];
  return s;
}

LatticeKernel build_lattice_kernel(double beta, double c, int J, int M) {
  if (!(beta > 0.0)) throw std::invalid_argument("lattice kernel needs beta > 0");
  if (!(c > 0.0)) throw std::invalid_argument("lattice kernel needs c > 0");
  if (J < 1) throw std::invalid_argument("lattice kernel needs J >= 1");
  if (M <= 4 * J) throw std::invalid_argument("lattice kernel needs M > 4J");
  LatticeKernel kern;
  kern.beta = beta;
  kern.c = c;
  kern.J = J;
  kern.M = M;
  kern.k.assign(J + 1, 0.0);
  for (int j = 1; j <= J; ++j) kern.k[j] = c / std::pow(static_cast<double>(j), 1.0 + beta);
  return kern;
}

LatticeDiagnostics kernel_diagnostics(const LatticeKernel& kern, std::span<const double> deltas) {
  LatticeDiagnostics d;
  d.sum_k = kern.sum_rates();
  for (int j = 1; j <= kern.J; ++j) {
    const double term = 2.0 * kern.k[j] * static_cast<double>(j) * j;
    d.second_moment += term;
    if (j > kern.J / 2) d.second_moment_last_half += term;
  }
  for (const double delta : deltas) {
    double s = 0, sh = 0;
    for (int j = 1; j <= kern.J; ++j) {
      const double term = std::pow(kern.k[j], 1.0 - delta);
      s += term;
      if (j > kern.J / 2) sh += term;
    }
    d.delta.push_back(delta);
    d.sum_k_power.push_back(s);
    d.sum_k_power_last_half.push_back(sh);
  }
  return d;
}

Chain to_chain(const LatticeKernel& kern) {
  const int m = kern.M;
  Eigen::MatrixXd rates = Eigen::MatrixXd::Zero(m, m);
  for (int x = 0; x < m; ++x)
    for (int j = 1; j <= kern.J; ++j) {
      rates(x, (x + j) % m) += kern.k[j];
      rates(x, ((x - j) % m + m) % m) += kern.k[j];
    }
  return build_chain(rates, PiSpec::uniform());
}

double lattice_psi2(const LatticeKernel& kern, const Eigen::VectorXd& f, int x) {
  const int m = kern.M;
  if (f.size() != m) throw std::invalid_argument("lattice function length must equal M");
  auto at = [&](int i) { return f[((i % m) + m) % m]; };
  const double fx = at(x);
  double s = 0.0;
  for (int j = -kern.J; j <= kern.J; ++j) {
    if (j == 0) continue;
    const double kj = kern.k[std::abs(j)];
    const double fxj = at(x + j);
    for (int l = -kern.J; l <= kern.J; ++l) {
      if (l == 0) continue;
      const double kl = kern.k[std::abs(l)];
      const double fxl = at(x + l);
      const double D = at(x + j + l) - fxj - fxl + fx;
      s += kj * kl * std::exp(fxl - fx) * upsilon(D);
    }
  }
  return 0.5 * s;
}

namespace {

// Gamma_2 form (1/4) sum_{j,l} k(j)k(l) D_{j,l}^2 and the linear functional
// f -> Lf(0), both over support coordinates -2J..2J.
void gamma2_support_form(const LatticeKernel& kern, Eigen::MatrixXd& H, Eigen::VectorXd& q) {
  const int J = kern.J;
  const int off = 2 * J;
  const int m = 4 * J + 1;
  H = Eigen::MatrixXd::Zero(m, m);
  std::array<int, 4> idx;
  const std::array<double, 4> co = {1.0, -1.0, -1.0, 1.0};
  for (int j = -J; j <= J; ++j) {
    if (j == 0) continue;
    const double kj = kern.k[std::abs(j)];
    for (int l = -J; l <= J; ++l) {
      if (l == 0) continue;
      const double w = 0.25 * kj * kern.k[std::abs(l)];
      idx = {off + j + l, off + j, off + l, off};
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) H(idx[a], idx[b]) += w * co[a] * co[b];
    }
  }
  q = Eigen::VectorXd::Zero(m);
  for (int j = -J; j <= J; ++j) {
    if (j == 0) continue;
    q[off + j] += kern.k[std::abs(j)];
    q[off] -= kern.k[std::abs(j)];
  }
}

// minimizer of the Gamma_2 form subject to Lf(0) = -1, via the pseudo-inverse
Eigen::VectorXd quadratic_envelope_minimizer(const Eigen::MatrixXd& H, const Eigen::VectorXd& q) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  const double cut = es.eigenvalues().maxCoeff() * 1e-12;
  Eigen::VectorXd f = Eigen::VectorXd::Zero(q.size());
  for (int i = 0; i < q.size(); ++i) {
    if (es.eigenvalues()[i] <= cut) continue;
    const Eigen::VectorXd u = es.eigenvectors().col(i);
    f += u * (u.dot(q) / es.eigenvalues()[i]);
  }
  return f / -q.dot(f);  // scaled so -Lf(0) = +1
}

}  // namespace

LatticeCdReport check_classical_cd(const LatticeKernel& kern, double d) {
  if (!(d >= 1.0)) throw std::invalid_argument("dimension must satisfy d >= 1");
  Eigen::MatrixXd H;
  Eigen::VectorXd q;
  gamma2_support_form(kern, H, q);
  const Eigen::MatrixXd A = H - (1.0 / d) * q * q.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);

  LatticeCdReport rep;
  rep.d = d;
  rep.min_eigenvalue = es.eigenvalues()[0];
  rep.holds = rep.min_eigenvalue >= -1e-12;
  if (!rep.holds) rep.witness = es.eigenvectors().col(0);
  return rep;
}

LiYauReport li_yau_check(const LatticeKernel& kern, const Eigen::VectorXd& u0,
                         const RelaxationProfile& phi, const std::vector<double>& times) {
  if (u0.minCoeff() <= 0.0) throw std::invalid_argument("u0 must be strictly positive");
  const Chain chain = to_chain(kern);
  LiYauReport rep;
  rep.worst_slack = kInf;
  Eigen::VectorXd u = u0;
  double prev_t = 0.0;
  for (const double t : times) {
    u = propagate(chain, u, t - prev_t);
    prev_t = t;
    if (u.minCoeff() <= 1e-300) throw std::runtime_error("li_yau_check: solution touched the positivity floor");
    Eigen::VectorXd logu(u.size());
    for (int x = 0; x < u.size(); ++x) logu[x] = std::log(u[x]);
    const Eigen::VectorXd llog = apply_generator(chain, logu);
    const double max_neg = (-llog).maxCoeff();
    const double phit = phi.eval(t);
    rep.times.push_back(t);
    rep.max_neg_l_log_u.push_back(max_neg);
    rep.phi.push_back(phit);
    const double slack = phit - max_neg;
    rep.worst_slack = std::min(rep.worst_slack, slack);
    if (slack < -1e-9 * std::max(1.0, phit)) ++rep.violations;
  }
  return rep;
}

HarnackReport harnack_check(const LatticeKernel& kern, const Eigen::VectorXd& u0,
                            const RelaxationProfile& phi, std::span<const HarnackPair> pairs) {
  if (u0.minCoeff() <= 0.0) throw std::invalid_argument("u0 must be strictly positive");
  const Chain chain = to_chain(kern);
  const int m = kern.M;

  // evolve once through the union of pair times
  std::vector<double> times;
  for (const HarnackPair& p : pairs) {
    if (!(p.t2 > p.t1) || p.t1 < 0.0) throw std::invalid_argument("harnack pair needs 0 <= t1 < t2");
    times.push_back(p.t1);
    times.push_back(p.t2);
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  std::map<double, Eigen::VectorXd> u_at;
  Eigen::VectorXd u = u0;
  double prev_t = 0.0;
  for (const double t : times) {
    u = propagate(chain, u, t - prev_t);
    prev_t = t;
    u_at[t] = u;
  }

  const double expo = std::min(1.0 + kern.beta, 2.0);
  HarnackReport rep;
  rep.min_residual = kInf;
  for (const HarnackPair& p : pairs) {
    const int dx = std::abs(((p.x1 - p.x2) % m + m) % m);
    const int dist = std::min(dx, m - dx);
    const double integral = integrate_relaxation(phi, p.t1, p.t2);
    if (std::isinf(integral)) {
      ++rep.infinite_integrals;
      rep.residuals.push_back(kInf);
      continue;
    }
    const double lhs = std::log(u_at.at(p.t1)[p.x1]);
    const double rhs = std::log(u_at.at(p.t2)[p.x2]) + integral +
                       2.0 * std::pow(static_cast<double>(dist), expo) / (p.t2 - p.t1);
    const double res = rhs - lhs;
    rep.residuals.push_back(res);
    rep.min_residual = std::min(rep.min_residual, res);
  }
  return rep;
}

namespace {

// Psi_{2,Upsilon}(f)(0) and its gradient for f on support coordinates
// -2J..2J (index + 2J), kernel truncated at J. Used by the envelope fit.
struct SupportPsi2 {
  const LatticeKernel& kern;
  int J, off, m;

  explicit SupportPsi2(const LatticeKernel& k)
      : kern(k), J(k.J), off(2 * k.J), m(4 * k.J + 1) {}

  double value(const Eigen::VectorXd& f) const {
    double s = 0.0;
    for (int j = -J; j <= J; ++j) {
      if (j == 0) continue;
      const double kj = kern.k[std::abs(j)];
      for (int l = -J; l <= J; ++l) {
        if (l == 0) continue;
        const double D = f[off + j + l] - f[off + j] - f[off + l] + f[off];
        s += kj * kern.k[std::abs(l)] * std::exp(f[off + l] - f[off]) * upsilon(D);
      }
    }
    return 0.5 * s;
  }

  double value_grad(const Eigen::VectorXd& f, Eigen::VectorXd& grad) const {
    grad.setZero(m);
    double s = 0.0;
    for (int j = -J; j <= J; ++j) {
      if (j == 0) continue;
      const double kj = kern.k[std::abs(j)];
      for (int l = -J; l <= J; ++l) {
        if (l == 0) continue;
        const double w = 0.5 * kj * kern.k[std::abs(l)];
        const double ex = std::exp(f[off + l] - f[off]);
        const double D = f[off + j + l] - f[off + j] - f[off + l] + f[off];
        const double u = upsilon(D), up = upsilon_prime(D);
        s += w * ex * u;
        const double a = w * ex * u;   // d/d(exp argument)
        const double b = w * ex * up;  // d/dD
        grad[off + l] += a - b;
        grad[off] += -a + b;
        grad[off + j + l] += b;
        grad[off + j] -= b;
      }
    }
    return s;
  }

  double neg_l(const Eigen::VectorXd& f) const {
    double s = 0.0;
    for (int j = -J; j <= J; ++j) {
      if (j == 0) continue;
      s += kern.k[std::abs(j)] * (f[off + j] - f[off]);
    }
    return -s;
  }

  Eigen::VectorXd neg_l_grad() const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(m);
    for (int j = -J; j <= J; ++j) {
      if (j == 0) continue;
      g[off + j] -= kern.k[std::abs(j)];
      g[off] += kern.k[std::abs(j)];
    }
    return g;
  }
};

}  // namespace

CdFunction fit_cd_function(const LatticeKernel& kern, int samples, std::uint64_t seed,
                           const EnvelopeOptions& opts) {
  if (samples < 100) throw std::invalid_argument("fit_cd_function needs samples >= 100");
  const SupportPsi2 eng(kern);
  const int m = eng.m, off = eng.off, J = eng.J;
  CounterRng rng(seed);

  std::vector<std::pair<double, double>> wz;
  std::map<long, std::pair<double, Eigen::VectorXd>> bin_best;  // bin -> (z, f)
  const double bw = 1.0 / opts.bins_per_decade;
  auto record = [&](double w, double z, const Eigen::VectorXd& f) {
    if (!(w > 0.0) || !std::isfinite(z)) return;
    wz.emplace_back(w, z);
    const long b = static_cast<long>(std::floor(std::log10(w) / bw));
    auto it = bin_best.find(b);
    if (it == bin_best.end() || z < it->second.first) bin_best[b] = {z, f};
  };

  // random pass with amplitude ladder
  for (int i = 0; i < samples; ++i) {
    Eigen::VectorXd f = rng.gaussian_vector(static_cast<std::uint64_t>(i), m);
    const double amp = std::pow(10.0, -2.5 + 4.0 * rng.uniform(0xfeed, i));
    f *= amp;
    record(eng.neg_l(f), eng.value(f), f);
  }
  // structured single-site and pair families (negative wells at distance j0)
  for (int j0 = 1; j0 <= J; ++j0) {
    for (int ia = 0; ia < 40; ++ia) {
      const double a = std::pow(10.0, -3.0 + 4.5 * ia / 39.0);
      Eigen::VectorXd f = Eigen::VectorXd::Zero(m);
      f[off + j0] = -a;
      record(eng.neg_l(f), eng.value(f), f);
      f[off - j0] = -a;
      record(eng.neg_l(f), eng.value(f), f);
    }
  }
  // scaled quadratic-optimizer ladder: exact small-amplitude envelope
  {
    Eigen::MatrixXd H;
    Eigen::VectorXd q;
    gamma2_support_form(kern, H, q);
    const Eigen::VectorXd fq = quadratic_envelope_minimizer(H, q);
    for (int is = 0; is < 240; ++is) {
      const double s = std::pow(10.0, -9.0 + 10.8 * is / 239.0);
      const Eigen::VectorXd f = s * fq;
      record(eng.neg_l(f), eng.value(f), f);
    }
  }

  // per-bin refinement: projected gradient descent at the bin-center target w
  const Eigen::VectorXd a = eng.neg_l_grad();
  const double a2 = a.squaredNorm();
  for (auto& [bin, best] : bin_best) {
    const double w_target = std::pow(10.0, (bin + 0.5) * bw);
    Eigen::VectorXd f = best.second;
    f += (w_target - eng.neg_l(f)) / a2 * a;  // restore the linear constraint
    Eigen::VectorXd grad(m);
    double val = eng.value_grad(f, grad);
    double step = 0.1;
    for (int it = 0; it < 160; ++it) {
      Eigen::VectorXd dir = grad - (grad.dot(a) / a2) * a;  // tangent to the constraint
      const double dn = dir.norm();
      if (dn < 1e-14 * std::max(1.0, std::abs(val))) break;
      bool moved = false;
      for (int ls = 0; ls < 30; ++ls) {
        Eigen::VectorXd fn = f - (step / dn) * dir;
        const double vn = eng.value(fn);
        if (vn < val) {
          f = std::move(fn);
          val = vn;
          step *= 1.6;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
      val = eng.value_grad(f, grad);
    }
    record(eng.neg_l(f), val, f);
  }

  return fit_envelope(wz, opts);
}

nlohmann::json LiYauReport::to_json() const {
  nlohmann::json j;
  j["times"] = times;
  j["max_neg_l_log_u"] = max_neg_l_log_u;
  j["phi"] = phi;
  j["violations"] = violations;
  j["worst_slack"] = worst_slack;
  return j;
}

std::string LiYauReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "t,max_neg_l_log_u,phi\n";
  for (std::size_t i = 0; i < times.size(); ++i)
    os << times[i] << "," << max_neg_l_log_u[i] << "," << phi[i] << "\n";
  return os.str();
}

nlohmann::json HarnackReport::to_json() const {
  nlohmann::json j;
  std::vector<double> res;
  for (double r : residuals) res.push_back(r);
  j["residuals"] = res;
  j["min_residual"] = min_residual;
  j["infinite_integrals"] = infinite_integrals;
  return j;
}

}  // namespace curvlab
