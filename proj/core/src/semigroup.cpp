#include "curvlab/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "curvlab/gamma_ops.hpp"
#include "curvlab/optimize.hpp"
#include "curvlab/rng.hpp"

namespace curvlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogFloor = 1e-300;

double safe_log(double v) { return std::log(std::max(v, kLogFloor)); }

// single uniformization step, lambda * t kept moderate by the caller
Eigen::VectorXd uniformization_step(const Chain& c, Eigen::VectorXd v, double t, double lambda) {
  const double w = lambda * t;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(c.n());
  double weight = std::exp(-w);  // Poisson(0)
  double cum = weight;
  acc += weight * v;
  const int kmax = static_cast<int>(w + 12.0 * std::sqrt(w + 1.0) + 40.0);
  for (int k = 1; k <= kmax; ++k) {
    // v <- P v with P = I + Q/lambda
    Eigen::VectorXd pv = v;
    for (int x = 0; x < c.n(); ++x) {
      double s = 0.0;
      for (const Edge& e : c.neighbors(x)) s += e.rate * (v[e.to] - v[x]);
      pv[x] += s / lambda;
    }
    v.swap(pv);
    weight *= w / k;
    cum += weight;
    acc += weight * v;
    if (1.0 - cum < 1e-16 && k > w) break;
  }
  return acc / cum;  // renormalize the truncated Poisson weights
}

}  // namespace

Eigen::VectorXd propagate(const Chain& c, const Eigen::VectorXd& v, double t) {
  if (v.size() != c.n()) throw std::invalid_argument("state function length mismatch");
  if (t < 0.0) throw std::invalid_argument("propagate needs t >= 0");
  double lambda = 0.0;
  for (int x = 0; x < c.n(); ++x) lambda = std::max(lambda, c.out_rate(x));
  if (lambda == 0.0 || t == 0.0) return v;
  // keep lambda*dt bounded so Poisson weights stay in range
  const int steps = std::max(1, static_cast<int>(std::ceil(lambda * t / 256.0)));
  Eigen::VectorXd out = v;
  for (int s = 0; s < steps; ++s) out = uniformization_step(c, std::move(out), t / steps, lambda);
  return out;
}

SemigroupTrace evolve(const Chain& c, const ProbabilityDensity& f0, const std::vector<double>& times) {
  if (times.empty()) throw std::invalid_argument("empty time grid");
  if (times.front() < 0.0) throw std::invalid_argument("times must start at t >= 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (times[i] <= times[i - 1]) throw std::invalid_argument("times must be strictly increasing");
  if (!c.reversible())
    throw std::invalid_argument(
        "evolve: chain is not reversible; the density evolution needs the mu-adjoint — "
        "pass the reversible form explicitly");

  SemigroupTrace trace;
  trace.times = times;
  trace.densities.reserve(times.size());
  Eigen::VectorXd cur = propagate(c, f0.values, times.front());
  trace.densities.push_back(cur);
  for (std::size_t i = 1; i < times.size(); ++i) {
    cur = propagate(c, cur, times[i] - times[i - 1]);
    trace.densities.push_back(cur);
  }
  for (const Eigen::VectorXd& f : trace.densities) {
    trace.entropy.push_back(relative_entropy(c, f));
    trace.fisher.push_back(fisher_information(c, f));
  }
  return trace;
}

double relative_entropy(const Chain& c, const Eigen::VectorXd& f) {
  if (f.size() != c.n()) throw std::invalid_argument("state function length mismatch");
  double h = 0.0;
  for (int x = 0; x < c.n(); ++x)
    if (f[x] > 0.0) h += f[x] * safe_log(f[x]) * c.pi()[x];
  return h;
}

double fisher_information(const Chain& c, const Eigen::VectorXd& f) {
  if (f.size() != c.n()) throw std::invalid_argument("state function length mismatch");
  double total = 0.0;
  for (int x = 0; x < c.n(); ++x) {
    for (const Edge& e : c.neighbors(x)) {
      const double fx = f[x], fy = f[e.to];
      if (fx <= 0.0) {
        if (fy > 0.0) return kInf;  // summand (fy-0)(log fy - log 0) = +inf
        continue;                   // both ends vanish: contributes 0
      }
      if (fy <= 0.0) return kInf;
      total += 0.5 * e.rate * (fy - fx) * (safe_log(fy) - safe_log(fx)) * c.pi()[x];
    }
  }
  return total;
}

EntropyIdentityReport check_entropy_identities(const Chain& c, const SemigroupTrace& trace,
                                               int stencil_order) {
  const std::size_t n = trace.times.size();
  if (n < 5) throw std::invalid_argument("grid too coarse for second differences (need >= 5 points)");
  if (stencil_order != 2 && stencil_order != 4 && stencil_order != 6)
    throw std::invalid_argument("stencil_order must be 2, 4 or 6");
  const double h = trace.times[1] - trace.times[0];
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(trace.times[i] - trace.times[i - 1] - h) > 1e-9 * h)
      throw std::invalid_argument("identity checks need a uniform time grid");
  const int half = stencil_order / 2;
  if (n < static_cast<std::size_t>(2 * half + 1))
    throw std::invalid_argument("grid too coarse for the requested stencil order");

  // right-hand sides from the trace densities
  std::vector<double> rhs1(n), rhs2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd& f = trace.densities[i];
    Eigen::VectorXd logf(f.size());
    for (int x = 0; x < f.size(); ++x) logf[x] = safe_log(f[x]);
    const StateFunction psi = psi_upsilon(c, logf);
    const StateFunction psi2 = psi2_upsilon(c, logf);
    double a = 0.0, b = 0.0;
    for (int x = 0; x < f.size(); ++x) {
      a += f[x] * psi[x] * c.pi()[x];
      b += f[x] * psi2[x] * c.pi()[x];
    }
    rhs1[i] = -a;
    rhs2[i] = 2.0 * b;
  }

  auto d1 = [&](std::size_t i) {
    const std::vector<double>& H = trace.entropy;
    switch (stencil_order) {
      case 2:
        return (H[i + 1] - H[i - 1]) / (2 * h);
      case 4:
        return (-H[i + 2] + 8 * H[i + 1] - 8 * H[i - 1] + H[i - 2]) / (12 * h);
      default:
        return (H[i + 3] - 9 * H[i + 2] + 45 * H[i + 1] - 45 * H[i - 1] + 9 * H[i - 2] - H[i - 3]) / (60 * h);
    }
  };
  auto d2 = [&](std::size_t i) {
    const std::vector<double>& H = trace.entropy;
    switch (stencil_order) {
      case 2:
        return (H[i + 1] - 2 * H[i] + H[i - 1]) / (h * h);
      case 4:
        return (-H[i + 2] + 16 * H[i + 1] - 30 * H[i] + 16 * H[i - 1] - H[i - 2]) / (12 * h * h);
      default:
        return (2 * H[i + 3] - 27 * H[i + 2] + 270 * H[i + 1] - 490 * H[i] + 270 * H[i - 1] -
                27 * H[i - 2] + 2 * H[i - 3]) /
               (180 * h * h);
    }
  };

  double scale1 = 0.0, scale2 = 0.0;
  for (std::size_t i = half; i + half < n; ++i) {
    scale1 = std::max(scale1, std::abs(rhs1[i]));
    scale2 = std::max(scale2, std::abs(rhs2[i]));
  }
  scale1 = std::max(scale1, 1e-300);
  scale2 = std::max(scale2, 1e-300);

  EntropyIdentityReport rep;
  rep.stencil_order = stencil_order;
  for (std::size_t i = half; i + half < n; ++i) {
    rep.max_residual_first = std::max(rep.max_residual_first, std::abs(d1(i) - rhs1[i]) / scale1);
    rep.max_residual_second = std::max(rep.max_residual_second, std::abs(d2(i) - rhs2[i]) / scale2);
  }
  return rep;
}

DecayReport check_decay_and_gradient_bound(const Chain& c, double kappa,
                                           const Eigen::VectorXd& f0,
                                           const std::vector<double>& times) {
  if (f0.minCoeff() <= 0.0) throw std::invalid_argument("f0 must be strictly positive");
  DecayReport rep;
  rep.worst_entropy_slack = kInf;
  rep.worst_gradient_slack = kInf;
  const double h0 = relative_entropy(c, f0);
  const StateFunction psi0 = psi_upsilon(c, f0);
  for (const double t : times) {
    const Eigen::VectorXd ft = propagate(c, f0, t);
    const double decay = std::exp(-2.0 * kappa * t);
    rep.worst_entropy_slack = std::min(rep.worst_entropy_slack, decay * h0 - relative_entropy(c, ft));
    const StateFunction lhs = psi_upsilon(c, ft);
    const Eigen::VectorXd rhs = decay * propagate(c, psi0, t);
    rep.worst_gradient_slack = std::min(rep.worst_gradient_slack, (rhs - lhs).minCoeff());
  }
  return rep;
}

double estimate_mlsi(const Chain& c, int samples, std::uint64_t seed) {
  if (!c.reversible()) throw std::invalid_argument("MLSI estimation needs a reversible chain");
  if (samples < 100) throw std::invalid_argument("estimate_mlsi needs samples >= 100");
  const int n = c.n();
  CounterRng rng(seed);

  auto ratio_of_density = [&](const Eigen::VectorXd& f) {
    const double h = relative_entropy(c, f);
    if (h < 1e-14) return kInf;  // near-uniform degenerate, 0/0 guard
    const double fi = fisher_information(c, f);
    return fi / (2.0 * h);
  };
  auto density_from_log = [&](const Eigen::VectorXd& g) -> Eigen::VectorXd {
    Eigen::VectorXd f = (g.array() - g.maxCoeff()).exp().matrix();
    f /= f.dot(c.pi());
    return f;
  };

  double best = kInf;
  Eigen::VectorXd best_g;
  auto consider_log = [&](const Eigen::VectorXd& g) {
    const double r = ratio_of_density(density_from_log(g));
    if (r < best) {
      best = r;
      best_g = g;
    }
  };

  for (int i = 0; i < samples; ++i) {
    Eigen::VectorXd g = rng.gaussian_vector(static_cast<std::uint64_t>(i), n);
    const double amp = std::pow(10.0, -2.0 + 3.0 * rng.uniform(0x315a, i));
    consider_log(amp * g);
  }
  // near-uniform ladder: the infimum is often a spectral-type limit
  for (int i = 0; i < 16; ++i) {
    const Eigen::VectorXd g = rng.gaussian_vector(0xddd0 + i, n);
    for (const double eps : {1e-1, 1e-2, 1e-3}) consider_log(eps * g);
  }

  if (best_g.size() == n) {
    auto objective = [&](const Eigen::VectorXd& y) {
      Eigen::VectorXd g(n);
      g[0] = 0.0;
      g.tail(n - 1) = y;
      return ratio_of_density(density_from_log(g));
    };
    NelderMeadOptions opts;
    opts.max_iters = 400;
    const Eigen::VectorXd y0 = (best_g.tail(n - 1).array() - best_g[0]).matrix();
    const Eigen::VectorXd yb = nelder_mead(objective, y0, opts);
    Eigen::VectorXd g(n);
    g[0] = 0.0;
    g.tail(n - 1) = yb;
    consider_log(g);
  }
  if (!std::isfinite(best))
    throw std::runtime_error("estimate_mlsi: all sampled densities were degenerate");
  return best;
}

nlohmann::json trace_report_json(const SemigroupTrace& trace) {
  nlohmann::json j;
  j["times"] = trace.times;
  j["entropy"] = trace.entropy;
  std::vector<double> fisher;
  fisher.reserve(trace.fisher.size());
  for (double v : trace.fisher) fisher.push_back(v);
  j["fisher"] = fisher;
  return j;
}

std::string trace_to_csv(const SemigroupTrace& trace) {
  std::ostringstream os;
  os.precision(17);
  os << "t";
  if (!trace.densities.empty())
    for (int x = 0; x < trace.densities.front().size(); ++x) os << ",f" << x;
  os << ",H,I\n";
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    os << trace.times[i];
    for (int x = 0; x < trace.densities[i].size(); ++x) os << "," << trace.densities[i][x];
    os << "," << trace.entropy[i] << "," << trace.fisher[i] << "\n";
  }
  return os.str();
}

}  // namespace curvlab
