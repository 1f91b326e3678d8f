#include "curvlab/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "curvlab/quadrature.hpp"

namespace curvlab {

namespace detail {

// Cumulative table of T_M(phi) = integral_phi^M ds/F(s) over log-spaced
// nodes. Inversion of T_M gives phi; the blow-up end is realized by pushing
// M upward until the inverted values stabilize.
class RelaxationTable {
 public:
  RelaxationTable(const CdFunction& F, double phi_lo, double M, int nodes_per_decade)
      : F_(F) {
    const double llo = std::log(phi_lo), lhi = std::log(M);
    const int n = std::max(3, static_cast<int>(std::ceil((lhi - llo) / std::log(10.0) * nodes_per_decade)));
    lnodes_.resize(n + 1);
    for (int i = 0; i <= n; ++i) lnodes_[i] = llo + (lhi - llo) * i / n;
    cum_.assign(n + 1, 0.0);
    for (int i = n - 1; i >= 0; --i)
      cum_[i] = cum_[i + 1] + segment(lnodes_[i], lnodes_[i + 1]);
  }

  double t_of_phi(double phi) const {
    const double lp = std::log(phi);
    const auto it = std::upper_bound(lnodes_.begin(), lnodes_.end(), lp);
    if (it == lnodes_.begin()) return cum_.front() + segment(lp, lnodes_.front());
    if (it == lnodes_.end()) return 0.0;
    const std::size_t i = static_cast<std::size_t>(it - lnodes_.begin());
    return cum_[i] + segment(lp, lnodes_[i]);
  }

  double total() const { return cum_.front(); }
  double phi_lo() const { return std::exp(lnodes_.front()); }
  double M() const { return std::exp(lnodes_.back()); }

  // monotone inversion by bisection in log phi
  double phi_of_t(double t) const {
    double lo = lnodes_.front(), hi = lnodes_.back();
    if (t >= t_of_phi(std::exp(lo)))
      throw std::runtime_error("relaxation: inversion target below table range");
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (t_of_phi(std::exp(mid)) > t)
        lo = mid;
      else
        hi = mid;
      if (hi - lo < 1e-15 * std::max(1.0, std::abs(hi))) break;
    }
    return std::exp(0.5 * (lo + hi));
  }

 private:
  double segment(double la, double lb) const {
    // integral of ds/F(s) with s = e^u
    return gauss_legendre([this](double u) { const double s = std::exp(u); return s / F_(s); },
                          la, lb, 16);
  }

  CdFunction F_;
  std::vector<double> lnodes_;
  std::vector<double> cum_;
};

}  // namespace detail

namespace {

AsymptoticTag fit_tag(const std::vector<double>& t, const std::vector<double>& phi,
                      std::size_t begin, std::size_t end) {
  // least squares of both candidate models in x = log(1/t)
  double sx = 0, sxx = 0, sy1 = 0, sxy1 = 0, sy2 = 0, sxy2 = 0;
  const int n = static_cast<int>(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    const double x = -std::log(t[i]);
    sx += x;
    sxx += x * x;
    sy1 += phi[i];
    sxy1 += x * phi[i];
    sy2 += std::log(phi[i]);
    sxy2 += x * std::log(phi[i]);
  }
  const double den = n * sxx - sx * sx;
  const double c_log = (n * sxy1 - sx * sy1) / den;
  const double b_log = (sy1 - c_log * sx) / n;
  const double p_pow = (n * sxy2 - sx * sy2) / den;
  const double q_pow = (sy2 - p_pow * sx) / n;

  double r_log = 0, r_pow = 0;
  for (std::size_t i = begin; i < end; ++i) {
    const double x = -std::log(t[i]);
    const double m1 = c_log * x + b_log;
    const double m2 = std::exp(q_pow + p_pow * x);
    r_log += std::pow((m1 - phi[i]) / phi[i], 2);
    r_pow += std::pow((m2 - phi[i]) / phi[i], 2);
  }
  r_log = std::sqrt(r_log / n);
  r_pow = std::sqrt(r_pow / n);

  AsymptoticTag tag;
  if (r_log < r_pow) {
    tag.kind = AsymptoticTag::Kind::LogType;
    tag.c = c_log;
    tag.b = b_log;
    tag.relative_rms = r_log;
  } else {
    tag.kind = AsymptoticTag::Kind::PowerType;
    tag.c = std::exp(q_pow);
    tag.p = p_pow;
    tag.relative_rms = r_pow;
  }
  return tag;
}

}  // namespace

double RelaxationProfile::eval(double tt) const {
  if (!table) throw std::runtime_error("relaxation profile has no evaluation table");
  if (tt < t.front() * (1.0 - 1e-12) || tt > t.back() * (1.0 + 1e-12))
    throw std::out_of_range("relaxation profile evaluated outside its range");
  return table->phi_of_t(tt);
}

RelaxationProfile solve_relaxation(const CdFunction& F, double t_min, double t_max,
                                   double tol, int grid_points) {
  if (!(t_min > 0.0) || !(t_max > t_min)) throw std::invalid_argument("need 0 < t_min < t_max");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  F.validate();

  const int kNodesPerDecade = 160;
  const int kMaxDoublings = 90;

  // lower table end: extend until T exceeds t_max with margin
  double phi_lo = 1e-4;
  double M = 16.0;
  auto build = [&](double lo, double m) {
    return std::make_shared<detail::RelaxationTable>(F, lo, m, kNodesPerDecade);
  };
  std::shared_ptr<detail::RelaxationTable> table = build(phi_lo, M);
  while (table->total() < 1.25 * t_max) {
    phi_lo *= 0.125;
    if (phi_lo < 1e-280) throw std::runtime_error("relaxation: phi underflow extending table");
    table = build(phi_lo, M);
  }

  double prev = table->phi_of_t(t_min);
  int doublings = 0;
  for (; doublings < kMaxDoublings; ++doublings) {
    M *= 2.0;
    table = build(phi_lo, M);
    const double cur = table->phi_of_t(t_min);
    const double change = std::abs(cur - prev) / std::max(cur, 1e-300);
    prev = cur;
    if (change < 0.25 * tol) break;
  }
  if (doublings == kMaxDoublings)
    throw std::runtime_error("relaxation: tol not reached within the M-doubling budget");

  RelaxationProfile p;
  p.F = F;
  p.tol = tol;
  p.M_final = M;
  p.doublings = doublings;
  p.table = table;
  p.t.resize(grid_points);
  p.phi.resize(grid_points);
  const double l0 = std::log(t_min), l1 = std::log(t_max);
  for (int i = 0; i < grid_points; ++i) {
    p.t[i] = std::exp(l0 + (l1 - l0) * i / (grid_points - 1));
    p.phi[i] = table->phi_of_t(p.t[i]);
  }

  // asymptotic tags on the outer decades of the grid
  std::size_t lo_end = 1;
  while (lo_end < p.t.size() && p.t[lo_end] < 10.0 * t_min) ++lo_end;
  lo_end = std::max<std::size_t>(lo_end, 8);
  std::size_t hi_begin = p.t.size() - 2;
  while (hi_begin > 0 && p.t[hi_begin] > 0.1 * t_max) --hi_begin;
  hi_begin = std::min(hi_begin, p.t.size() - 8);
  p.small_t = fit_tag(p.t, p.phi, 0, lo_end);
  p.large_t = fit_tag(p.t, p.phi, hi_begin, p.t.size());
  return p;
}

double integrate_relaxation(const RelaxationProfile& p, double t1, double t2) {
  if (!(t1 >= 0.0) || !(t2 > t1)) throw std::invalid_argument("need 0 <= t1 < t2");
  const double t_min = p.t.front(), t_max = p.t.back();
  if (t2 > t_max * (1.0 + 1e-12)) throw std::invalid_argument("t2 beyond the solved profile range");

  double total = 0.0;
  // piece below the solved range: analytic integral of the fitted tag
  if (t1 < t_min) {
    const double a = t1, b = std::min(t2, t_min);
    const AsymptoticTag& tag = p.small_t;
    if (tag.kind == AsymptoticTag::Kind::LogType) {
      // integral of c*log(1/s) + b0 is c*s*(1 + log(1/s)) + b0*s
      auto prim = [&](double s) {
        return s == 0.0 ? 0.0 : tag.c * s * (1.0 - std::log(s)) + tag.b * s;
      };
      total += prim(b) - prim(a);
    } else {
      if (tag.p >= 1.0 - 1e-6) {  // fitted exponents hover around exact values
        if (a == 0.0) return std::numeric_limits<double>::infinity();
        if (std::abs(tag.p - 1.0) < 1e-6)
          total += tag.c * std::log(b / a);
        else
          total += tag.c / (1.0 - tag.p) * (std::pow(b, 1.0 - tag.p) - std::pow(a, 1.0 - tag.p));
      } else {
        total += tag.c / (1.0 - tag.p) * (std::pow(b, 1.0 - tag.p) - std::pow(a, 1.0 - tag.p));
      }
    }
  }
  // piece on the solved range: quadrature against the table
  const double a = std::max(t1, t_min), b = std::min(t2, t_max);
  if (b > a)
    total += adaptive_quadrature([&](double s) { return p.eval(s); }, a, b,
                                 1e-10 * std::max(1.0, (b - a) * p.eval(a)));
  return total;
}

nlohmann::json RelaxationProfile::metadata_json() const {
  auto tag_json = [](const AsymptoticTag& tag) {
    nlohmann::json j;
    if (tag.kind == AsymptoticTag::Kind::LogType) {
      j["kind"] = "log";
      j["c"] = tag.c;
      j["b"] = tag.b;
    } else {
      j["kind"] = "power";
      j["c"] = tag.c;
      j["p"] = tag.p;
    }
    j["relative_rms"] = tag.relative_rms;
    return j;
  };
  nlohmann::json j;
  j["family"] = F.to_json();
  j["small_t_tag"] = tag_json(small_t);
  j["large_t_tag"] = tag_json(large_t);
  j["tol"] = tol;
  j["M_final"] = M_final;
  j["doublings"] = doublings;
  return j;
}

}  // namespace curvlab
