#include "curvlab/nonlocal.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "curvlab/frac_kernel.hpp"
#include "curvlab/gamma_ops.hpp"
#include "curvlab/quadrature.hpp"

namespace curvlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

double apply_kind(NonlocalKind kind, double diff) {
  switch (kind) {
    case NonlocalKind::FracLaplacian:
      return diff;
    case NonlocalKind::PsiUpsilon:
      return upsilon(diff);
    case NonlocalKind::SquaredDiff:
      return diff * diff;
  }
  return 0.0;
}

// inverse Vandermonde for the 9-point stencil tau in {-4..4}
const Eigen::Matrix<double, 9, 9>& stencil_inverse() {
  static const Eigen::Matrix<double, 9, 9> inv = [] {
    Eigen::Matrix<double, 9, 9> v;
    for (int r = 0; r < 9; ++r) {
      const double tau = r - 4.0;
      double p = 1.0;
      for (int c = 0; c < 9; ++c) {
        v(r, c) = p;
        p *= tau;
      }
    }
    return Eigen::Matrix<double, 9, 9>(v.fullPivLu().inverse());
  }();
  return inv;
}

}  // namespace

TailModel TailModel::constant(double a) { return {Kind::Constant, a, 0, 0}; }
TailModel TailModel::log_power(double slope, double intercept) {
  return {Kind::LogPower, slope, intercept, 0};
}
TailModel TailModel::power(double amplitude, double exponent) {
  return {Kind::Power, amplitude, exponent, 0};
}
TailModel TailModel::trig(double amplitude, double freq, double phase) {
  return {Kind::Trig, amplitude, freq, phase};
}

double TailModel::eval(double y) const {
  switch (kind) {
    case Kind::Zero:
      return 0.0;
    case Kind::Constant:
      return a;
    case Kind::LogPower:
      return a * std::log(std::abs(y)) + b;
    case Kind::Power:
      return a * std::pow(std::abs(y), -b);
    case Kind::Trig:
      return a * std::cos(b * y + c);
  }
  return 0.0;
}

NonlocalEvaluator::NonlocalEvaluator(GridFunction v, double beta) : v_(std::move(v)), beta_(beta) {
  if (!(beta_ > 0.0) || !(beta_ < 2.0)) throw std::invalid_argument("beta must lie in (0,2)");
  if (v_.n() < 2 * kMargin + 1) throw std::invalid_argument("grid too small for nonlocal evaluation");
  c_ = frac_laplacian_norm(beta_);
}

const std::vector<double>& NonlocalEvaluator::moments0(int stride) const {
  auto& mu = mu0_[stride];
  if (mu.empty()) {
    const double he = stride * v_.h;
    const int cells = v_.n() / stride + 2;
    mu.resize(cells);
    for (int j = 1; j < cells; ++j)
      mu[j] = (std::pow(j * he, -beta_) - std::pow((j + 1) * he, -beta_)) / beta_;
  }
  return mu;
}

const std::vector<double>& NonlocalEvaluator::moments1(int stride) const {
  auto& mu = mu1_[stride];
  if (mu.empty()) {
    const double he = stride * v_.h;
    const int cells = v_.n() / stride + 2;
    mu.resize(cells);
    for (int j = 1; j < cells; ++j) {
      if (std::abs(beta_ - 1.0) < 1e-13)
        mu[j] = std::log(static_cast<double>(j + 1) / j);
      else
        mu[j] = (std::pow(j * he, 1.0 - beta_) - std::pow((j + 1) * he, 1.0 - beta_)) / (beta_ - 1.0);
    }
  }
  return mu;
}

double NonlocalEvaluator::inner_zone(int xi, NonlocalKind kind, int stride) const {
  const double he = stride * v_.h;
  // local degree-8 interpolant through x +/- {0..4} he
  Eigen::Matrix<double, 9, 1> vals;
  for (int r = 0; r < 9; ++r) vals[r] = v_.v[xi + (r - 4) * stride];
  const Eigen::Matrix<double, 9, 1> a = stencil_inverse() * vals;

  if (kind == NonlocalKind::FracLaplacian) {
    // D(s) = p(tau) + p(-tau) - 2p(0) = 2 sum a_{2m} tau^{2m}; exact moments
    double total = 0.0;
    for (int m = 1; m <= 4; ++m)
      total += 2.0 * a[2 * m] * std::pow(he, -beta_) * std::pow(4.0, 2 * m - beta_) / (2 * m - beta_);
    return total;
  }

  // u = s^{2-beta} substitution; E(s)/s^2 stays bounded at 0
  const double p0 = a[0];
  auto p_at = [&](double tau) {
    double acc = a[8];
    for (int c = 7; c >= 0; --c) acc = acc * tau + a[c];
    return acc;
  };
  const double expo = 2.0 - beta_;
  const double U = std::pow(4.0 * he, expo);
  auto g = [&](double u) {
    const double s = std::pow(u, 1.0 / expo);
    const double tau = s / he;
    const double e = apply_kind(kind, p_at(tau) - p0) + apply_kind(kind, p_at(-tau) - p0);
    return e / (s * s) / expo;
  };
  return gauss_legendre(g, 0.0, U, 20);
}

// Product-Simpson over cell pairs: exact kernel moments against the local
// quadratic through three numerator nodes. Second-order uniformly; the cells
// adjoining r0 = 4h carry most of the kernel mass, so per-cell exactness in
// the kernel is what keeps the order.
double NonlocalEvaluator::middle_zone(int xi, NonlocalKind kind, int stride) const {
  const double he = stride * v_.h;
  const double vx = v_.v[xi];
  const bool beta_is_one = std::abs(beta_ - 1.0) < 1e-13;
  double total = 0.0;
  for (const int dir : {+1, -1}) {
    const int cells_avail = dir > 0 ? (v_.n() - 1 - xi) / stride : xi / stride;
    int j = 4;
    for (; j + 2 <= cells_avail; j += 2) {
      const double s0 = j * he, s2 = (j + 2) * he;
      const double M0 = (std::pow(s0, -beta_) - std::pow(s2, -beta_)) / beta_;
      const double T1 = beta_is_one ? std::log(s2 / s0)
                                    : (std::pow(s0, 1.0 - beta_) - std::pow(s2, 1.0 - beta_)) / (beta_ - 1.0);
      const double T2 = (std::pow(s2, 2.0 - beta_) - std::pow(s0, 2.0 - beta_)) / (2.0 - beta_);
      const double M1 = T1 - s0 * M0;
      const double M2 = T2 - 2.0 * s0 * T1 + s0 * s0 * M0;
      const double h2 = he * he;
      const double w0 = (M2 - 3.0 * he * M1 + 2.0 * h2 * M0) / (2.0 * h2);
      const double w1 = (2.0 * he * M1 - M2) / h2;
      const double w2 = (M2 - he * M1) / (2.0 * h2);
      const double g0 = apply_kind(kind, v_.v[xi + dir * j * stride] - vx);
      const double g1 = apply_kind(kind, v_.v[xi + dir * (j + 1) * stride] - vx);
      const double g2 = apply_kind(kind, v_.v[xi + dir * (j + 2) * stride] - vx);
      total += w0 * g0 + w1 * g1 + w2 * g2;
    }
    if (j < cells_avail) {  // odd leftover cell at the far end: trapezoid
      const std::vector<double>& m0 = moments0(stride);
      const std::vector<double>& m1 = moments1(stride);
      const double ga = apply_kind(kind, v_.v[xi + dir * j * stride] - vx);
      const double gb = apply_kind(kind, v_.v[xi + dir * (j + 1) * stride] - vx);
      const double wa = ((j + 1) * he * m0[j] - m1[j]) / he;
      const double wb = (m1[j] - j * he * m0[j]) / he;
      total += wa * ga + wb * gb;
    }
  }
  return total;
}

double NonlocalEvaluator::tail_integral(double vx, double xc, int sign, double R,
                                        NonlocalKind kind) const {
  const TailModel& tail = v_.tail;
  switch (tail.kind) {
    case TailModel::Kind::Zero:
      return apply_kind(kind, -vx) * std::pow(R, -beta_) / beta_;
    case TailModel::Kind::Constant:
      return apply_kind(kind, tail.a - vx) * std::pow(R, -beta_) / beta_;
    case TailModel::Kind::LogPower:
    case TailModel::Kind::Power: {
      // u = s^{-beta}: integral (1/beta) int_0^{R^{-beta}} f(v(x + sign s(u)) - vx) du
      const double U = std::pow(R, -beta_);
      auto g = [&](double u) {
        const double s = std::pow(u, -1.0 / beta_);
        return apply_kind(kind, tail.eval(xc + sign * s) - vx);
      };
      double total = 0.0;
      double hi = U;
      for (int m = 0; m < 54; ++m) {
        const double lo = hi * 0.5;
        total += gauss_legendre(g, lo, hi, 8);
        hi = lo;
      }
      total += g(0.5 * hi) * hi;  // stub: slowly varying integrand
      return total / beta_;
    }
    case TailModel::Kind::Trig: {
      if (kind == NonlocalKind::FracLaplacian) {
        // constant part analytic; oscillatory part by half-period panels with
        // repeated averaging of the partial sums (near-alternating series)
        const double total = -vx * std::pow(R, -beta_) / beta_;
        const double w = tail.b;
        auto g = [&](double s) {
          return tail.a * std::cos(w * (xc + sign * s) + tail.c) * std::pow(s, -1.0 - beta_);
        };
        const double half = kPi / std::abs(w);
        std::vector<double> partial;
        partial.reserve(200);
        double acc = 0.0, s0 = R;
        for (int m = 0; m < 200; ++m) {
          acc += gauss_legendre(g, s0, s0 + half, 8);
          partial.push_back(acc);
          s0 += half;
        }
        for (int lvl = 0; lvl < 10; ++lvl)
          for (std::size_t i = 0; i + 1 < partial.size(); ++i)
            partial[i] = 0.5 * (partial[i] + partial[i + 1]);
        return total + partial[0];
      }
      // nonnegative integrands: period-chunked sum with a power-law remainder
      const double w = std::abs(tail.b);
      const double period = 2.0 * kPi / w;
      auto g = [&](double s) {
        return apply_kind(kind, tail.eval(xc + sign * s) - vx) * std::pow(s, -1.0 - beta_);
      };
      double total = 0.0, chunk = 0.0, s0 = R;
      for (int m = 0; m < 300; ++m) {
        chunk = gauss_legendre(g, s0, s0 + period, 20);
        total += chunk;
        s0 += period;
        if (chunk < 1e-12 * total) break;
      }
      total += chunk * s0 / (beta_ * period);  // scale-invariant remainder estimate
      return total;
    }
  }
  return 0.0;
}

double NonlocalEvaluator::outer_zone(int xi, NonlocalKind kind, int stride) const {
  const double he = stride * v_.h;
  const double vx = v_.v[xi];
  double total = 0.0;
  for (const int dir : {+1, -1}) {
    const int cells_avail = dir > 0 ? (v_.n() - 1 - xi) / stride : xi / stride;
    const double R = cells_avail * he;
    total += tail_integral(vx, v_.x(xi), dir, R, kind);
  }
  return total;
}

double NonlocalEvaluator::eval_stride(int xi, NonlocalKind kind, int stride) const {
  const int need = 4 * stride;
  if (xi < need || xi + need >= v_.n())
    throw std::invalid_argument("evaluation point too close to the grid edge");
  const double raw = inner_zone(xi, kind, stride) + middle_zone(xi, kind, stride) +
                     outer_zone(xi, kind, stride);
  if (kind == NonlocalKind::FracLaplacian) return -c_ * raw;
  return c_ * raw;
}

NonlocalEvaluation NonlocalEvaluator::eval_with_error(int xi, NonlocalKind kind) const {
  NonlocalEvaluation out;
  out.value = eval_stride(xi, kind, 1);
  const double coarse = eval_stride(xi, kind, 2);
  out.error_estimate = std::abs(out.value - coarse) + 1e-14 * std::abs(out.value);
  return out;
}

NonlocalEvaluation nonlocal_eval(const GridFunction& v, double beta, int xi, NonlocalKind kind) {
  const NonlocalEvaluator ev(v, beta);
  return ev.eval_with_error(xi, kind);
}

}  // namespace curvlab
