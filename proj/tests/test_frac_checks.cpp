#include <cmath>

#include "curvlab/frac_checks.hpp"
#include "curvlab/nonlocal.hpp"
#include "curvlab/rng.hpp"
#include "doctest.h"

using namespace curvlab;

TEST_SUITE_BEGIN("frac_checks");

TEST_CASE("li-yau functional of the Cauchy kernel is t-invariant") {
  const std::vector<double> ts = {0.5, 1.0, 2.0};
  const ClyReport rep = estimate_cly(1.0, ts, 14.0, 0.02);
  REQUIRE(rep.S.size() == 3);
  for (const double s : rep.S) {
    CHECK(s > 0.0);
    CHECK(std::isfinite(s));
    CHECK(std::abs(s - rep.S[0]) <= 0.01 * rep.S[0]);
  }
  // T(t) = sup |x^2 - t^2| / (x^2 + t^2) = 1 for the Cauchy kernel
  for (const double tt : rep.T) CHECK(tt == doctest::Approx(1.0).epsilon(0.01));
  for (const double d : rep.better_dh) {
    CHECK(std::isfinite(d));
    CHECK(std::abs(d - rep.better_dh[0]) <= 0.01 * rep.better_dh[0]);
  }
  CHECK(rep.C_LY_hat == doctest::Approx(rep.S[0]).epsilon(0.011));
}

TEST_CASE("harnack fit on the kernel itself") {
  const std::vector<double> ts = {0.5, 1.0, 2.0};
  const SolutionFamily fam = kernel_solution(1.0, ts, 12.0, 0.02);
  const ClyReport cly = estimate_cly(1.0, ts, 12.0, 0.02);
  std::vector<FracHarnackPair> pairs = {{0.5, 0.0, 1.0, 0.0},
                                        {0.5, 0.0, 2.0, 0.0},
                                        {1.0, 0.0, 2.0, 0.0},
                                        {0.5, -1.0, 1.0, 2.0},
                                        {0.5, 3.0, 2.0, -4.0}};
  const FracHarnackReport rep = harnack_fit(1.0, cly.C_LY_hat, pairs, fam);
  CHECK(rep.C_fit >= 0.0);
  CHECK(rep.C_fit < 10.0);  // the kernel itself needs only a small C
  for (const double r : rep.residual_at_fit) CHECK(r >= -1e-12);
  // same-point nested times are already covered by the (t2/t1)^{C_LY} factor
  CHECK(rep.per_pair_C[0] == 0.0);
}

TEST_CASE("harnack fit on a synthetic constant solution needs C = 0") {
  SolutionFamily fam;
  for (const double t : {0.5, 1.0}) {
    FracKernelGrid g;
    g.beta = 1.0;
    g.t = t;
    g.h = 0.1;
    g.X = 5.0;
    g.x = Eigen::VectorXd::LinSpaced(101, -5.0, 5.0);
    g.G = Eigen::VectorXd::Constant(101, 3.0);
    fam.emplace(t, g);
  }
  const std::vector<FracHarnackPair> pairs = {{0.5, -2.0, 1.0, 2.0}, {0.5, 0.0, 1.0, 0.0}};
  const FracHarnackReport rep = harnack_fit(1.0, 1.3, pairs, fam);
  CHECK(rep.C_fit == 0.0);
}

TEST_CASE("harnack fit rejects bad pairs") {
  const std::vector<double> ts = {0.5, 1.0};
  const SolutionFamily fam = kernel_solution(1.0, ts, 8.0, 0.05);
  const std::vector<FracHarnackPair> bad = {{1.0, 0.0, 0.5, 0.0}};
  CHECK_THROWS(harnack_fit(1.0, 1.0, bad, fam));
  const std::vector<FracHarnackPair> zero_t = {{0.0, 0.0, 0.5, 0.0}};
  CHECK_THROWS(harnack_fit(1.0, 1.0, zero_t, fam));
}

TEST_CASE("reduction inequality holds with shared-node discretization") {
  const FracKernelGrid H = frac_kernel(1.0, 1.0, 16.0, 0.04);
  const int n = H.n(), center = (n - 1) / 2;
  const int y_stride = std::max(1, n / 160);
  int n_y = 0;
  for (int i = center - center / 4; i <= center + center / 4; i += y_stride) ++n_y;

  CounterRng rng(3);
  Eigen::MatrixXd weights(10, n_y);
  for (int s = 0; s < 10; ++s)
    for (int j = 0; j < n_y; ++j) weights(s, j) = 0.1 + rng.uniform(s, j);

  std::vector<int> xs;
  for (int i = 0; i < 20; ++i) xs.push_back(center - center / 8 + i * (center / 4) / 19);

  const ReductionReport rep = reduction_inequality_check(1.0, H, weights, xs);
  CHECK(rep.evaluations == 200);
  CHECK(rep.min_slack >= -1e-6);
  CHECK(rep.min_slack_classical >= -1e-12);
}

TEST_CASE("reduction check with a point mass is tight") {
  const FracKernelGrid H = frac_kernel(1.0, 1.0, 16.0, 0.04);
  const int n = H.n(), center = (n - 1) / 2;
  const int y_stride = std::max(1, n / 160);
  int n_y = 0;
  for (int i = center - center / 4; i <= center + center / 4; i += y_stride) ++n_y;
  Eigen::MatrixXd weights = Eigen::MatrixXd::Constant(1, n_y, 1e-9);
  weights(0, n_y / 2) = 1.0;
  const std::vector<int> xs = {center};
  const ReductionReport rep = reduction_inequality_check(1.0, H, weights, xs);
  CHECK(rep.min_slack >= -1e-9);
  CHECK(rep.min_slack <= 1e-3);  // Jensen is near-equality for a point mass
}

TEST_CASE("zero function is not a counterexample certificate") {
  GridFunction u;
  u.x0 = -4.0;
  u.h = 0.1;
  u.v = Eigen::VectorXd::Zero(81);
  u.tail = TailModel::zero();
  const CounterexampleReport rep = verify_cd_counterexample(1.0, u, 0.0, 1.0, 1.0, 5);
  CHECK_FALSE(rep.certificate);
  for (const CounterexamplePoint& p : rep.points)
    CHECK(p.verdict == CounterexamplePoint::Verdict::Fails);
}

TEST_CASE("single-bump report matches a brute-force double quadrature") {
  GridFunction u;
  u.x0 = -6.0;
  u.h = 0.05;
  const int n = 241;
  u.v.resize(n);
  for (int i = 0; i < n; ++i) {
    const double y = u.x0 + i * u.h;
    u.v[i] = std::abs(y) < 1.0 ? std::exp(-1.0 / (1.0 - y * y)) : 0.0;
  }
  u.tail = TailModel::zero();

  const double beta = 1.0;
  const CounterexampleReport rep = verify_cd_counterexample(beta, u, 0.0, 1.0, 0.8, 3);

  // independent oracle: midpoint double sum on a fine lattice
  auto u_at = [&](double y) {
    return std::abs(y) < 1.0 ? std::exp(-1.0 / (1.0 - y * y)) : 0.0;
  };
  const double c = frac_laplacian_norm(beta);
  for (const CounterexamplePoint& p : rep.points) {
    const double x = p.x;
    const double hq = 0.02, span = 9.0;
    const int m = static_cast<int>(2 * span / hq);
    double g2 = 0.0, g1 = 0.0, lu = 0.0;
    for (int a = 0; a < m; ++a) {
      const double hh = -span + (a + 0.5) * hq;
      const double dab = u_at(x + hh) - u_at(x);
      g1 += dab * dab / std::pow(std::abs(hh), 1.0 + beta) * hq;
      lu += dab / std::pow(std::abs(hh), 1.0 + beta) * hq;
      for (int b = 0; b < m; ++b) {
        const double ss = -span + (b + 0.5) * hq;
        const double D = u_at(x + hh + ss) - u_at(x + hh) - u_at(x + ss) + u_at(x);
        g2 += D * D / std::pow(std::abs(hh) * std::abs(ss), 1.0 + beta) * hq * hq;
      }
    }
    g1 *= c;
    lu *= c;
    g2 *= c * c;
    CHECK(p.gamma == doctest::Approx(g1).epsilon(0.02));
    CHECK(p.lu == doctest::Approx(lu).epsilon(0.05));
    CHECK(p.gamma2 == doctest::Approx(g2).epsilon(0.03));
    const double rhs = lu * lu;  // kappa = 0, N = 1
    const bool oracle_holds = g2 > 0.0 && g2 < rhs;
    CHECK((p.verdict == CounterexamplePoint::Verdict::Holds) == oracle_holds);
  }
}

TEST_CASE("certificate classification is scale-invariant under u -> 2u at kappa = 0") {
  GridFunction u;
  u.x0 = -5.0;
  u.h = 0.05;
  const int n = 201;
  u.v.resize(n);
  for (int i = 0; i < n; ++i) {
    const double y = u.x0 + i * u.h;
    u.v[i] = std::abs(y) < 1.5 ? std::exp(-1.0 / (1.0 - y * y / 2.25)) : 0.0;
  }
  u.tail = TailModel::zero();
  const CounterexampleReport a = verify_cd_counterexample(1.2, u, 0.0, 2.0, 1.0, 4);
  GridFunction u2 = u;
  u2.v *= 2.0;
  const CounterexampleReport b = verify_cd_counterexample(1.2, u2, 0.0, 2.0, 1.0, 4);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].verdict == b.points[i].verdict);
    CHECK(b.points[i].gamma2 == doctest::Approx(4.0 * a.points[i].gamma2).epsilon(1e-9));
  }
  CHECK(a.certificate == b.certificate);
}

TEST_SUITE_END();
