#include <cmath>
#include <vector>

#include "curvlab/chain.hpp"
#include "curvlab/gamma_ops.hpp"
#include "curvlab/lattice.hpp"
#include "curvlab/rng.hpp"
#include "curvlab/semigroup.hpp"
#include "doctest.h"

using namespace curvlab;

namespace {

std::vector<double> logspace(double a, double b, int n) {
  std::vector<double> out(n);
  const double la = std::log(a), lb = std::log(b);
  for (int i = 0; i < n; ++i) out[i] = std::exp(la + (lb - la) * i / (n - 1));
  return out;
}

Eigen::VectorXd bump_u0(int M, double amp, int width) {
  Eigen::VectorXd u = Eigen::VectorXd::Ones(M);
  for (int i = -width; i <= width; ++i)
    u[(M / 2 + i) % M] += amp * std::exp(-0.5 * i * i / (0.25 * width * width + 0.25));
  return u;
}

}  // namespace

TEST_SUITE_BEGIN("lattice");

TEST_CASE("kernel construction and validation") {
  CHECK_THROWS(build_lattice_kernel(1.0, 1.0, 10, 40));  // M must exceed 4J
  CHECK_THROWS(build_lattice_kernel(-1.0, 1.0, 10, 50));
  const LatticeKernel k = build_lattice_kernel(1.0, 1.0, 10, 50);
  CHECK(k.rate(3) == doctest::Approx(1.0 / 9.0));
  CHECK(k.rate(-3) == k.rate(3));
  CHECK(k.rate(0) == 0.0);
  CHECK(k.sum_rates() > 0.0);
}

TEST_CASE("second moment diagnostics separate beta = 3 from beta = 1") {
  // dyadic blocks: a convergent sum has geometrically shrinking block
  // contributions, a divergent one does not
  const LatticeDiagnostics d3a = kernel_diagnostics(build_lattice_kernel(3.0, 1.0, 50, 250), {});
  const LatticeDiagnostics d3b = kernel_diagnostics(build_lattice_kernel(3.0, 1.0, 100, 450), {});
  const double block3 = d3b.second_moment - d3a.second_moment;  // j in (50, 100]
  CHECK(block3 < 0.01 * d3b.second_moment);  // converged well before J = 100
  CHECK(block3 / d3a.second_moment_last_half < 0.7);

  const LatticeDiagnostics d1a = kernel_diagnostics(build_lattice_kernel(1.0, 1.0, 100, 450), {});
  const LatticeDiagnostics d1b = kernel_diagnostics(build_lattice_kernel(1.0, 1.0, 200, 900), {});
  CHECK(d1b.second_moment / d1a.second_moment == doctest::Approx(2.0).epsilon(0.15));  // ~linear in J
}

TEST_CASE("sum k^(1-delta) convergence criterion") {
  // convergent iff (1+beta)(1-delta) > 1; dyadic block ratio discriminates
  auto block_ratio = [](double beta, double delta) {
    const LatticeDiagnostics a =
        kernel_diagnostics(build_lattice_kernel(beta, 1.0, 200, 900), std::vector<double>{delta});
    const LatticeDiagnostics b =
        kernel_diagnostics(build_lattice_kernel(beta, 1.0, 400, 1700), std::vector<double>{delta});
    const double block_low = a.sum_k_power[0] - a.sum_k_power_last_half[0];  // j <= 100 part
    (void)block_low;
    return (b.sum_k_power[0] - a.sum_k_power[0]) / a.sum_k_power_last_half[0];
  };
  CHECK(block_ratio(1.0, 0.6) > 1.0);   // (1+1)(0.4) = 0.8 < 1: divergent, blocks grow
  CHECK(block_ratio(12.0, 0.9) < 1.0);  // (13)(0.1) = 1.3 > 1: convergent, blocks shrink
}

TEST_CASE("closed-form psi2 agrees with the circulant chain") {
  const LatticeKernel kern = build_lattice_kernel(1.5, 1.0, 6, 31);
  const Chain chain = to_chain(kern);
  CounterRng rng(5);
  const Eigen::VectorXd f = rng.gaussian_vector(0, kern.M);
  const StateFunction via_chain = psi2_upsilon(chain, f);
  for (int x = 0; x < kern.M; x += 3)
    CHECK(lattice_psi2(kern, f, x) == doctest::Approx(via_chain[x]).epsilon(1e-10));
}

TEST_CASE("psi2 is pointwise nonnegative") {
  for (const double beta : {0.5, 1.0, 1.5, 3.0}) {
    const LatticeKernel kern = build_lattice_kernel(beta, 1.0, 8, 40);
    CounterRng rng(17);
    for (int s = 0; s < 50; ++s) {
      const Eigen::VectorXd f = 1.5 * rng.gaussian_vector(s, kern.M);
      for (int x = 0; x < kern.M; x += 7) CHECK(lattice_psi2(kern, f, x) >= -1e-12);
    }
  }
}

TEST_CASE("translation invariance") {
  const LatticeKernel kern = build_lattice_kernel(1.0, 1.0, 5, 24);
  CounterRng rng(29);
  const Eigen::VectorXd f = rng.gaussian_vector(0, kern.M);
  Eigen::VectorXd shifted(kern.M);
  const int shift = 7;
  for (int i = 0; i < kern.M; ++i) shifted[(i + shift) % kern.M] = f[i];
  for (int x = 0; x < kern.M; ++x)
    CHECK(lattice_psi2(kern, shifted, (x + shift) % kern.M) ==
          doctest::Approx(lattice_psi2(kern, f, x)).epsilon(1e-13));
}

TEST_CASE("linear ramps have vanishing second differences") {
  const LatticeKernel kern = build_lattice_kernel(1.0, 1.0, 8, 64);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(64);
  for (int i = 16; i <= 48; ++i) f[i] = 0.31 * (i - 32);  // linear in the middle
  f.head(16).setConstant(f[16]);
  f.tail(15).setConstant(f[48]);
  CHECK(std::abs(lattice_psi2(kern, f, 32)) <= 1e-13);
}

TEST_CASE("classical CD at the origin, beta = 3 versus beta = 1") {
  const LatticeKernel k3 = build_lattice_kernel(3.0, 1.0, 60, 250);
  const LatticeCdReport r3 = check_classical_cd(k3, 1e4);
  CHECK(r3.holds);
  CHECK(r3.min_eigenvalue >= -1e-12);

  // truncated beta = 1 kernels satisfy CD(0,d) for d above roughly 5.8 and
  // fail below it; the witness is genuine in the failing regime
  const LatticeKernel k1 = build_lattice_kernel(1.0, 1.0, 60, 250);
  CHECK(check_classical_cd(k1, 10.0).holds);
  const LatticeCdReport fail = check_classical_cd(k1, 4.0);
  CHECK_FALSE(fail.holds);
  REQUIRE(fail.witness.size() == 4 * 60 + 1);

  // independent evaluation of the witness quadratic form on the torus chain
  const int M = k1.M, off = 2 * k1.J;
  Eigen::VectorXd f = Eigen::VectorXd::Zero(M);
  for (int i = -2 * k1.J; i <= 2 * k1.J; ++i) f[((i % M) + M) % M] = fail.witness[off + i];
  const Chain chain = to_chain(k1);
  const double g2 = carre_du_champ2(chain, f)[0];
  const double lf = apply_generator(chain, f)[0];
  const double val = g2 - lf * lf / 4.0;
  CHECK(val == doctest::Approx(fail.min_eigenvalue).epsilon(1e-6));
  CHECK(val < 0.0);
}

TEST_CASE("dropping the dimension term cannot lower the form") {
  const LatticeKernel k = build_lattice_kernel(1.0, 1.0, 20, 90);
  const double tight = check_classical_cd(k, 3.0).min_eigenvalue;
  const double loose = check_classical_cd(k, 1e15).min_eigenvalue;
  CHECK(loose >= tight - 1e-14);
}

TEST_CASE("li-yau and harnack hold with a fitted envelope, beta = 1") {
  const LatticeKernel kern = build_lattice_kernel(1.0, 1.0, 30, 130);
  const CdFunction F = fit_cd_function(kern, 1500, 11);
  F.validate();
  const RelaxationProfile phi = solve_relaxation(F, 5e-3, 12.0, 1e-6);

  const Eigen::VectorXd u0 = bump_u0(kern.M, 1.0, 4);
  const std::vector<double> times = logspace(0.01, 10.0, 16);
  const LiYauReport rep = li_yau_check(kern, u0, phi, times);
  CHECK(rep.violations == 0);
  CHECK(rep.worst_slack >= 0.0);

  CounterRng rng(31);
  std::vector<HarnackPair> pairs;
  for (int i = 0; i < 40; ++i) {
    HarnackPair p;
    p.t1 = (i < 8) ? 0.0 : 10.0 * rng.uniform(1, i);
    p.t2 = p.t1 + 0.05 + (11.0 - p.t1 - 0.05) * rng.uniform(2, i);
    p.x1 = static_cast<int>(kern.M * rng.uniform(3, i)) % kern.M;
    p.x2 = static_cast<int>(kern.M * rng.uniform(4, i)) % kern.M;
    pairs.push_back(p);
  }
  const HarnackReport h = harnack_check(kern, u0, phi, pairs);
  CHECK(h.min_residual >= 0.0);
}

TEST_CASE("harnack exponent selection at beta = 1.5") {
  // min(1+beta, 2) = 2 must be selected; the 1+beta variant would differ
  const LatticeKernel kern = build_lattice_kernel(1.5, 1.0, 12, 60);
  const CdFunction F = fit_cd_function(kern, 800, 13);
  const RelaxationProfile phi = solve_relaxation(F, 5e-3, 6.0, 1e-6);
  const Eigen::VectorXd u0 = bump_u0(kern.M, 0.8, 3);
  HarnackPair p{0.5, 5, 1.0, 25};
  const HarnackReport rep = harnack_check(kern, u0, phi, {&p, 1});
  // residual computed with exponent 2
  const double dist = std::min(std::abs(p.x1 - p.x2), kern.M - std::abs(p.x1 - p.x2));
  const double integral = integrate_relaxation(phi, p.t1, p.t2);
  const Chain chain = to_chain(kern);
  const Eigen::VectorXd u1 = propagate(chain, u0, p.t1);
  const Eigen::VectorXd u2 = propagate(chain, u0, p.t2);
  const double res2 = std::log(u2[p.x2]) + integral + 2.0 * std::pow(dist, 2.0) / (p.t2 - p.t1) -
                      std::log(u1[p.x1]);
  const double res_beta = std::log(u2[p.x2]) + integral +
                          2.0 * std::pow(dist, 2.5) / (p.t2 - p.t1) - std::log(u1[p.x1]);
  CHECK(rep.residuals[0] == doctest::Approx(res2).epsilon(1e-12));
  CHECK(std::abs(rep.residuals[0] - res_beta) > 1.0);
}

TEST_CASE("envelope exponents at desk-scale truncation") {
  // beta = 3: the quadratic floor is genuine (CD(0,d) holds), gamma_hat ~ 2.
  const CdFunction f3 = fit_cd_function(build_lattice_kernel(3.0, 1.0, 40, 170), 2000, 17);
  CHECK(f3.small_x_exponent() > 1.5);
  CHECK(f3.small_x_exponent() < 2.5);
  // beta = 1: the truncated kernel still shows the quadratic branch
  // (the cubic regime of the untruncated lattice is a long-range effect).
  const CdFunction f1 = fit_cd_function(build_lattice_kernel(1.0, 1.0, 40, 170), 2000, 17);
  CHECK(f1.small_x_exponent() > 1.2);
  CHECK(f1.small_x_exponent() < 2.6);
}

TEST_CASE("solutions stay positive and conserve mass") {
  const LatticeKernel kern = build_lattice_kernel(0.5, 1.0, 10, 44);
  const Chain chain = to_chain(kern);
  const Eigen::VectorXd u0 = bump_u0(kern.M, 2.0, 3);
  const double mass0 = u0.sum();
  Eigen::VectorXd u = u0;
  for (const double t : {0.1, 1.0, 5.0}) {
    u = propagate(chain, u0, t);
    CHECK(u.minCoeff() > 0.0);
    CHECK(u.sum() == doctest::Approx(mass0).epsilon(1e-10));
  }
}

TEST_SUITE_END();
