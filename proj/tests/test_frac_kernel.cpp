#include <cmath>

#include "curvlab/frac_kernel.hpp"
#include "doctest.h"

using namespace curvlab;

TEST_SUITE_BEGIN("frac_kernel");

TEST_CASE("normalization constant") {
  // beta = 1 gives the Cauchy-kernel constant 1/pi
  CHECK(frac_laplacian_norm(1.0) == doctest::Approx(1.0 / M_PI).epsilon(1e-12));
  CHECK_THROWS(frac_laplacian_norm(2.0));
  CHECK_THROWS(frac_laplacian_norm(0.0));
}

TEST_CASE("beta = 1 kernel is the Cauchy density") {
  for (const double t : {0.5, 1.0, 2.0}) {
    for (const double x : {0.0, 0.3, 1.0, 4.7, 10.0}) {
      const double expect = t / (M_PI * (t * t + x * x));
      CHECK(stable_density(1.0, t, x) == doctest::Approx(expect).epsilon(1e-10));
    }
  }
}

TEST_CASE("kernel grid matches the closed form to 1e-6 relative") {
  const FracKernelGrid g = frac_kernel(1.0, 1.0, 10.0, 0.05);
  for (int i = 0; i < g.n(); ++i) {
    const double expect = 1.0 / (M_PI * (1.0 + g.x[i] * g.x[i]));
    CHECK(std::abs(g.G[i] - expect) <= 1e-6 * expect);
  }
}

TEST_CASE("near-Gaussian limit as beta approaches 2") {
  const double g0 = stable_density(1.999, 1.0, 0.0);
  const double gauss0 = 1.0 / std::sqrt(4.0 * M_PI);  // (4 pi t')^{-1/2}, t' = 1
  CHECK(std::abs(g0 - gauss0) / gauss0 < 0.01);
  const double g1 = stable_density(1.999, 1.0, 1.0);
  const double gauss1 = gauss0 * std::exp(-1.0 / 4.0);
  CHECK(std::abs(g1 - gauss1) / gauss1 < 0.01);
}

TEST_CASE("self-similarity G(t,x) = t^{-1/beta} G(1, x t^{-1/beta})") {
  for (const double beta : {0.7, 1.3, 1.8}) {
    for (const double t : {0.5, 2.0}) {
      for (const double x : {0.0, 0.9, 3.7}) {
        const double lhs = stable_density(beta, t, x);
        const double scale = std::pow(t, -1.0 / beta);
        const double rhs = scale * stable_density(beta, 1.0, x * scale);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("series agrees with quadrature in the tail region") {
  for (const double beta : {0.5, 1.0, 1.5}) {
    for (const double x : {8.0, 15.0}) {
      double err = 0.0;
      const double s = stable_density_series(beta, 1.0, x, &err);
      const double q = stable_density(beta, 1.0, x);
      CHECK(std::abs(s - q) <= 1e-6 * q + err);
    }
  }
}

TEST_CASE("kernel mass accounting within 1e-4") {
  CHECK(frac_kernel(0.5, 1.0, 25.0, 0.005).mass_defect <= 1e-4);
  CHECK(frac_kernel(1.0, 1.0, 15.0, 0.01).mass_defect <= 1e-4);
  CHECK(frac_kernel(1.5, 1.0, 12.0, 0.01).mass_defect <= 1e-4);
}

TEST_CASE("kernel symmetry and positivity") {
  const FracKernelGrid g = frac_kernel(1.4, 0.7, 8.0, 0.02);
  CHECK(g.G.minCoeff() > 0.0);
  for (int i = 0; i < g.n(); ++i)
    CHECK(g.G[i] == doctest::Approx(g.G[g.n() - 1 - i]).epsilon(1e-10));
}

TEST_CASE("log grid carries the power tail model") {
  const FracKernelGrid g = frac_kernel(1.0, 1.0, 12.0, 0.02);
  const GridFunction lg = g.log_grid();
  CHECK(lg.tail.kind == TailModel::Kind::LogPower);
  CHECK(lg.tail.a == doctest::Approx(-2.0));
  // intercept should reproduce log(t/pi) for the Cauchy tail t/(pi x^2)
  CHECK(lg.tail.b == doctest::Approx(std::log(1.0 / M_PI)).epsilon(0.01));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS(frac_kernel(2.4, 1.0, 5.0, 0.1));
  CHECK_THROWS(frac_kernel(1.0, -1.0, 5.0, 0.1));
  CHECK_THROWS(frac_kernel(1.0, 1.0, 0.05, 0.1));
}

TEST_SUITE_END();
