#include <cmath>

#include "curvlab/chain.hpp"
#include "curvlab/gamma_ops.hpp"
#include "curvlab/rng.hpp"
#include "curvlab/semigroup.hpp"
#include "doctest.h"

using namespace curvlab;

TEST_SUITE_BEGIN("gamma_ops");

TEST_CASE("constants are annihilated") {
  const Chain c = star_graph(3);
  const StateFunction f = StateFunction::Constant(4, 2.5);
  CHECK(apply_generator(c, f).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(carre_du_champ(c, f).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(carre_du_champ2(c, f).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(psi_upsilon(c, f).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(psi2_upsilon(c, f).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("two-state values") {
  const Chain k2 = complete_graph(2);
  StateFunction f(2);
  f << 0.0, 1.0;
  const StateFunction lf = apply_generator(k2, f);
  CHECK(lf[0] == doctest::Approx(1.0));
  CHECK(lf[1] == doctest::Approx(-1.0));

  const StateFunction g = carre_du_champ(k2, f);
  CHECK(g[0] == doctest::Approx(0.5));
  CHECK(g[1] == doctest::Approx(0.5));

  const StateFunction g2 = carre_du_champ2(k2, f);
  CHECK(g2[0] == doctest::Approx(1.0));
  CHECK(g2[1] == doctest::Approx(1.0));

  const StateFunction psi = psi_upsilon(k2, f);
  CHECK(psi[0] == doctest::Approx(std::exp(1.0) - 2.0));
  CHECK(psi[1] == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("hypercube indicator generator") {
  const Chain q2 = hypercube_graph(2);
  StateFunction f = StateFunction::Zero(4);
  f[0] = 1.0;
  const StateFunction lf = apply_generator(q2, f);
  CHECK(lf[0] == doctest::Approx(-2.0));
  CHECK(lf[1] == doctest::Approx(1.0));
  CHECK(lf[2] == doctest::Approx(1.0));
  CHECK(lf[3] == doctest::Approx(0.0));
}

TEST_CASE("psi_h with the square recovers Gamma") {
  const Chain c = star_graph(4);
  CounterRng rng(7);
  const StateFunction f = rng.gaussian_vector(0, c.n());
  const StateFunction a = psi_h(c, f, [](double z) { return 0.5 * z * z; });
  const StateFunction b = carre_du_champ(c, f);
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-13);

  CHECK_THROWS_AS(psi_h(c, f, [](double z) { return z + 1.0; }), std::invalid_argument);
}

TEST_CASE("two-state psi2 closed form") {
  const Chain k2 = complete_graph(2);
  for (const double s : {1.0, 0.3, -0.7, 2.5}) {
    StateFunction f(2);
    f << 0.0, s;
    const double expect = 0.5 * (std::exp(-s) - std::exp(s) + 2.0 * s * std::exp(s));
    CHECK(psi2_upsilon(k2, f)[0] == doctest::Approx(expect).epsilon(1e-12));
  }
  StateFunction f(2);
  f << 0.0, 1.0;
  CHECK(psi2_upsilon(k2, f)[0] == doctest::Approx(0.5 * (std::exp(-1.0) + std::exp(1.0))));
}

TEST_CASE("3-star center values") {
  const Chain s3 = star_graph(3);

  // symmetric [-1; +1,+1,+1] configuration evaluates positive at the center
  StateFunction f(4);
  f << -1.0, 1.0, 1.0, 1.0;
  const double sym = (3.0 * std::exp(-2.0) + 15.0 * std::exp(2.0) + 6.0) / 2.0;
  CHECK(psi2_upsilon(s3, f)[0] == doctest::Approx(sym).epsilon(1e-12));

  // asymmetric leaf pattern witnesses the CD_Upsilon(0,inf) failure
  StateFunction w(4);
  w << 0.0, 2.0, -2.0, -2.0;
  const double neg = (6.0 - std::exp(2.0) - 13.0 * std::exp(-2.0)) / 2.0;
  CHECK(psi2_upsilon(s3, w)[0] == doctest::Approx(neg).epsilon(1e-12));
  CHECK(psi2_upsilon(s3, w)[0] < -1.0);
}

TEST_CASE("gauge invariance under added constants") {
  const Chain c = hypercube_graph(3);
  CounterRng rng(11);
  const StateFunction f = rng.gaussian_vector(1, c.n());
  for (int i = 0; i < 4; ++i) {
    const double shift = 10.0 * rng.normal(2, i) ;
    const StateFunction g = f.array() + shift;
    CHECK((carre_du_champ(c, f) - carre_du_champ(c, g)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((carre_du_champ2(c, f) - carre_du_champ2(c, g)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((psi_upsilon(c, f) - psi_upsilon(c, g)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((psi2_upsilon(c, f) - psi2_upsilon(c, g)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("nonnegativity and scaling") {
  const Chain c = star_graph(3);
  CounterRng rng(13);
  const StateFunction f = rng.gaussian_vector(3, c.n());
  CHECK(carre_du_champ(c, f).minCoeff() >= 0.0);
  CHECK(psi_upsilon(c, f).minCoeff() >= 0.0);

  const StateFunction s1 = carre_du_champ(c, 2.0 * f);
  CHECK((s1 - 4.0 * carre_du_champ(c, f)).cwiseAbs().maxCoeff() <= 1e-12);

  // Psi_Upsilon has no quadratic homogeneity
  const StateFunction p2 = psi_upsilon(c, 2.0 * f);
  const StateFunction p4 = 4.0 * psi_upsilon(c, f);
  CHECK((p2 - p4).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("bilinear Gamma agrees with its polarization") {
  const Chain c = hypercube_graph(3);
  CounterRng rng(17);
  const StateFunction f = rng.gaussian_vector(4, c.n());
  const StateFunction g = rng.gaussian_vector(5, c.n());
  const StateFunction direct = carre_du_champ(c, f, g);
  const StateFunction polar =
      0.25 * (carre_du_champ(c, f + g) - carre_du_champ(c, (f - g).eval()));
  CHECK((direct - polar).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("log identity along the heat flow") {
  // v = log u solves dv/dt - Lv = Psi_Upsilon(v)
  const Chain c = hypercube_graph(2);
  CounterRng rng(19);
  Eigen::VectorXd u0 = (0.4 * rng.gaussian_vector(6, c.n())).array().exp();
  const double t = 0.37, dt = 1e-5;
  const Eigen::VectorXd um = propagate(c, u0, t - dt);
  const Eigen::VectorXd u = propagate(c, u0, t);
  const Eigen::VectorXd up = propagate(c, u0, t + dt);
  Eigen::VectorXd v = u.array().log();
  const Eigen::VectorXd dv = (up.array().log() - um.array().log()) / (2 * dt);
  const Eigen::VectorXd rhs = apply_generator(c, v) + psi_upsilon(c, v);
  const double scale = rhs.cwiseAbs().maxCoeff();
  CHECK((dv - rhs).cwiseAbs().maxCoeff() <= 1e-6 * std::max(scale, 1.0));
}

TEST_CASE("length mismatch rejected") {
  const Chain c = complete_graph(3);
  const StateFunction f = StateFunction::Zero(2);
  CHECK_THROWS_AS(apply_generator(c, f), std::invalid_argument);
  CHECK_THROWS_AS(carre_du_champ(c, f), std::invalid_argument);
  CHECK_THROWS_AS(psi2_upsilon(c, f), std::invalid_argument);
}

TEST_SUITE_END();
