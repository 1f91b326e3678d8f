#include "curvlab/gamma_ops.hpp"

#include <cmath>
#include <stdexcept>

namespace curvlab {

namespace {

void check_length(const Chain& c, const StateFunction& f) {
  if (f.size() != c.n()) throw std::invalid_argument("state function length mismatch");
}

}  // namespace

StateFunction apply_generator(const Chain& c, const StateFunction& f) {
  check_length(c, f);
  StateFunction out = StateFunction::Zero(c.n());
  for (int x = 0; x < c.n(); ++x) {
    double s = 0.0;
    for (const Edge& e : c.neighbors(x)) s += e.rate * (f[e.to] - f[x]);
    out[x] = s;
  }
  return out;
}

StateFunction carre_du_champ(const Chain& c, const StateFunction& f) {
  check_length(c, f);
  StateFunction out = StateFunction::Zero(c.n());
  for (int x = 0; x < c.n(); ++x) {
    double s = 0.0;
    for (const Edge& e : c.neighbors(x)) {
      const double d = f[e.to] - f[x];
      s += e.rate * d * d;
    }
    out[x] = 0.5 * s;
  }
  return out;
}

StateFunction carre_du_champ(const Chain& c, const StateFunction& f, const StateFunction& g) {
  check_length(c, f);
  check_length(c, g);
  StateFunction out = StateFunction::Zero(c.n());
  for (int x = 0; x < c.n(); ++x) {
    double s = 0.0;
    for (const Edge& e : c.neighbors(x)) s += e.rate * (f[e.to] - f[x]) * (g[e.to] - g[x]);
    out[x] = 0.5 * s;
  }
  return out;
}

StateFunction carre_du_champ2(const Chain& c, const StateFunction& f) {
  const StateFunction gamma_f = carre_du_champ(c, f);
  const StateFunction lf = apply_generator(c, f);
  return 0.5 * (apply_generator(c, gamma_f) - 2.0 * carre_du_champ(c, f, lf));
}

StateFunction psi_h(const Chain& c, const StateFunction& f, const std::function<double(double)>& H) {
  check_length(c, f);
  if (std::abs(H(0.0)) > 1e-14) throw std::invalid_argument("psi_h requires H(0) = 0");
  StateFunction out = StateFunction::Zero(c.n());
  for (int x = 0; x < c.n(); ++x) {
    double s = 0.0;
    for (const Edge& e : c.neighbors(x)) s += e.rate * H(f[e.to] - f[x]);
    out[x] = s;
  }
  return out;
}

StateFunction psi_upsilon(const Chain& c, const StateFunction& f) {
  check_length(c, f);
  StateFunction out = StateFunction::Zero(c.n());
  for (int x = 0; x < c.n(); ++x) {
    double s = 0.0;
    for (const Edge& e : c.neighbors(x)) s += e.rate * upsilon(f[e.to] - f[x]);
    out[x] = s;
  }
  return out;
}

StateFunction b_upsilon_prime(const Chain& c, const StateFunction& f, const StateFunction& g) {
  check_length(c, f);
  check_length(c, g);
  StateFunction out = StateFunction::Zero(c.n());
  for (int x = 0; x < c.n(); ++x) {
    double s = 0.0;
    for (const Edge& e : c.neighbors(x))
      s += e.rate * upsilon_prime(f[e.to] - f[x]) * (g[e.to] - g[x]);
    out[x] = s;
  }
  return out;
}

StateFunction psi2_upsilon(const Chain& c, const StateFunction& f) {
  const StateFunction psi = psi_upsilon(c, f);
  const StateFunction lf = apply_generator(c, f);
  return 0.5 * (apply_generator(c, psi) - b_upsilon_prime(c, f, lf));
}

}  // namespace curvlab
