#pragma once

#include <cmath>
#include <functional>

#include "curvlab/chain.hpp"

namespace curvlab {

// Upsilon(z) = e^z - 1 - z and its derivative. Series below |z| < 1e-4 keeps
// full relative accuracy in the near-constant regime where Psi-operators are
// O(z^2).
inline double upsilon(double z) {
  if (std::abs(z) < 1e-4) {
    const double z2 = z * z;
    return z2 * (0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0 + z / 120.0)));
  }
  return std::expm1(z) - z;
}

inline double upsilon_prime(double z) { return std::expm1(z); }

/// (Lf)(x) = sum_y k(x,y) (f(y) - f(x)).
StateFunction apply_generator(const Chain& c, const StateFunction& f);

/// Gamma(f)(x) = (1/2) sum_y k(x,y) (f(y) - f(x))^2.
StateFunction carre_du_champ(const Chain& c, const StateFunction& f);

/// Bilinear Gamma(f,g)(x) = (1/2) sum_y k(x,y) (f(y)-f(x)) (g(y)-g(x)).
StateFunction carre_du_champ(const Chain& c, const StateFunction& f, const StateFunction& g);

/// Gamma_2(f) = (1/2) (L Gamma(f) - 2 Gamma(f, Lf)).
StateFunction carre_du_champ2(const Chain& c, const StateFunction& f);

/// Psi_H(f)(x) = sum_y k(x,y) H(f(y) - f(x)); requires H(0) = 0.
StateFunction psi_h(const Chain& c, const StateFunction& f, const std::function<double(double)>& H);

/// Psi_Upsilon(f): Psi_H with H = Upsilon.
StateFunction psi_upsilon(const Chain& c, const StateFunction& f);

/// B_{Upsilon'}(f,g)(x) = sum_y k(x,y) Upsilon'(f(y)-f(x)) (g(y)-g(x)).
StateFunction b_upsilon_prime(const Chain& c, const StateFunction& f, const StateFunction& g);

/// Psi_{2,Upsilon}(f) = (1/2) (L Psi_Upsilon(f) - B_{Upsilon'}(f, Lf)).
StateFunction psi2_upsilon(const Chain& c, const StateFunction& f);

}  // namespace curvlab
