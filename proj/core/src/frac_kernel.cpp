#include "curvlab/frac_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "curvlab/quadrature.hpp"

namespace curvlab {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double frac_laplacian_norm(double beta) {
  if (!(beta > 0.0) || !(beta < 2.0)) throw std::invalid_argument("beta must lie in (0,2)");
  // lgamma(-beta/2) returns log|Gamma|; Gamma(-beta/2) < 0 on (0,2)
  const double lg = beta * std::log(2.0) + std::lgamma(0.5 * (1.0 + beta)) -
                    0.5 * std::log(kPi) - std::lgamma(-0.5 * beta);
  return std::exp(lg);
}

double stable_density(double beta, double t, double x) {
  if (!(beta > 0.0) || !(beta < 2.0)) throw std::invalid_argument("beta must lie in (0,2)");
  if (!(t > 0.0)) throw std::invalid_argument("t must be positive");
  const double ax = std::abs(x);
  // decay cutoff: t xi^beta = 60 leaves a tail below 1e-25
  const double xi_max = std::pow(60.0 / t, 1.0 / beta);

  // segment boundaries: cosine zeros plus a ladder on the decay scale
  std::vector<double> cuts;
  cuts.push_back(0.0);
  for (int j = 1; j <= 48; ++j) {
    const double xi = std::pow(1.25 * j / t, 1.0 / beta);
    if (xi < xi_max) cuts.push_back(xi);
  }
  if (ax > 0.0) {
    const double first = 0.5 * kPi / ax;
    for (double z = first; z < xi_max; z += kPi / ax) {
      cuts.push_back(z);
      if (cuts.size() > 4000000) throw std::runtime_error("stable_density: segment budget exceeded");
    }
  }
  cuts.push_back(xi_max);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  auto integrand = [&](double xi) { return std::cos(xi * ax) * std::exp(-t * std::pow(xi, beta)); };
  // e^{-t xi^beta} has a derivative singularity at 0 for beta < 2; resolve the
  // first segment with dyadic panels toward the endpoint
  double total = 0.0;
  {
    double hi = cuts[1];
    for (int m = 0; m < 48; ++m) {
      const double lo = 0.5 * hi;
      total += gauss_legendre(integrand, lo, hi, 8);
      hi = lo;
    }
    total += integrand(0.5 * hi) * hi;  // stub below the last panel
  }
  for (std::size_t i = 1; i + 1 < cuts.size(); ++i)
    total += gauss_legendre(integrand, cuts[i], cuts[i + 1], 20);
  return total / kPi;
}

double stable_density_series(double beta, double t, double x, double* error_out) {
  const double ax = std::abs(x);
  if (!(ax > 0.0)) throw std::invalid_argument("series needs x != 0");
  double sum = 0.0, smallest = std::numeric_limits<double>::infinity();
  double err = std::numeric_limits<double>::infinity();
  for (int m = 1; m <= 220; ++m) {
    const double osc = std::sin(0.5 * kPi * m * beta);
    if (std::abs(osc) < 1e-12) continue;  // structurally vanishing term
    const double lt = std::lgamma(m * beta + 1.0) - std::lgamma(m + 1.0) + m * std::log(t) -
                      (1.0 + m * beta) * std::log(ax);
    const double term = (m % 2 == 1 ? 1.0 : -1.0) * osc * std::exp(lt);
    const double mag = std::abs(term);
    if (mag > 1.5 * smallest && m > 2) {  // asymptotic regime: stop at the smallest term
      err = smallest;
      break;
    }
    sum += term;
    smallest = std::min(smallest, mag);
    err = mag;
    if (mag < 1e-17 * std::abs(sum) + 1e-300) break;
  }
  if (error_out) *error_out = err;
  return sum / kPi;
}

GridFunction FracKernelGrid::log_grid() const {
  GridFunction g;
  g.x0 = x[0];
  g.h = h;
  g.v.resize(n());
  for (int i = 0; i < n(); ++i) g.v[i] = std::log(std::max(G[i], 1e-300));
  // log-power tail -(1+beta) log|y| + b, intercept fitted on the outer quarter
  double b = 0.0;
  int cnt = 0;
  const int q = n() / 4;
  for (int i = 0; i < q; ++i) {
    b += g.v[i] + (1.0 + beta) * std::log(std::abs(x[i]));
    b += g.v[n() - 1 - i] + (1.0 + beta) * std::log(std::abs(x[n() - 1 - i]));
    cnt += 2;
  }
  g.tail = TailModel::log_power(-(1.0 + beta), b / cnt);
  return g;
}

FracKernelGrid frac_kernel(double beta, double t, double X, double h) {
  if (!(beta > 0.0) || !(beta < 2.0)) throw std::invalid_argument("beta must lie in (0,2)");
  if (!(t > 0.0) || !(h > 0.0) || !(h < X)) throw std::invalid_argument("need t > 0 and 0 < h < X");
  const int n_half = static_cast<int>(std::round(X / h));
  FracKernelGrid grid;
  grid.beta = beta;
  grid.t = t;
  grid.X = n_half * h;
  grid.h = h;
  grid.c_norm = frac_laplacian_norm(beta);
  grid.x.resize(2 * n_half + 1);
  grid.G.resize(2 * n_half + 1);
  for (int i = 0; i <= n_half; ++i) {
    const double g = stable_density(beta, t, i * h);
    grid.x[n_half + i] = i * h;
    grid.x[n_half - i] = -i * h;
    grid.G[n_half + i] = g;
    grid.G[n_half - i] = g;
  }

  // Simpson over the grid (odd point count by construction)
  double mass = grid.G[0] + grid.G[2 * n_half];
  for (int i = 1; i < 2 * n_half; ++i) mass += grid.G[i] * (i % 2 ? 4.0 : 2.0);
  grid.grid_mass = mass * h / 3.0;

  // modeled tail: termwise-integrated large-x series, 2 int_X^inf G
  double tail = 0.0;
  {
    double smallest = std::numeric_limits<double>::infinity();
    for (int m = 1; m <= 220; ++m) {
      const double osc = std::sin(0.5 * kPi * m * beta);
      if (std::abs(osc) < 1e-12) continue;
      const double lt = std::lgamma(m * beta + 1.0) - std::lgamma(m + 1.0) + m * std::log(t) -
                        m * beta * std::log(grid.X);
      const double term = (m % 2 == 1 ? 1.0 : -1.0) * osc * std::exp(lt) / (m * beta);
      if (std::abs(term) > 1.5 * smallest && m > 2) break;
      tail += term;
      smallest = std::min(smallest, std::abs(term));
      if (std::abs(term) < 1e-17 * std::abs(tail) + 1e-300) break;
    }
    grid.tail_mass = 2.0 * tail / kPi;
  }
  grid.mass_defect = std::abs(grid.grid_mass + grid.tail_mass - 1.0);
  return grid;
}

nlohmann::json FracKernelGrid::to_json() const {
  nlohmann::json j;
  j["beta"] = beta;
  j["t"] = t;
  j["X"] = X;
  j["h"] = h;
  j["c_norm"] = c_norm;
  j["grid_mass"] = grid_mass;
  j["tail_mass"] = tail_mass;
  j["mass_defect"] = mass_defect;
  return j;
}

std::string FracKernelGrid::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "x,G\n";
  for (int i = 0; i < n(); ++i) os << x[i] << "," << G[i] << "\n";
  return os.str();
}

}  // namespace curvlab
