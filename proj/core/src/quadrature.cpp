#include "curvlab/quadrature.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace curvlab {

namespace {

// Nodes/weights on [-1, 1], positive half; mirrored at evaluation time.
constexpr std::array<double, 4> kGl8x = {0.1834346424956498, 0.5255324099163290,
                                         0.7966664774136267, 0.9602898564975363};
constexpr std::array<double, 4> kGl8w = {0.3626837833783620, 0.3137066458778873,
                                         0.2223810344533745, 0.1012285362903763};

constexpr std::array<double, 8> kGl16x = {0.0950125098376374, 0.2816035507792589,
                                          0.4580167776572274, 0.6178762444026438,
                                          0.7554044083550030, 0.8656312023878318,
                                          0.9445750230732326, 0.9894009349916499};
constexpr std::array<double, 8> kGl16w = {0.1894506104550685, 0.1826034150449236,
                                          0.1691565193950025, 0.1495959888165767,
                                          0.1246289712555339, 0.0951585116824928,
                                          0.0622535239386479, 0.0271524594117541};

constexpr std::array<double, 10> kGl20x = {0.0765265211334973, 0.2277858511416451,
                                           0.3737060887154195, 0.5108670019508271,
                                           0.6360536807265150, 0.7463319064601508,
                                           0.8391169718222188, 0.9122344282513259,
                                           0.9639719272779138, 0.9931285991850949};
constexpr std::array<double, 10> kGl20w = {0.1527533871307258, 0.1491729864726037,
                                           0.1420961093183820, 0.1316886384491766,
                                           0.1181945319615184, 0.1019301198172404,
                                           0.0832767415767048, 0.0626720483341091,
                                           0.0406014298003869, 0.0176140071391521};

template <std::size_t N>
double gl_apply(const std::function<double(double)>& f, double a, double b,
                const std::array<double, N>& xs, const std::array<double, N>& ws) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < N; ++i)
    s += ws[i] * (f(mid + half * xs[i]) + f(mid - half * xs[i]));
  return s * half;
}

double adapt(const std::function<double(double)>& f, double a, double b, double tol,
             double whole, int depth) {
  const double mid = 0.5 * (a + b);
  const double left = gl_apply(f, a, mid, kGl8x, kGl8w);
  const double right = gl_apply(f, mid, b, kGl8x, kGl8w);
  const double err = std::abs(left + right - whole);
  if (err < tol || depth <= 0) return left + right;
  return adapt(f, a, mid, 0.5 * tol, left, depth - 1) +
         adapt(f, mid, b, 0.5 * tol, right, depth - 1);
}

}  // namespace

double gauss_legendre(const std::function<double(double)>& f, double a, double b, int nodes) {
  switch (nodes) {
    case 8:
      return gl_apply(f, a, b, kGl8x, kGl8w);
    case 16:
      return gl_apply(f, a, b, kGl16x, kGl16w);
    case 20:
      return gl_apply(f, a, b, kGl20x, kGl20w);
    default:
      throw std::invalid_argument("gauss_legendre: supported node counts are 8, 16, 20");
  }
}

double adaptive_quadrature(const std::function<double(double)>& f, double a, double b,
                           double tol, int max_depth) {
  if (a == b) return 0.0;
  const double whole = gl_apply(f, a, b, kGl8x, kGl8w);
  return adapt(f, a, b, tol, whole, max_depth);
}

}  // namespace curvlab
