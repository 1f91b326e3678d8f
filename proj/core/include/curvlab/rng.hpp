#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Core>

namespace curvlab {

// Counter-based generator: every draw is a pure function of (seed, stream,
// index), so sample loops can run in any order and still reproduce bit-exact.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : key_(mix(seed ^ 0x9e3779b97f4a7c15ull)) {}

  double uniform(std::uint64_t stream, std::uint64_t index) const {
    const std::uint64_t bits = mix(key_ ^ mix(stream * 0xbf58476d1ce4e5b9ull + index));
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }

  // Box-Muller from two counter draws; never returns exactly 0 in the log.
  double normal(std::uint64_t stream, std::uint64_t index) const {
    const double u1 = uniform(stream, 2 * index);
    const double u2 = uniform(stream, 2 * index + 1);
    const double r = std::sqrt(-2.0 * std::log1p(-u1));  // u1 in [0,1) -> 1-u1 in (0,1]
    return r * std::cos(6.283185307179586476925286766559 * u2);
  }

  Eigen::VectorXd gaussian_vector(std::uint64_t stream, int n) const {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = normal(stream, static_cast<std::uint64_t>(i));
    return v;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
};

}  // namespace curvlab
