#pragma once

#include <cstdint>
#include <stdexcept>

#include "fcl/math.hpp"

namespace fcl {

/// Addresses one reproducible random stream: a master seed shared by the whole
/// experiment plus a stream id (one per Monte Carlo replicate). Identical
/// specs always produce identical draw sequences, and distinct stream ids give
/// statistically independent sequences, so results do not depend on how
/// replicates are scheduled across workers.
struct seed_spec {
  std::uint64_t master = 0;
  std::uint64_t stream = 0;
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-style generator: the state advances by a fixed odd increment and
/// every output is a strong 64-bit hash of the state, so a stream is fully
/// determined by its derived starting point.
class stream_rng {
 public:
  explicit stream_rng(seed_spec s) noexcept {
    std::uint64_t h = detail::mix64(s.master ^ 0x452821e638d01377ull);
    h = detail::mix64(h ^ detail::mix64(s.stream ^ 0xbe5466cf34e90c6cull));
    state_ = h;
  }

  std::uint64_t next_u64() noexcept {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform on the open interval (0, 1); never returns an endpoint.
  double uniform01() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// One uniform consumed per normal draw (inverse CDF method), which keeps
  /// stream consumption predictable.
  double normal(double mean = 0.0, double sd = 1.0) {
    return mean + sd * normal_quantile(uniform01());
  }

  /// Marsaglia-Tsang squeeze for shape >= 1, boosted for shape < 1.
  double gamma(double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0))
      throw std::invalid_argument("stream_rng::gamma: shape and scale must be positive");
    if (shape < 1.0) {
      const double u = uniform01();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform01();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v * scale;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
  }

  double chi_squared(double df) { return gamma(0.5 * df, 2.0); }

 private:
  std::uint64_t state_;
};

}  // namespace fcl
