#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "an2n/types.hpp"

namespace an2n {

/// Seeded random stream with hand-rolled variate transforms so that the
/// produced sequences are identical across standard-library implementations
/// (std::normal_distribution is not portable). One Rng per concern; streams
/// are derived from the run seed with stream_seed().
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (two uniforms per draw, no cached pair).
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  Vector normal_vector(int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  Vector uniform_vector(int n, double lo, double hi) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }

  /// Uniform index in [0, n), rejection-sampled to avoid modulo bias.
  std::size_t index(std::size_t n) {
    const std::uint64_t max = ~std::uint64_t{0};
    const std::uint64_t limit = max - max % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return static_cast<std::size_t>(x % n);
  }

 private:
  std::mt19937_64 engine_;
};

/// Named substreams of a run seed. Keeping one stream per concern means
/// toggling one feature (e.g. the exploration gate) cannot perturb draws
/// consumed elsewhere.
enum class Stream : std::uint64_t {
  param_init = 1,
  env = 2,
  action = 3,
  batch = 4,
  update = 5,
  eval = 6,
};

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t run_seed, Stream stream,
                                 std::uint64_t index = 0) {
  std::uint64_t h = mix64(run_seed);
  h = mix64(h ^ static_cast<std::uint64_t>(stream));
  h = mix64(h ^ index);
  return h;
}

}  // namespace an2n
