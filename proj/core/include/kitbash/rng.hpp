// Deterministic random streams. Distribution code is hand-rolled on top of
// std::mt19937_64 so that sequences do not depend on the standard library's
// (implementation-defined) distribution internals; substreams derived from
// (seed, a, b) make parallel loops reproducible at any thread count.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "kitbash/types.hpp"

namespace kitbash {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed)
      : state_(splitmix64(seed)), gen_(splitmix64(seed)) {}

  // Independent stream derived from this stream's seed and two indices.
  // Derivation uses only the construction-time state, so substreams do not
  // depend on how many values the parent has consumed.
  Rng substream(std::uint64_t a, std::uint64_t b = 0) const {
    return Rng(splitmix64(state_ ^ splitmix64(a + 0x100)) ^
               splitmix64(b + 0x51ed2701));
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; one spare value cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  Vec3 normal3() {
    Vec3 v;
    v.x() = normal();
    v.y() = normal();
    v.z() = normal();
    return v;
  }

  // Uniform direction on the unit sphere.
  Vec3 unit_vector() {
    for (;;) {
      const Vec3 v = normal3();
      const double n = v.norm();
      if (n > 1e-12) return v / n;
    }
  }

 private:
  std::uint64_t state_;
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace kitbash
