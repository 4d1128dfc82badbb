#ifndef DAGPOST_RNG_HPP
#define DAGPOST_RNG_HPP

#include <cmath>
#include <cstdint>

namespace dagpost {

/// Counter-based 64-bit generator (splitmix64) with derived substreams.
///
/// Every draw is a fixed-point hash of an advancing counter, so streams can
/// be split by key derivation: substream(i) yields a generator that is
/// statistically independent of both the parent and every other substream,
/// regardless of how many values the parent has produced.  Normal variates
/// use Box-Muller on the raw 53-bit uniforms, so output sequences are
/// identical across platforms for a given seed.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "splitmix64";

  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform double in [0, 1) with 53 random mantissa bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), unbiased via rejection.
  std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t threshold = (-n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  /// Standard normal variate (Box-Muller, second value cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    const double t = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  /// Independent generator derived from this generator's seed and a stream id.
  Rng substream(std::uint64_t stream) const {
    return Rng(mix(seed_ + 0x9E3779B97F4A7C15ULL * (stream + 1)));
  }

  std::uint64_t seed() const { return seed_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace dagpost

#endif  // DAGPOST_RNG_HPP
