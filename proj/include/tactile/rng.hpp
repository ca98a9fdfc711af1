#ifndef TACTILE_RNG_HPP
#define TACTILE_RNG_HPP

#include <cmath>
#include <cstdint>

namespace tactile {

// SplitMix64 counter PRNG. Chosen over std distributions because the output
// must be bit-identical across standard-library versions.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; second value cached.
  double gaussian() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Derives an independent child seed from (seed, stream_id). Distinct
// stream ids give decorrelated streams; the mapping is injective in
// stream_id for a fixed seed before mixing.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t stream_id) {
  SplitMix64 mix(seed ^ (0x6a09e667f3bcc909ULL + stream_id * 0x9e3779b97f4a7c15ULL));
  return mix.next_u64();
}

}  // namespace tactile

#endif  // TACTILE_RNG_HPP
