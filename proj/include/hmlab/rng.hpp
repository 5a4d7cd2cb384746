#pragma once

#include <cstdint>
#include <cmath>

namespace hmlab {

// SplitMix64 finalizer (Steele/Lea/Flood; Vigna's fixed-increment variant).
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// Counter-based splittable stream. A stream is a pure function of
// (seed, stream id, counter), so results do not depend on how work is
// split across threads. Every Monte Carlo path gets its own stream.
class CounterRng {
  public:
    CounterRng() = default;
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_(mix64(mix64(seed + kGolden) ^ (stream * 0xD6E8FEB86659FD93ull))) {}

    // Derive a child stream without perturbing this one.
    CounterRng split(std::uint64_t substream) const {
        CounterRng r;
        r.key_ = mix64(key_ ^ mix64(substream * kGolden + 0x2545F4914F6CDD1Dull));
        return r;
    }

    std::uint64_t next_u64() { return mix64(key_ + (++ctr_) * kGolden); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    double angle() { return uniform() * 6.283185307179586476925286766559; }

    std::uint64_t key() const { return key_; }

  private:
    std::uint64_t key_ = 0;
    std::uint64_t ctr_ = 0;
};

// Stable stream ids for the independent Monte Carlo contexts. Keeping them
// in one table avoids accidental stream collisions between modules.
namespace stream {
inline constexpr std::uint64_t kWos = 1;
inline constexpr std::uint64_t kWosBall = 2;
inline constexpr std::uint64_t kCorona = 3;
inline constexpr std::uint64_t kTestFunction = 4;
inline constexpr std::uint64_t kAugment = 5;
inline constexpr std::uint64_t kAudit = 6;
inline constexpr std::uint64_t kGrad = 7;
} // namespace stream

} // namespace hmlab
