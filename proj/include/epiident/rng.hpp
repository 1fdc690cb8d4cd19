#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace epiident {

// Generator identification, pinned in every run manifest.
inline constexpr const char* kPrngName = "xoshiro256** (splitmix64-derived streams)";
inline constexpr const char* kPrngVersion = "1.0";

// Master seed used when the CLI is run without --seed.
inline constexpr std::uint64_t kDefaultMasterSeed = 20240501ULL;

/// (master, stream) uniquely determines the random sequence.
struct RngSeed {
  std::uint64_t master = kDefaultMasterSeed;
  std::uint64_t stream = 0;
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Fold an arbitrary list of identifiers into a stream id. Used to give every
/// (scenario, method, trial, dataset, ...) tuple its own independent stream
/// without coordination between workers.
inline std::uint64_t derive_stream(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  for (std::uint64_t p : parts) {
    std::uint64_t s = h ^ (p + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
    h = splitmix64(s);
  }
  return h;
}

/// Counter-free splittable stream: the state is seeded by running splitmix64
/// on mix(master, stream), per the xoshiro authors' seeding recommendation.
class RandomStream {
 public:
  explicit RandomStream(RngSeed seed) {
    std::uint64_t init = derive_stream({seed.master, seed.stream});
    for (auto& word : state_) word = splitmix64(init);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (no cached spare, so the draw sequence is
  /// a pure function of the call sequence).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  /// Exponential waiting time with the given rate.
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t state_[4];
};

}  // namespace epiident
