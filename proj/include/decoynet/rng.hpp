// Deterministic random streams.
//
// Every random draw in the project goes through SplitMix64 with hand-rolled
// distribution helpers, so identical seeds give identical streams on every
// platform and standard library. Child streams are derived from a master seed,
// a sample index and a stage tag; the exact derivation is documented in the
// README together with frozen test vectors.
#pragma once

#include <cstdint>
#include <string_view>

namespace decoynet {

// splitmix64 output function.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// child = mix64(mix64(mix64(master) ^ fnv1a64(stage)) ^ sample)
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t sample,
                                 std::string_view stage) {
  return mix64(mix64(mix64(master) ^ fnv1a64(stage)) ^ sample);
}

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // [0,1) with 53 random bits.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double next_real(double lo, double hi) { return lo + next_unit() * (hi - lo); }

  // [0,n); n must be > 0. Multiply-shift mapping, bias is negligible for the
  // ranges used here and the mapping is reproducible everywhere.
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // inclusive range
  int next_int(int lo, int hi) {
    return lo + static_cast<int>(next_below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

 private:
  std::uint64_t state_;
};

}  // namespace decoynet
