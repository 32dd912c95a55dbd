#pragma once

#include <cmath>
#include <cstdint>

namespace aggvi {

// Counter-based random streams in the splitmix64 family (Steele, Lea &
// Flood 2014; finalizer constants by Stafford/Vigna). A stream is a key
// plus an implicit counter, so any draw can be reproduced from
// (seed, number of draws) alone and substreams can be derived without
// touching the parent stream. All experiment randomness in this project
// goes through these streams; nothing uses std::rand or random_device.

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

// Derives the key of an independent substream from (key, tag). Used for
// per-run, per-block and per-episode streams; disjoint tags give streams
// that never share draws.
constexpr std::uint64_t derive_stream(std::uint64_t key, std::uint64_t tag) {
  return mix64(key ^ mix64(tag + kGolden));
}

constexpr std::uint64_t derive_stream(std::uint64_t key, std::uint64_t a,
                                      std::uint64_t b) {
  return derive_stream(derive_stream(key, a), b);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += kGolden;
    return mix64(state_);
  }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), n >= 1. Multiply-shift; the 2^-64 bias is
  // irrelevant at simulation scale and the mapping is fixed forever.
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Standard normal via Box-Muller; always consumes exactly two draws.
  double next_normal() {
    double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0,1]
    double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  // Independent child stream; the parent's state is unaffected.
  Rng fork(std::uint64_t tag) const { return Rng(derive_stream(state_, tag)); }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

}  // namespace aggvi
