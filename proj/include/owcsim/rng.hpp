#pragma once

#include <cstdint>
#include <random>
#include <string_view>

// Seed derivation and per-stream RNG. Every Monte-Carlo stream is keyed by
// (master seed, tag, counters) so serial and parallel sweeps draw identical
// sequences regardless of execution order.

namespace owcsim::rng {

inline constexpr std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

// Counter-based stream splitting: fold each component through splitmix64.
inline constexpr std::uint64_t derive(std::uint64_t master, std::string_view tag,
                                      std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t s = master;
  s ^= splitmix64_next(s) ^ fnv1a64(tag);
  s ^= splitmix64_next(s) ^ a;
  s ^= splitmix64_next(s) ^ b;
  return splitmix64_next(s);
}

class Stream {
 public:
  explicit Stream(std::uint64_t seed) : eng_(seed) {}
  Stream(std::uint64_t master, std::string_view tag, std::uint64_t a = 0, std::uint64_t b = 0)
      : eng_(derive(master, tag, a, b)) {}

  std::uint8_t byte() { return static_cast<std::uint8_t>(eng_() & 0xffu); }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }
  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(eng_);
  }
  std::uint64_t integer(std::uint64_t bound) {  // [0, bound)
    return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(eng_);
  }
  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace owcsim::rng
