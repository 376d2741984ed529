#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>

// GF(2^8) arithmetic under the primitive polynomial x^8+x^4+x^3+x^2+1
// (0x11d), generator 0x02. Multiplication and inversion go through
// precomputed log/antilog tables; addition is XOR.

namespace owcsim::gf {

inline constexpr unsigned kPoly = 0x11d;

struct Tables {
  std::array<std::uint8_t, 256> log{};
  std::array<std::uint8_t, 512> exp{};
};

constexpr Tables build_tables() {
  Tables t{};
  unsigned x = 1;
  for (int i = 0; i < 255; ++i) {
    t.exp[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(x);
    t.log[x] = static_cast<std::uint8_t>(i);
    x <<= 1;
    if (x & 0x100u) x ^= kPoly;
  }
  // Duplicate the cycle so mul() can skip the mod-255 of summed logs.
  for (int i = 255; i < 512; ++i) t.exp[static_cast<std::size_t>(i)] = t.exp[static_cast<std::size_t>(i - 255)];
  return t;
}

inline constexpr Tables kTables = build_tables();

inline constexpr std::uint8_t add(std::uint8_t a, std::uint8_t b) { return a ^ b; }

inline constexpr std::uint8_t mul(std::uint8_t a, std::uint8_t b) {
  if (a == 0 || b == 0) return 0;
  return kTables.exp[static_cast<std::size_t>(kTables.log[a]) + kTables.log[b]];
}

inline std::uint8_t inv(std::uint8_t a) {
  if (a == 0) throw std::domain_error("gf256: zero has no inverse");
  return kTables.exp[static_cast<std::size_t>(255 - kTables.log[a])];
}

inline std::uint8_t div(std::uint8_t a, std::uint8_t b) {
  if (b == 0) throw std::domain_error("gf256: division by zero");
  if (a == 0) return 0;
  return kTables.exp[static_cast<std::size_t>(kTables.log[a]) + 255 - kTables.log[b]];
}

}  // namespace owcsim::gf
