#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace icnte {

// SplitMix64 finalizer; used to derive independent seeds.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a(std::string_view s,
                                     std::uint64_t h = 0xCBF29CE484222325ULL) noexcept {
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline constexpr std::uint64_t fnv1a_u64(std::uint64_t v, std::uint64_t h) noexcept {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xFF;
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Seed for a named sub-stream of a master seed.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) noexcept {
  return splitmix64(master ^ splitmix64(fnv1a(tag)));
}

inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                           std::uint64_t b) noexcept {
  return splitmix64(master ^ splitmix64(a * 0x100000001B3ULL ^ splitmix64(b)));
}

// Portable random stream: MT19937-64 (fully specified by the C++ standard)
// with explicit conversions, so streams are identical across standard
// libraries. Standard <random> distributions are deliberately not used
// because their algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Exponential with the given rate, by inversion.
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace icnte
