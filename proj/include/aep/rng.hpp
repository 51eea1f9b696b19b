#pragma once

// Random streams. Every stream is a std::mt19937_64 seeded from a root seed
// and a stream name, so modules can be re-run in isolation. The conversions
// to doubles and bounded integers are written out here because the standard
// distributions are implementation-defined and would break bit-exact replay.

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace aep {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_name(std::string_view name) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seed of the substream `name`/`index` below `root`.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view name,
                                    std::uint64_t index = 0) noexcept {
  return splitmix64(splitmix64(root ^ hash_name(name)) + splitmix64(index + 0x5851f42d4c957f2dULL));
}

inline Rng make_stream(std::uint64_t root, std::string_view name, std::uint64_t index = 0) {
  return Rng(derive_seed(root, name, index));
}

/// Uniform double in [0,1) with 53 random bits.
inline double uniform01(Rng& rng) noexcept {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) noexcept {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

inline double exponential(Rng& rng, double rate) noexcept {
  return -std::log1p(-uniform01(rng)) / rate;
}

inline bool bernoulli(Rng& rng, double p) noexcept { return uniform01(rng) < p; }

/// Standard normal via Box-Muller (one value per call).
inline double standard_normal(Rng& rng) noexcept {
  double u1 = 0.0;
  do {
    u1 = uniform01(rng);
  } while (u1 <= 0.0);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
}

}  // namespace aep
