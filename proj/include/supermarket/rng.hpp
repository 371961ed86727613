#pragma once

#include <cstdint>
#include <random>

namespace supermarket {

/// Engine used for every random stream in the library.
using Engine = std::mt19937_64;

/// Uniform double in the open interval (0, 1) from the top 53 bits.
inline double uniform_open01(Engine& engine) noexcept {
  return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53;
}

/// Uniform integer in [0, bound) by multiply-shift with rejection of the
/// biased low range (Lemire); exact for every bound >= 1.
inline std::uint64_t uniform_below(Engine& engine, std::uint64_t bound) noexcept {
  unsigned __int128 m = static_cast<unsigned __int128>(engine()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(engine()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

/// SplitMix64 output function; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for stream `index` under `master`. Distinct (master, index) pairs
/// give statistically independent engines; the mapping is fixed so every
/// replication can be re-run on its own.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Two-level split: (master, cell, replication).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t cell, std::uint64_t replication) noexcept;

}  // namespace supermarket
