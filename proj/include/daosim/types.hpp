#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace daosim {

// Node identifiers are link-local ids; global (prefix) ids live in a
// disjoint range so the two address spaces can never be confused.
using NodeId = std::uint32_t;
using GlobalId = std::uint32_t;

inline constexpr NodeId kBroadcast = 0xffffffffu;
inline constexpr GlobalId kGlobalIdBase = 0x10000u;

inline GlobalId global_of(NodeId id) { return kGlobalIdBase + id; }
inline NodeId node_of_global(GlobalId gid) { return gid - kGlobalIdBase; }

// Virtual time in integer microseconds since simulation start.
using SimTime = std::uint64_t;

inline constexpr SimTime us_per_ms = 1000;
inline constexpr SimTime us_per_s = 1000000;

inline SimTime from_seconds(double s) {
  return static_cast<SimTime>(s * static_cast<double>(us_per_s) + 0.5);
}
inline double to_seconds(SimTime t) {
  return static_cast<double>(t) / static_cast<double>(us_per_s);
}
inline double to_ms(SimTime t) {
  return static_cast<double>(t) / static_cast<double>(us_per_ms);
}

using Rank = std::uint16_t;

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct SimError : std::runtime_error {
  explicit SimError(const std::string& what) : std::runtime_error(what) {}
};

using Rng = std::mt19937_64;

// std::uniform_*_distribution is implementation-defined; these draws are
// pinned so traces replay identically across standard libraries.
inline std::uint64_t rand_below(Rng& rng, std::uint64_t n) {
  if (n == 0) return 0;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v = rng();
  while (v >= limit) v = rng();
  return v % n;
}

// Uniform in [lo, hi).
inline std::uint64_t rand_range(Rng& rng, std::uint64_t lo, std::uint64_t hi) {
  return lo + rand_below(rng, hi - lo);
}

// Uniform double in [0, 1).
inline double rand_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace daosim
