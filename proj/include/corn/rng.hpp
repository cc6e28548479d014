#pragma once

// Seed derivation: one master seed, independent streams addressed by counters.

#include <cstdint>
#include <random>

namespace corn::rng {

using Engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of stream (`domain`, `index`) under `master`.
constexpr std::uint64_t derive(std::uint64_t master, std::uint64_t domain, std::uint64_t index = 0) noexcept {
  return splitmix64(splitmix64(splitmix64(master) ^ domain) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

inline Engine stream(std::uint64_t master, std::uint64_t domain, std::uint64_t index = 0) {
  return Engine(derive(master, domain, index));
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(Engine& e) { return static_cast<double>(e() >> 11) * 0x1.0p-53; }

/// Uniform integer in [0, n).
inline std::size_t below(Engine& e, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(e);
}

// Stream domains; fixed so that adding a new consumer never shifts existing streams.
namespace domain {
inline constexpr std::uint64_t kSolver = 1;
inline constexpr std::uint64_t kRewire = 2;
inline constexpr std::uint64_t kRandomClustering = 3;
inline constexpr std::uint64_t kReplicate = 4;
inline constexpr std::uint64_t kCalibration = 5;
inline constexpr std::uint64_t kBootstrap = 6;
inline constexpr std::uint64_t kSynthFacility = 7;
inline constexpr std::uint64_t kSynthMobility = 8;
inline constexpr std::uint64_t kMonteCarloWeight = 9;
inline constexpr std::uint64_t kExperimentRewire = 10;
}  // namespace domain

}  // namespace corn::rng
