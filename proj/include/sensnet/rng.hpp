#pragma once

#include <cstdint>
#include <random>

namespace sensnet {

// Every simulated entity (process, each sensor, the scheduler) owns its own
// generator so that runs are reproducible regardless of evaluation order and
// so that paired runs of different schemes can share noise realizations.
using Rng = std::mt19937_64;

namespace stream {
inline constexpr std::uint64_t process = 0x01;
inline constexpr std::uint64_t scheduler = 0x02;
inline constexpr std::uint64_t sensor = 0x10;        // accuracy-state draws
inline constexpr std::uint64_t sensor_noise = 0x11;  // activation + noise draws
}  // namespace stream

// splitmix64 step; decorrelates seeds derived from a common master seed.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag,
                                 std::uint64_t index = 0) {
  return mix64(mix64(mix64(master) ^ tag) ^ index);
}

inline Rng make_stream(std::uint64_t master, std::uint64_t tag,
                       std::uint64_t index = 0) {
  return Rng(derive_seed(master, tag, index));
}

}  // namespace sensnet
