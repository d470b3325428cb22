#pragma once

#include <cstdint>
#include <random>

namespace envmorph {

/// splitmix64 finalizer; used to derive independent per-item seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed streams. The stream id occupies the top byte of every derived seed,
/// so seeds from different streams can never collide.
enum class SeedStream : std::uint8_t {
  MapperTrain = 0x01,
  AutoencoderCorpus = 0x02,
  AutoencoderInit = 0x03,
  MapperInit = 0x04,
  Dataset = 0x05,
  EvalSingleAxis = 0x81,
  EvalCompositional = 0x82,
  EvalNaturalistic = 0x83,
};

constexpr std::uint64_t derive_seed(std::uint64_t base, SeedStream stream,
                                    std::uint64_t index) noexcept {
  const auto tag = static_cast<std::uint64_t>(stream);
  const std::uint64_t h = mix64(mix64(base ^ (tag << 48)) + index);
  return (tag << 56) | (h & 0x00FFFFFFFFFFFFFFULL);
}

constexpr SeedStream stream_of(std::uint64_t seed) noexcept {
  return static_cast<SeedStream>(seed >> 56);
}

constexpr bool is_evaluation_seed(std::uint64_t seed) noexcept { return (seed >> 63) != 0; }

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Uniform integer in [lo, hi].
inline int uniform_int(Rng& rng, int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(rng() % span);
}

}  // namespace envmorph
