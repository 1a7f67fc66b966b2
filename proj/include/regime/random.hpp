#pragma once

#include <cstdint>
#include <random>

namespace regime {

/// Stream tags used with derive_stream; one per consumer of randomness.
enum class StreamTag : std::uint64_t {
    FirmIndicator = 1,
    Omega = 2,
    ContagionNoise = 10,
    ContagionFactors = 11,
    FirmSimulation = 20,
};

/// Engine for (seed, stream, index). The same triple always yields the same
/// sequence, and distinct triples yield unrelated sequences.
std::mt19937_64 derive_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

inline std::mt19937_64 derive_stream(std::uint64_t seed, StreamTag tag, std::uint64_t index) {
    return derive_stream(seed, static_cast<std::uint64_t>(tag), index);
}

}  // namespace regime
