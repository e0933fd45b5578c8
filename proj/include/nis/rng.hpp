#pragma once

#include <cstdint>
#include <random>

namespace nis {

/// Per-task random stream. mt19937_64 output is fixed by the standard, and the
/// variate transforms below avoid std:: distributions, so draws are identical
/// across standard libraries.
using Stream = std::mt19937_64;

/// SplitMix64 finalizer; used to decorrelate neighbouring integer seeds.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Stream for one unit of work. Tasks are addressed by integer seed; callers
/// derive task seeds by counter offsets from a single base seed.
Stream make_stream(std::uint64_t seed);

/// Uniform on the open interval (0, 1) with 53 random bits.
double uniform01(Stream& rng);

/// Standard normal via Box-Muller; consumes exactly two uniforms, no caching.
double standard_normal(Stream& rng);

}  // namespace nis
