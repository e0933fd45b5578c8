#include "nis/rng.hpp"

#include <cmath>
#include <numbers>

namespace nis {

Stream make_stream(std::uint64_t seed) {
  const std::uint64_t a = splitmix64(seed);
  const std::uint64_t b = splitmix64(a);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return Stream(seq);
}

double uniform01(Stream& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double standard_normal(Stream& rng) {
  const double u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace nis
