#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace oamp {

using Rng = std::mt19937_64;

/// Child seed for a labelled purpose: FNV-1a of the label mixed with the
/// parent through splitmix64. Every stochastic stream in the library is
/// derived this way from one master seed.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view label);
std::uint64_t derive_seed(std::uint64_t parent, std::string_view label, std::uint64_t index);

inline Rng make_rng(std::uint64_t seed, std::string_view label) {
  return Rng(derive_seed(seed, label));
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double standard_normal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace oamp
