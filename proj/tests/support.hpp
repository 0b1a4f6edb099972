#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "oamp/grids.hpp"
#include "oamp/rng.hpp"

namespace oamp::test {

inline Mask random_mask(int h, int w, double p, Rng& rng) {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(h) * w);
  for (auto& b : bits) b = uniform01(rng) < p ? 1 : 0;
  return Mask(h, w, std::move(bits));
}

inline Mask mask_of(int h, int w, std::vector<std::uint8_t> bits) { return Mask(h, w, std::move(bits)); }

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("oamp_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace oamp::test
