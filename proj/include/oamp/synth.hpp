#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "oamp/grids.hpp"

namespace oamp {

struct SynthConfig {
  int height = 32;
  int width = 32;
  double corr_length = 3.0;  // Gaussian smoothing std of the field, pixels
  std::string style = "mixed";  // blobs | swaths | mixed
  double coverage = 0.5;        // observed fraction of all pixels
  double land_fraction = 0.1;
  int samples = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Smoothed white noise standardized to mean 0, variance 1 over all pixels.
Field gen_field(const SynthConfig& cfg, std::uint64_t sample_seed);

/// Static land region for the dataset seed (1 = land).
Mask gen_land(const SynthConfig& cfg);

/// Observation mask with exactly round(coverage * H * W) observed pixels, none
/// of them on land.
Mask gen_occlusion(const SynthConfig& cfg, std::uint64_t sample_seed);

/// Per-sample seed used by gen_dataset for sample `index`.
std::uint64_t sample_seed(const SynthConfig& cfg, std::size_t index);

/// Writes fields/, masks/ and oracle/ as NNNN.grd plus manifest.json.
DatasetManifest gen_dataset(const SynthConfig& cfg, const std::filesystem::path& out_dir);

/// Location of the complete field for sample `index`. Evaluation only.
std::filesystem::path oracle_path(const DatasetManifest& manifest, std::size_t index);

/// Complete field for sample `index`, standardized with the manifest statistics.
Field load_oracle(const DatasetManifest& manifest, std::size_t index);

/// Separable Gaussian blur with reflecting borders.
std::vector<double> gaussian_blur(std::span<const double> values, int height, int width,
                                  double sigma);

}  // namespace oamp
