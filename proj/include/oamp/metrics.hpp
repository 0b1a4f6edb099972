#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "oamp/grids.hpp"

namespace oamp {

/// Mean squared difference over region pixels. Throws on an empty region.
double masked_mse(const Field& pred, const Field& truth, const Mask& region);

/// 10 log10(peak^2 / mse); +infinity when mse == 0.
double psnr(double mse, double peak);

/// Observed values with missing pixels set to the observed mean.
std::vector<double> fill_missing_with_mean(const Field& f);

/// Sobel gradient magnitude (unnormalized 3x3 kernels, replicate padding).
/// Missing pixels are filled with the observed mean first.
std::vector<double> sobel_magnitude(const Field& f);

struct BoundaryBands {
  Mask generated;  // gen_region pixels 8-adjacent to ctx
  Mask context;    // ctx pixels 8-adjacent to gen_region
};

BoundaryBands boundary_bands(const Mask& ctx, const Mask& gen_region);

/// Mean Sobel magnitude on the generated band over that on the context band.
double cbgd(const Field& recon, const Mask& ctx, const Mask& gen_region);

struct EvalCase {
  Mask eval_mask;    // the sample's authentic observation
  Mask overlay;      // drawn from the held-out pool
  Mask input_mask;   // overlay AND eval_mask
  Mask eval_region;  // eval_mask AND NOT input_mask
};

EvalCase make_eval_case(const Mask& eval_mask, const Mask& overlay);

/// Draws overlays from `pool` until both the input and eval region are
/// non-empty (at most 100 draws).
EvalCase build_eval_case(const Mask& eval_mask, std::span<const Mask> pool, std::uint64_t seed);

struct QueryProbGrid {
  int height = 0;
  int width = 0;
  int n_ens = 0;
  Mask valid;
  std::vector<int> counts;
  std::vector<double> values;  // counts / n_ens at valid pixels, NaN elsewhere

  double min_valid() const;
  double mean_valid() const;
};

using PartitionGenerator = std::function<Partition(std::uint64_t seed)>;

QueryProbGrid query_prob_heatmap(const Mask& observed, const PartitionGenerator& generator,
                                 int n_ens, std::uint64_t seed);

/// Plain PGM (P2); values in [0, 1] quantized to 0..255, absent pixels to 0.
void write_pgm(const std::filesystem::path& path, int height, int width,
               std::span<const double> values);
void write_heatmap(const std::filesystem::path& pgm_path, const std::filesystem::path& grd_path,
                   const QueryProbGrid& grid);

struct MetricRow {
  std::string sample_id;
  double mse = 0.0;
  double psnr = 0.0;
  double cbgd = 0.0;  // NaN when undefined
  std::size_t n_eval_pixels = 0;
};

void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricRow> rows);

}  // namespace oamp
