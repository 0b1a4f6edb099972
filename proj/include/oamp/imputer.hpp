#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "oamp/grids.hpp"
#include "oamp/metrics.hpp"
#include "oamp/nnet.hpp"
#include "oamp/partitioning.hpp"
#include "oamp/schedule.hpp"

namespace oamp {

/// u(t, ctx * x, ctx): predicted clean field (H*W values) from the context
/// values and the context mask.
using Predictor =
    std::function<std::vector<double>(double t, std::span<const double> ctx_values, const Mask& ctx)>;

ConvNetSpec imputer_net_spec(int hidden_channels = 48);

/// Stacks (values, ctx) into the two-channel network input.
Tensor imputer_input(std::span<const double> ctx_values, const Mask& ctx);

Predictor network_predictor(std::shared_ptr<const NetParams> params);

/// Ignores its input and returns `truth`.
Predictor oracle_predictor(std::vector<double> truth);

/// ||qry * (pred - target)||^2 / |qry|. Reads `target` only at query pixels.
/// Writes the gradient with respect to `pred` when `grad` is non-empty.
double query_loss(std::span<const double> pred, std::span<const double> target, const Mask& qry,
                  std::span<double> grad = {});

/// Precomputed partitions per training sample.
struct PartitionBank {
  std::vector<std::vector<Partition>> per_sample;
};

PartitionBank build_partition_bank(const PartitionStrategy& strategy, std::span<const Sample> samples,
                                   int per_sample, std::uint64_t seed);

struct ImputerTrainConfig {
  PartitionStrategy strategy = strategy::PixelLevel{};
  int steps = 5000;
  int batch = 1;
  double learning_rate = 1e-3;
  double p_clean = 0.5;  // probability of a t = 0 step
  std::uint64_t seed = 0;
  int hidden_channels = 48;
  /// When set, partitions are drawn from the bank instead of the strategy.
  std::shared_ptr<const PartitionBank> bank;

  void validate() const;
};

struct ImputerTrainResult {
  NetParams params;
  std::vector<double> loss_trace;
  std::size_t skipped = 0;  // draws with an empty query region
};

ImputerTrainResult train_imputer(std::span<const Sample> samples, const ImputerTrainConfig& config,
                                 const NoiseSchedule& schedule = {});
ImputerTrainResult train_imputer(const DatasetManifest& manifest, const ImputerTrainConfig& config,
                                 const NoiseSchedule& schedule = {});

namespace sampler {

struct DirectProjection {
  int k_ens = 8;
};

struct Proximal {
  double delta = 1e-3;
  int k_ens = 8;
};

struct IterativeConditioning {
  int steps = 50;
  int k_ens = 8;
};

struct Repaint {
  int steps = 50;
  int jump = 2;
  int frequency = 4;
  int k_ens = 8;
};

struct RecursiveJump {
  int steps = 50;
  int stages = 3;
  int k_ens = 8;
};

}  // namespace sampler

using SamplerConfig = std::variant<sampler::DirectProjection, sampler::Proximal,
                                   sampler::IterativeConditioning, sampler::Repaint,
                                   sampler::RecursiveJump>;

std::string sampler_name(const SamplerConfig& s);
SamplerConfig sampler_from_name(const std::string& name);
void validate(const SamplerConfig& s, const NoiseSchedule& schedule = {});

std::vector<Partition> partition_ensemble(const Mask& observed, const PartitionGenerator& generator,
                                          int k_ens, std::uint64_t seed);

/// Mean prediction at t = 0 over the ensemble's contexts.
std::vector<double> ensemble_mean(const Predictor& predictor, std::span<const double> x_obs,
                                  std::span<const Partition> ensemble);

/// Fills the unobserved pixels of `observed`; observed pixels are returned
/// unchanged.
Field impute(const Predictor& predictor, const Field& observed, const SamplerConfig& config,
             const PartitionGenerator& generator, std::uint64_t seed,
             const NoiseSchedule& schedule = {});

}  // namespace oamp
