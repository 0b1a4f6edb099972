#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "oamp/grids.hpp"
#include "oamp/nnet.hpp"
#include "oamp/rng.hpp"
#include "oamp/schedule.hpp"

namespace oamp {

/// One-hot encoding of a binary mask scaled by kappa. Channel 0 is the class
/// "observed" (bit 1), channel 1 is "missing" (bit 0).
struct ScaledLogitCodec {
  double kappa = 4.0;

  void validate() const;
  Tensor encode(const Mask& mask) const;
  /// One-hot class probabilities e_c (kappa = 1).
  Tensor one_hot(const Mask& mask) const;
};

inline constexpr int kMaskClasses = 2;

Tensor encode_mask(const ScaledLogitCodec& codec, const Mask& mask);

/// Per-pixel argmax over the two channels; ties decode to bit 0 (missing).
Mask decode(const Tensor& x0);

struct PriorTrainConfig {
  int steps = 2000;
  int batch = 8;
  double learning_rate = 2e-3;
  std::string weighting = "uniform";
  std::string t_sampling = "uniform";
  std::string lr_schedule = "constant";  // constant | cosine (decays to 10%)
  std::uint64_t seed = 0;
  int hidden_channels = 32;
  int coord_features = 4;

  void validate() const;
};

/// Trained prior over binary masks: a softmax-headed network predicting the
/// class probabilities e_hat(t, softmax(x_t)).
struct MaskPrior {
  NetParams params;
  ScaledLogitCodec codec;
  NoiseSchedule schedule;
};

struct PriorTrainResult {
  MaskPrior prior;
  std::vector<double> loss_trace;
};

ConvNetSpec prior_net_spec(int hidden_channels = 32, int coord_features = 4);

/// Untrained prior (zero-initialized head, uniform e_hat).
MaskPrior make_untrained_prior(std::uint64_t seed, const ScaledLogitCodec& codec = {},
                               int hidden_channels = 32, int coord_features = 4);

/// Discrete data matching: E[w(t) ||e_hat(t, softmax(x_t)) - e_c||^2], with the
/// squared norm summed over both channels and averaged over pixels.
PriorTrainResult train_prior(std::span<const Mask> masks, const PriorTrainConfig& config,
                             const ScaledLogitCodec& codec = {}, const NoiseSchedule& schedule = {});
PriorTrainResult train_prior(const DatasetManifest& manifest, const PriorTrainConfig& config,
                             const ScaledLogitCodec& codec = {}, const NoiseSchedule& schedule = {});

/// e_hat for a latent: forward(softmax(x), t).
Tensor predict_probs(const MaskPrior& prior, const Tensor& latent, double t);

/// The per-sample loss at (mask, t, eps); exposed for tests.
double data_matching_loss(const MaskPrior& prior, const Mask& mask, double t,
                          std::span<const double> eps);

/// Learning rate at `step` of `total`: constant, or cosine from base to base / 10.
double scheduled_lr(double base, const std::string& schedule, int step, int total);

/// Training time draw: "uniform" on [t_min, 1], or "logsnr" (uniform in
/// log(alpha^2 / sigma^2) over [t_min, 1 - t_min]).
double sample_train_time(const std::string& t_sampling, const NoiseSchedule& schedule, Rng& rng);

double prior_weight(const std::string& weighting, const NoiseSchedule& schedule, double t);

/// Standard Gaussian latent at t = 1 for the given seed (shared with the
/// guided sampler so that zero guidance reproduces unconditional samples).
Tensor initial_latent(int height, int width, std::uint64_t seed);

Mask sample_unconditional(const MaskPrior& prior, int height, int width, int n_steps,
                          std::uint64_t seed);

/// Final latent of the unconditional sampler (before decoding).
Tensor sample_unconditional_latent(const MaskPrior& prior, int height, int width, int n_steps,
                                   std::uint64_t seed);

}  // namespace oamp
