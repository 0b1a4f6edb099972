#pragma once

#include <cstdint>
#include <vector>

#include "oamp/grids.hpp"
#include "oamp/mask_prior.hpp"
#include "oamp/nnet.hpp"

namespace oamp {

struct GuidanceConfig {
  double rho = 0.8;
  double scale = 120.0;
  int steps = 15;
  double clamp = 1e-6;
  std::uint64_t seed = 0;

  void validate() const;
};

/// y_i = 1[r_i < rho] * M_i with independent uniform r_i.
Mask make_anchor(const Mask& observed, double rho, std::uint64_t seed);

/// Cross-entropy between the observed-class probability and the anchor,
/// normalized by the total pixel count. `e_hat` is the observed-class plane.
double guidance_loss(std::span<const double> e_hat, const Mask& anchor, double clamp = 1e-6);

/// Loss over a two-channel probability tensor; writes dL/de_hat into `grad`
/// (zero on the missing-class channel and where the clamp is active).
double guidance_loss(const Tensor& probs, const Mask& anchor, double clamp, Tensor& grad);

/// Gradient of guidance_loss(e_hat(softmax(x), t), y) with respect to the latent x.
InputGradResult guidance_gradient(const MaskPrior& prior, const Tensor& latent, double t,
                                  const Mask& anchor, double clamp);

struct GuidedSample {
  Mask mask;
  Mask anchor;
  Tensor latent;
  /// Guidance loss of the prediction at the last sampling step.
  double final_loss = 0.0;
};

GuidedSample guided_sample_full(const MaskPrior& prior, const Mask& observed,
                                const GuidanceConfig& config);

Mask guided_sample(const MaskPrior& prior, const Mask& observed, const GuidanceConfig& config);

}  // namespace oamp
