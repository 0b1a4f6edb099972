#include "oamp/guided.hpp"

#include <algorithm>
#include <cmath>

#include "oamp/errors.hpp"
#include "oamp/rng.hpp"

namespace oamp {

void GuidanceConfig::validate() const {
  if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("rho must lie in (0, 1]");
  if (!(scale >= 0.0) || !std::isfinite(scale)) throw ConfigError("guidance scale must be >= 0");
  if (steps < 1) throw ConfigError("steps must be >= 1");
  if (!(clamp > 0.0 && clamp < 0.5)) throw ConfigError("clamp must lie in (0, 0.5)");
}

Mask make_anchor(const Mask& observed, double rho, std::uint64_t seed) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw ValidationError("rho must lie in [0, 1]");
  Rng rng = make_rng(seed, "anchor");
  std::vector<std::uint8_t> bits(observed.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    // draw for every pixel so the stream does not depend on M
    const double r = uniform01(rng);
    bits[i] = (r < rho && observed[i]) ? 1 : 0;
  }
  return Mask(observed.height(), observed.width(), std::move(bits));
}

double guidance_loss(std::span<const double> e_hat, const Mask& anchor, double clamp) {
  if (e_hat.size() != anchor.size()) throw DimensionError("guidance_loss: shape mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < e_hat.size(); ++i) {
    if (!(e_hat[i] >= 0.0 && e_hat[i] <= 1.0)) {
      throw ValidationError("guidance_loss: probability outside [0, 1]");
    }
    const double p = std::clamp(e_hat[i], clamp, 1.0 - clamp);
    total += anchor[i] ? std::log(p) : std::log1p(-p);
  }
  return -total / static_cast<double>(e_hat.size());
}

double guidance_loss(const Tensor& probs, const Mask& anchor, double clamp, Tensor& grad) {
  if (probs.channels != kMaskClasses || probs.height != anchor.height() ||
      probs.width != anchor.width()) {
    throw DimensionError("guidance_loss: shape mismatch");
  }
  const auto e = probs.plane(0);
  const double loss = guidance_loss(e, anchor, clamp);
  const double inv_d = 1.0 / static_cast<double>(e.size());
  std::fill(grad.data.begin(), grad.data.end(), 0.0);
  auto g = grad.plane(0);
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (e[i] < clamp || e[i] > 1.0 - clamp) continue;
    g[i] = anchor[i] ? -inv_d / e[i] : inv_d / (1.0 - e[i]);
  }
  return loss;
}

InputGradResult guidance_gradient(const MaskPrior& prior, const Tensor& latent, double t,
                                  const Mask& anchor, double clamp) {
  const Tensor probs_in = channel_softmax(latent);
  const LossFn loss = [&](const Tensor& out, Tensor& grad) {
    return guidance_loss(out, anchor, clamp, grad);
  };
  InputGradResult r = input_grad(prior.params, loss, probs_in, t);
  r.grad = channel_softmax_backward(probs_in, r.grad);
  return r;
}

GuidedSample guided_sample_full(const MaskPrior& prior, const Mask& observed,
                                const GuidanceConfig& config) {
  config.validate();
  GuidedSample out;
  out.anchor = make_anchor(observed, config.rho, derive_seed(config.seed, "guided-anchor"));
  const auto grid = time_grid(prior.schedule, config.steps);
  Tensor x = initial_latent(observed.height(), observed.width(), config.seed);
  for (int i = 0; i < config.steps; ++i) {
    const double t = grid[i];
    const Tensor e_hat = predict_probs(prior, x, t);
    std::vector<double> x0_hat(e_hat.size());
    for (std::size_t j = 0; j < x0_hat.size(); ++j) x0_hat[j] = prior.codec.kappa * e_hat.data[j];
    std::vector<double> next = ode_step(prior.schedule, x.data, x0_hat, t, grid[i + 1]);
    if (config.scale > 0.0) {
      const InputGradResult g = guidance_gradient(prior, x, t, out.anchor, config.clamp);
      for (std::size_t j = 0; j < next.size(); ++j) next[j] -= config.scale * g.grad.data[j];
      out.final_loss = g.loss;
    } else {
      out.final_loss = guidance_loss(e_hat.plane(0), out.anchor, config.clamp);
    }
    for (double v : next) {
      if (!std::isfinite(v)) throw NumericalError("guided sampler: non-finite latent");
    }
    x.data = std::move(next);
  }
  out.mask = decode(x);
  out.latent = std::move(x);
  return out;
}

Mask guided_sample(const MaskPrior& prior, const Mask& observed, const GuidanceConfig& config) {
  return guided_sample_full(prior, observed, config).mask;
}

}  // namespace oamp
