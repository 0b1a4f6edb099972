#include "oamp/mask_prior.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "oamp/errors.hpp"
#include "oamp/rng.hpp"

namespace oamp {

void ScaledLogitCodec::validate() const {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ConfigError("kappa must be positive");
}

Tensor ScaledLogitCodec::encode(const Mask& mask) const {
  validate();
  Tensor x(kMaskClasses, mask.height(), mask.width());
  const std::size_t hw = mask.size();
  for (std::size_t i = 0; i < hw; ++i) {
    x.data[i] = mask[i] ? kappa : 0.0;
    x.data[hw + i] = mask[i] ? 0.0 : kappa;
  }
  return x;
}

Tensor ScaledLogitCodec::one_hot(const Mask& mask) const {
  return ScaledLogitCodec{1.0}.encode(mask);
}

Tensor encode_mask(const ScaledLogitCodec& codec, const Mask& mask) { return codec.encode(mask); }

Mask decode(const Tensor& x0) {
  if (x0.channels != kMaskClasses) throw DimensionError("decode expects two channels");
  std::vector<std::uint8_t> bits(x0.plane_size());
  const std::size_t hw = x0.plane_size();
  for (std::size_t i = 0; i < hw; ++i) {
    if (!std::isfinite(x0.data[i]) || !std::isfinite(x0.data[hw + i])) {
      throw NumericalError("decode: non-finite latent");
    }
    bits[i] = x0.data[i] > x0.data[hw + i] ? 1 : 0;
  }
  return Mask(x0.height, x0.width, std::move(bits));
}

void PriorTrainConfig::validate() const {
  if (steps < 1) throw ConfigError("prior steps must be >= 1");
  if (batch < 1) throw ConfigError("prior batch must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("prior learning rate must be positive");
  if (weighting != "uniform" && weighting != "snr") {
    throw ConfigError("unknown prior weighting '" + weighting + "'");
  }
  if (t_sampling != "uniform" && t_sampling != "logsnr") {
    throw ConfigError("unknown t sampling '" + t_sampling + "'");
  }
  if (lr_schedule != "constant" && lr_schedule != "cosine") {
    throw ConfigError("unknown learning-rate schedule '" + lr_schedule + "'");
  }
  if (hidden_channels < 1) throw ConfigError("hidden_channels must be >= 1");
  if (coord_features < 0) throw ConfigError("coord_features must be >= 0");
}

double prior_weight(const std::string& weighting, const NoiseSchedule& schedule, double t) {
  if (weighting == "uniform") return 1.0;
  // alpha^2 / sigma^2: the factor that turns noise matching into data matching
  const auto [a, s] = alpha_sigma(schedule, t);
  return (a * a) / (s * s);
}

double scheduled_lr(double base, const std::string& schedule, int step, int total) {
  if (schedule == "constant") return base;
  const double progress = static_cast<double>(step) / static_cast<double>(total);
  return base * (0.1 + 0.45 * (1.0 + std::cos(std::numbers::pi * progress)));
}

double sample_train_time(const std::string& t_sampling, const NoiseSchedule& schedule, Rng& rng) {
  const double u = uniform01(rng);
  if (t_sampling == "uniform") return schedule.t_min + (1.0 - schedule.t_min) * u;
  // uniform in log(alpha^2 / sigma^2) = log((1 - t) / t) between t_min and 1 - t_min
  const double hi = std::log((1.0 - schedule.t_min) / schedule.t_min);
  const double lambda = hi - 2.0 * hi * u;
  return 1.0 / (1.0 + std::exp(lambda));
}

ConvNetSpec prior_net_spec(int hidden_channels, int coord_features) {
  return ConvNetSpec{kMaskClasses, hidden_channels, kMaskClasses, 4, 32, OutputHead::kSoftmax,
                     coord_features};
}

MaskPrior make_untrained_prior(std::uint64_t seed, const ScaledLogitCodec& codec,
                               int hidden_channels, int coord_features) {
  return MaskPrior{NetParams::initialize(prior_net_spec(hidden_channels, coord_features),
                                         {seed, InitScheme::kHeNormalZeroHead}),
                   codec, NoiseSchedule{}};
}

Tensor predict_probs(const MaskPrior& prior, const Tensor& latent, double t) {
  return forward(prior.params, channel_softmax(latent), t);
}

namespace {

Tensor corrupt(const MaskPrior& prior, const Mask& mask, double t, std::span<const double> eps) {
  const Tensor x0 = prior.codec.encode(mask);
  return Tensor(x0.channels, x0.height, x0.width,
                forward_corrupt(prior.schedule, x0.data, t, eps));
}

// Squared error against the one-hot target, summed over channels and averaged
// over pixels.
LossFn squared_error_to(Tensor target, double weight) {
  return [target = std::move(target), weight](const Tensor& out, Tensor& grad) {
    const double inv_pixels = 1.0 / static_cast<double>(out.plane_size());
    double loss = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double r = out.data[i] - target.data[i];
      loss += r * r;
      grad.data[i] = 2.0 * weight * r * inv_pixels;
    }
    return weight * loss * inv_pixels;
  };
}

}  // namespace

double data_matching_loss(const MaskPrior& prior, const Mask& mask, double t,
                          std::span<const double> eps) {
  const Tensor xt = corrupt(prior, mask, t, eps);
  const Tensor out = predict_probs(prior, xt, t);
  Tensor g(out.channels, out.height, out.width);
  return squared_error_to(prior.codec.one_hot(mask), 1.0)(out, g);
}

PriorTrainResult train_prior(std::span<const Mask> masks, const PriorTrainConfig& config,
                             const ScaledLogitCodec& codec, const NoiseSchedule& schedule) {
  config.validate();
  codec.validate();
  schedule.validate();
  if (masks.empty()) throw ValidationError("train_prior: no masks");
  for (const auto& m : masks) require_same_shape(m, masks.front(), "train_prior");

  PriorTrainResult result;
  result.prior = MaskPrior{NetParams::initialize(prior_net_spec(config.hidden_channels, config.coord_features),
                                                 {derive_seed(config.seed, "prior-init"),
                                                  InitScheme::kHeNormalZeroHead}),
                           codec, schedule};
  auto& params = result.prior.params;
  AdamState adam = AdamState::for_params(params, config.learning_rate);
  Rng rng = make_rng(config.seed, "prior-train");
  std::uniform_int_distribution<std::size_t> pick(0, masks.size() - 1);
  const int h = masks.front().height(), w = masks.front().width();
  const std::size_t n = static_cast<std::size_t>(kMaskClasses) * h * w;

  std::vector<BatchItem> batch(static_cast<std::size_t>(config.batch));
  std::vector<double> eps(n);
  result.loss_trace.reserve(static_cast<std::size_t>(config.steps));
  for (int step = 0; step < config.steps; ++step) {
    for (auto& item : batch) {
      const Mask& m = masks[pick(rng)];
      const double t = sample_train_time(config.t_sampling, schedule, rng);
      for (double& e : eps) e = standard_normal(rng);
      item.input = channel_softmax(corrupt(result.prior, m, t, eps));
      item.t = t;
      item.loss = squared_error_to(codec.one_hot(m), prior_weight(config.weighting, schedule, t));
    }
    GradResult g = param_grad(params, batch);
    if (!std::isfinite(g.loss)) {
      std::ostringstream msg;
      msg << "prior training diverged at step " << step;
      throw NumericalError(msg.str());
    }
    result.loss_trace.push_back(g.loss);
    adam.lr = scheduled_lr(config.learning_rate, config.lr_schedule, step, config.steps);
    adam_step(adam, params, g.grad);
  }
  return result;
}

PriorTrainResult train_prior(const DatasetManifest& manifest, const PriorTrainConfig& config,
                             const ScaledLogitCodec& codec, const NoiseSchedule& schedule) {
  const auto masks = load_masks(manifest);
  return train_prior(masks, config, codec, schedule);
}

Tensor initial_latent(int height, int width, std::uint64_t seed) {
  Rng rng = make_rng(seed, "prior-latent");
  Tensor x(kMaskClasses, height, width);
  for (double& v : x.data) v = standard_normal(rng);
  return x;
}

Tensor sample_unconditional_latent(const MaskPrior& prior, int height, int width, int n_steps,
                                   std::uint64_t seed) {
  const auto grid = time_grid(prior.schedule, n_steps);
  Tensor x = initial_latent(height, width, seed);
  for (int i = 0; i < n_steps; ++i) {
    const Tensor e_hat = predict_probs(prior, x, grid[i]);
    std::vector<double> x0_hat(e_hat.size());
    for (std::size_t j = 0; j < x0_hat.size(); ++j) x0_hat[j] = prior.codec.kappa * e_hat.data[j];
    x.data = ode_step(prior.schedule, x.data, x0_hat, grid[i], grid[i + 1]);
    for (double v : x.data) {
      if (!std::isfinite(v)) throw NumericalError("unconditional sampler: non-finite latent");
    }
  }
  return x;
}

Mask sample_unconditional(const MaskPrior& prior, int height, int width, int n_steps,
                          std::uint64_t seed) {
  return decode(sample_unconditional_latent(prior, height, width, n_steps, seed));
}

}  // namespace oamp
