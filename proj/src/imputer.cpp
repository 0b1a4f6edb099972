#include "oamp/imputer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "oamp/errors.hpp"
#include "oamp/rng.hpp"

namespace oamp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

std::vector<double> masked_values(std::span<const double> x, const Mask& m) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = m[i] ? x[i] : 0.0;
  return out;
}

void require_finite(std::span<const double> x, const char* what) {
  for (double v : x) {
    if (!std::isfinite(v)) throw NumericalError(std::string(what) + ": non-finite state");
  }
}

}  // namespace

ConvNetSpec imputer_net_spec(int hidden_channels) {
  return ConvNetSpec{2, hidden_channels, 1, 4, 32, OutputHead::kLinear};
}

Tensor imputer_input(std::span<const double> ctx_values, const Mask& ctx) {
  if (ctx_values.size() != ctx.size()) throw DimensionError("imputer_input: size mismatch");
  Tensor x(2, ctx.height(), ctx.width());
  for (std::size_t i = 0; i < ctx.size(); ++i) {
    x.data[i] = ctx[i] ? ctx_values[i] : 0.0;
    x.data[ctx.size() + i] = ctx[i];
  }
  return x;
}

Predictor network_predictor(std::shared_ptr<const NetParams> params) {
  return [params = std::move(params)](double t, std::span<const double> values, const Mask& ctx) {
    return forward(*params, imputer_input(values, ctx), t).data;
  };
}

Predictor oracle_predictor(std::vector<double> truth) {
  return [truth = std::move(truth)](double, std::span<const double>, const Mask&) { return truth; };
}

double query_loss(std::span<const double> pred, std::span<const double> target, const Mask& qry,
                  std::span<double> grad) {
  if (pred.size() != qry.size() || target.size() != qry.size()) {
    throw DimensionError("query_loss: size mismatch");
  }
  const std::size_t n = qry.count();
  if (n == 0) throw ValidationError("query_loss: empty query region");
  const double inv = 1.0 / static_cast<double>(n);
  double loss = 0.0;
  for (std::size_t i = 0; i < qry.size(); ++i) {
    double g = 0.0;
    if (qry[i]) {
      const double r = pred[i] - target[i];
      loss += r * r;
      g = 2.0 * r * inv;
    }
    if (!grad.empty()) grad[i] = g;
  }
  return loss * inv;
}

PartitionBank build_partition_bank(const PartitionStrategy& strategy, std::span<const Sample> samples,
                                   int per_sample, std::uint64_t seed) {
  if (per_sample < 1) throw ConfigError("partition bank needs at least one partition per sample");
  PartitionBank bank;
  bank.per_sample.resize(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (int b = 0; b < per_sample; ++b) {
      bank.per_sample[i].push_back(
          partition(strategy, samples[i].mask, &samples[i].observed,
                    derive_seed(seed, "bank", i * static_cast<std::uint64_t>(per_sample) + b)));
    }
  }
  return bank;
}

void ImputerTrainConfig::validate() const {
  if (steps < 1) throw ConfigError("imputer steps must be >= 1");
  if (batch < 1) throw ConfigError("imputer batch must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("imputer learning rate must be positive");
  if (!(p_clean >= 0.0 && p_clean <= 1.0)) throw ConfigError("p_clean must lie in [0, 1]");
  if (hidden_channels < 1) throw ConfigError("hidden_channels must be >= 1");
  if (!bank) oamp::validate(strategy);
}

ImputerTrainResult train_imputer(std::span<const Sample> samples, const ImputerTrainConfig& config,
                                 const NoiseSchedule& schedule) {
  config.validate();
  schedule.validate();
  if (samples.empty()) throw ValidationError("train_imputer: no samples");
  if (config.bank && config.bank->per_sample.size() != samples.size()) {
    throw ConfigError("partition bank does not match the training set");
  }
  ImputerTrainResult result{
      NetParams::initialize(imputer_net_spec(config.hidden_channels),
                            {derive_seed(config.seed, "imputer-init"), InitScheme::kHeNormalZeroHead}),
      {}, 0};
  auto& params = result.params;
  AdamState adam = AdamState::for_params(params, config.learning_rate);
  Rng rng = make_rng(config.seed, "imputer-train");
  std::uniform_int_distribution<std::size_t> pick(0, samples.size() - 1);
  const std::size_t skip_limit = std::max<std::size_t>(samples.size(), 64);
  std::size_t consecutive_skips = 0;

  std::vector<BatchItem> batch;
  std::uint64_t draw = 0;
  for (int step = 0; step < config.steps; ++step) {
    batch.clear();
    while (batch.size() < static_cast<std::size_t>(config.batch)) {
      const std::size_t idx = pick(rng);
      const Sample& s = samples[idx];
      Partition p;
      if (config.bank) {
        const auto& options = config.bank->per_sample[idx];
        p = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
      } else {
        p = partition(config.strategy, s.mask, &s.observed, derive_seed(config.seed, "draw", draw));
      }
      ++draw;
      if (p.qry.count() == 0) {
        ++result.skipped;
        if (++consecutive_skips >= skip_limit) {
          throw ConfigError("train_imputer: every drawn partition had an empty query region");
        }
        continue;
      }
      consecutive_skips = 0;
      const auto u = s.observed.values();
      double t = 0.0;
      std::vector<double> x(u.begin(), u.end());
      if (uniform01(rng) >= config.p_clean) {
        // (t_min, 1]
        t = 1.0 - (1.0 - schedule.t_min) * uniform01(rng);
        const auto [a, sg] = alpha_sigma(schedule, t);
        for (double& v : x) v = a * v + sg * standard_normal(rng);
      }
      std::vector<double> target(u.begin(), u.end());
      Mask qry = p.qry;
      batch.push_back({imputer_input(masked_values(x, p.ctx), p.ctx), t,
                       [target = std::move(target), qry = std::move(qry)](const Tensor& out, Tensor& g) {
                         return query_loss(out.data, target, qry, g.data);
                       }});
    }
    GradResult g = param_grad(params, batch);
    if (!std::isfinite(g.loss)) {
      std::ostringstream msg;
      msg << "imputer training diverged at step " << step;
      throw NumericalError(msg.str());
    }
    result.loss_trace.push_back(g.loss);
    adam_step(adam, params, g.grad);
  }
  return result;
}

ImputerTrainResult train_imputer(const DatasetManifest& manifest, const ImputerTrainConfig& config,
                                 const NoiseSchedule& schedule) {
  const auto samples = load_samples(manifest);
  return train_imputer(samples, config, schedule);
}

// ---------------------------------------------------------------------------

std::string sampler_name(const SamplerConfig& s) {
  return std::visit(overloaded{
                        [](const sampler::DirectProjection&) { return std::string("direct"); },
                        [](const sampler::Proximal&) { return std::string("proximal"); },
                        [](const sampler::IterativeConditioning&) { return std::string("iterative"); },
                        [](const sampler::Repaint&) { return std::string("repaint"); },
                        [](const sampler::RecursiveJump&) { return std::string("recursive-jump"); },
                    },
                    s);
}

SamplerConfig sampler_from_name(const std::string& name) {
  if (name == "direct") return sampler::DirectProjection{};
  if (name == "proximal") return sampler::Proximal{};
  if (name == "iterative") return sampler::IterativeConditioning{};
  if (name == "repaint") return sampler::Repaint{};
  if (name == "recursive-jump") return sampler::RecursiveJump{};
  throw ConfigError("unknown sampler '" + name +
                    "' (expected direct, proximal, iterative, repaint, recursive-jump)");
}

void validate(const SamplerConfig& s, const NoiseSchedule& schedule) {
  auto positive = [](int v, const char* what) {
    if (v < 1) throw ConfigError(std::string(what) + " must be >= 1");
  };
  std::visit(overloaded{
                 [&](const sampler::DirectProjection& c) { positive(c.k_ens, "k_ens"); },
                 [&](const sampler::Proximal& c) {
                   positive(c.k_ens, "k_ens");
                   if (!(c.delta > 0.0 && c.delta <= schedule.t_min)) {
                     throw ConfigError("proximal delta must lie in (0, t_min]");
                   }
                 },
                 [&](const sampler::IterativeConditioning& c) {
                   positive(c.k_ens, "k_ens");
                   positive(c.steps, "steps");
                 },
                 [&](const sampler::Repaint& c) {
                   positive(c.k_ens, "k_ens");
                   positive(c.steps, "steps");
                   positive(c.jump, "jump");
                   positive(c.frequency, "frequency");
                   if (c.jump >= c.frequency) {
                     throw ConfigError("repaint jump must be smaller than its frequency");
                   }
                 },
                 [&](const sampler::RecursiveJump& c) {
                   positive(c.k_ens, "k_ens");
                   positive(c.steps, "steps");
                   positive(c.stages, "stages");
                 },
             },
             s);
}

std::vector<Partition> partition_ensemble(const Mask& observed, const PartitionGenerator& generator,
                                          int k_ens, std::uint64_t seed) {
  if (k_ens < 1) throw ValidationError("partition_ensemble: k_ens must be >= 1");
  std::vector<Partition> out;
  out.reserve(static_cast<std::size_t>(k_ens));
  for (int k = 0; k < k_ens; ++k) {
    Partition p = generator(derive_seed(seed, "ensemble", static_cast<std::uint64_t>(k)));
    require_same_shape(p.ctx, observed, "partition_ensemble");
    if (!is_subset(p.ctx, observed)) throw ValidationError("partition_ensemble: context outside M");
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<double> ensemble_mean(const Predictor& predictor, std::span<const double> x_obs,
                                  std::span<const Partition> ensemble) {
  // running mean, so identical members reproduce their value bit for bit
  std::vector<double> mean(x_obs.size(), 0.0);
  double n = 0;
  for (const auto& p : ensemble) {
    const auto y = predictor(0.0, masked_values(x_obs, p.ctx), p.ctx);
    n += 1;
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += (y[i] - mean[i]) / n;
  }
  return mean;
}

namespace {

// One conditioned reverse step from integer step s to s - 1.
class ConditionedStepper {
 public:
  ConditionedStepper(const Predictor& predictor, const Field& observed, std::vector<double> e_imp,
                     const PartitionGenerator& generator, int total, std::uint64_t seed,
                     const NoiseSchedule& schedule)
      : predictor_(predictor),
        obs_(observed),
        e_imp_(std::move(e_imp)),
        generator_(generator),
        total_(total),
        seed_(seed),
        schedule_(schedule) {}

  double time(int s) const { return static_cast<double>(s) / total_; }

  std::vector<double> step(const std::vector<double>& x, int s) {
    const Mask& m = obs_.validity();
    const double ts = time(s);
    const Partition p = generator_(derive_seed(seed_, "step-ctx", calls_++));
    const auto e_diff =
        predictor_(std::max(ts, schedule_.t_min), masked_values(x, p.ctx), p.ctx);
    const double w = ts;
    const auto [a, sg] = alpha_sigma(schedule_, ts);
    const auto [a_next, sg_next] = alpha_sigma(schedule_, time(s - 1));
    std::vector<double> next(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double x0_hat = w * e_diff[i] + (1.0 - w) * e_imp_[i];
      const double x0_full = m[i] ? obs_[i] : x0_hat;
      const double eps_full = (x[i] - a * x0_full) / sg;
      next[i] = a_next * x0_full + sg_next * eps_full;
    }
    require_finite(next, "conditioned sampler");
    return next;
  }

 private:
  const Predictor& predictor_;
  const Field& obs_;
  std::vector<double> e_imp_;
  const PartitionGenerator& generator_;
  int total_;
  std::uint64_t seed_;
  const NoiseSchedule& schedule_;
  std::uint64_t calls_ = 0;
};

std::vector<double> gaussian(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = standard_normal(rng);
  return v;
}

Field overwrite_observed(const Field& observed, std::span<const double> x) {
  std::vector<double> out(x.begin(), x.end());
  const Mask& m = observed.validity();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (m[i]) out[i] = observed[i];
  }
  require_finite(out, "impute");
  return Field(observed.height(), observed.width(), std::move(out));
}

}  // namespace

Field impute(const Predictor& predictor, const Field& observed, const SamplerConfig& config,
             const PartitionGenerator& generator, std::uint64_t seed, const NoiseSchedule& schedule) {
  validate(config, schedule);
  const Mask& m = observed.validity();
  if (m.count() == 0) throw ValidationError("impute: nothing observed");
  const auto x_obs = observed.values();
  const std::size_t n = observed.size();
  Rng rng = make_rng(seed, "impute-noise");
  const auto ensemble_of = [&](int k) { return partition_ensemble(m, generator, k, seed); };

  return std::visit(
      overloaded{
          [&](const sampler::DirectProjection& c) {
            const auto ens = ensemble_of(c.k_ens);
            return overwrite_observed(observed, ensemble_mean(predictor, x_obs, ens));
          },
          [&](const sampler::Proximal& c) {
            const auto [a, sg] = alpha_sigma(schedule, c.delta);
            std::vector<double> x_delta(n);
            for (std::size_t i = 0; i < n; ++i) x_delta[i] = a * x_obs[i] + sg * standard_normal(rng);
            const auto ens = ensemble_of(c.k_ens);
            std::vector<double> mean(n, 0.0);
            for (const auto& p : ens) {
              const auto y = predictor(c.delta, masked_values(x_delta, p.ctx), p.ctx);
              for (std::size_t i = 0; i < n; ++i) mean[i] += y[i];
            }
            for (double& v : mean) v /= static_cast<double>(ens.size());
            return overwrite_observed(observed, mean);
          },
          [&](const sampler::IterativeConditioning& c) {
            ConditionedStepper stepper(predictor, observed,
                                       ensemble_mean(predictor, x_obs, ensemble_of(c.k_ens)),
                                       generator, c.steps, seed, schedule);
            auto x = gaussian(n, rng);
            for (int s = c.steps; s > 0; --s) x = stepper.step(x, s);
            return overwrite_observed(observed, x);
          },
          [&](const sampler::Repaint& c) {
            ConditionedStepper stepper(predictor, observed,
                                       ensemble_mean(predictor, x_obs, ensemble_of(c.k_ens)),
                                       generator, c.steps, seed, schedule);
            auto x = gaussian(n, rng);
            int s = c.steps;
            long count = 0;
            while (s > 0) {
              const int t = s - 1;
              x = stepper.step(x, s);
              ++count;
              if (count % c.frequency == 0 && t > 0) {
                const int s_new = std::min(t + c.jump, c.steps);
                x = renoise(schedule, x, stepper.time(t), stepper.time(s_new), gaussian(n, rng));
                s = s_new;
              } else {
                s = t;
              }
            }
            return overwrite_observed(observed, x);
          },
          [&](const sampler::RecursiveJump& c) {
            ConditionedStepper stepper(predictor, observed,
                                       ensemble_mean(predictor, x_obs, ensemble_of(c.k_ens)),
                                       generator, c.steps, seed, schedule);
            auto x = gaussian(n, rng);
            int s = c.steps;
            int k = c.stages - 1;
            while (s > 0) {
              const int t = s - 1;
              x = stepper.step(x, s);
              if (t == 0 && k > 0) {
                const int jump_to = static_cast<int>(
                    std::floor(static_cast<double>(k) / c.stages * c.steps));
                x = renoise(schedule, x, 0.0, stepper.time(jump_to), gaussian(n, rng));
                s = jump_to;
                --k;
              } else {
                s = t;
              }
            }
            return overwrite_observed(observed, x);
          },
      },
      config);
}

}  // namespace oamp
