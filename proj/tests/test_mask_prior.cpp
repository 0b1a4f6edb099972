#include <cmath>

#include "doctest.h"
#include "oamp/errors.hpp"
#include "oamp/mask_prior.hpp"
#include "support.hpp"

using namespace oamp;

namespace {

PriorTrainConfig quick_config(int steps, std::uint64_t seed) {
  PriorTrainConfig c;
  c.steps = steps;
  c.batch = 4;
  c.hidden_channels = 12;
  c.coord_features = 2;
  c.seed = seed;
  c.learning_rate = 1e-3;
  return c;
}

}  // namespace

TEST_SUITE("mask_prior") {
  TEST_CASE("codec") {
    const ScaledLogitCodec codec;
    const Mask m = test::mask_of(1, 2, {1, 0});
    const Tensor x = codec.encode(m);
    CHECK(x.data == std::vector<double>{4.0, 0.0, 0.0, 4.0});
    const Tensor p = channel_softmax(x);
    CHECK(p.data[0] == doctest::Approx(1.0 / (1.0 + std::exp(-4.0))).epsilon(1e-15));
    CHECK(p.data[0] == doctest::Approx(0.98201).epsilon(1e-5));
    CHECK(p.data[2] == doctest::Approx(0.01798).epsilon(1e-3));
    CHECK(codec.one_hot(m).data == std::vector<double>{1.0, 0.0, 0.0, 1.0});
    CHECK_THROWS_AS(ScaledLogitCodec{0.0}.validate(), ConfigError);

    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
      const Mask r = test::random_mask(5, 6, 0.5, rng);
      CHECK(decode(codec.encode(r)) == r);
    }
  }

  TEST_CASE("decode") {
    CHECK(decode(Tensor(2, 1, 1, std::vector<double>{3.0, 1.0}))[0] == 1);
    CHECK(decode(Tensor(2, 1, 1, std::vector<double>{0.0, 0.0}))[0] == 0);
    CHECK_THROWS_AS(decode(Tensor(3, 1, 1)), DimensionError);
    CHECK_THROWS_AS(decode(Tensor(2, 1, 1, std::vector<double>{NAN, 0.0})), NumericalError);
    Rng rng(2);
    for (int i = 0; i < 50; ++i) {
      Tensor x(2, 4, 4);
      for (double& v : x.data) v = standard_normal(rng);
      Tensor y = x;
      for (double& v : y.data) v = (v + 1.0) / 2.0;
      CHECK(decode(x) == decode(y));
    }
  }

  TEST_CASE("config validation") {
    PriorTrainConfig c;
    c.weighting = "bogus";
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.t_sampling = "bogus";
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.lr_schedule = "bogus";
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.coord_features = -1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK_THROWS_AS(train_prior(std::vector<Mask>{}, PriorTrainConfig{}), ValidationError);
  }

  TEST_CASE("learning-rate schedule and time sampling") {
    CHECK(scheduled_lr(1.0, "constant", 7, 10) == 1.0);
    CHECK(scheduled_lr(1.0, "cosine", 0, 10) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(scheduled_lr(1.0, "cosine", 5, 10) == doctest::Approx(0.55).epsilon(1e-15));
    CHECK(scheduled_lr(1.0, "cosine", 10, 10) == doctest::Approx(0.1).epsilon(1e-15));

    const NoiseSchedule s;
    Rng rng(3);
    int below_half = 0;
    for (int i = 0; i < 2000; ++i) {
      const double t = sample_train_time("logsnr", s, rng);
      CHECK(t >= s.t_min * (1 - 1e-12));
      CHECK(t <= 1 - s.t_min * (1 - 1e-12));
      below_half += t < 0.5;
      const double u = sample_train_time("uniform", s, rng);
      CHECK(u >= s.t_min);
      CHECK(u <= 1.0);
    }
    // log-SNR is symmetric about t = 1/2
    CHECK(std::abs(below_half - 1000) < 3 * std::sqrt(500.0));
    CHECK(prior_weight("uniform", s, 0.3) == 1.0);
    CHECK(prior_weight("snr", s, 0.2) == doctest::Approx(4.0).epsilon(1e-14));
  }

  TEST_CASE("initial loss on a balanced mask is one half") {
    const auto prior = make_untrained_prior(4, {}, 8, 2);
    Rng rng(4);
    const Mask m = test::mask_of(2, 2, {1, 0, 0, 1});
    std::vector<double> eps(8);
    for (double& e : eps) e = standard_normal(rng);
    CHECK(data_matching_loss(prior, m, 0.4, eps) == doctest::Approx(0.5).epsilon(1e-15));
  }

  TEST_CASE("data and noise residuals differ by sigma over alpha") {
    auto prior = make_untrained_prior(5, {}, 8, 1);
    prior.params = NetParams::initialize(prior.params.spec, {5, InitScheme::kHeNormalRandomHead});
    Rng rng(5);
    const Mask m = test::random_mask(4, 4, 0.5, rng);
    const Tensor x0 = prior.codec.encode(m);
    for (double t : {0.1, 0.5, 0.9}) {
      std::vector<double> eps(x0.size());
      for (double& e : eps) e = standard_normal(rng);
      const Tensor xt(2, 4, 4, forward_corrupt(prior.schedule, x0.data, t, eps));
      const Tensor e_hat = predict_probs(prior, xt, t);
      std::vector<double> x0_hat(e_hat.size());
      for (std::size_t i = 0; i < x0_hat.size(); ++i) x0_hat[i] = prior.codec.kappa * e_hat.data[i];
      const auto eps_hat = implied_noise(prior.schedule, xt.data, x0_hat, t);
      const auto [a, s] = alpha_sigma(prior.schedule, t);
      for (std::size_t i = 0; i < x0_hat.size(); ++i) {
        const double data_res = x0_hat[i] - x0.data[i];
        const double noise_res = eps_hat[i] - eps[i];
        CHECK(std::abs(data_res + (s / a) * noise_res) <= 1e-10);
      }
    }
  }

  TEST_CASE("untrained sampler produces a valid mask deterministically") {
    const auto prior = make_untrained_prior(6, {}, 8, 2);
    const Mask a = sample_unconditional(prior, 5, 7, 6, 11);
    const Mask b = sample_unconditional(prior, 5, 7, 6, 11);
    CHECK(a == b);
    CHECK(a.height() == 5);
    CHECK(a.width() == 7);
    // with uniform e_hat the channel order of the initial noise survives every
    // intermediate step; the last step lands on the tie (2, 2), which decodes to 0
    const auto grid = time_grid(prior.schedule, 6);
    Tensor x = initial_latent(5, 7, 11);
    const Mask start = decode(x);
    for (int i = 0; i < 5; ++i) {
      x.data = ode_step(prior.schedule, x.data, std::vector<double>(x.size(), 2.0), grid[i], grid[i + 1]);
      CHECK(decode(x) == start);
    }
    CHECK(a == Mask::zeros(5, 7));
  }

  TEST_CASE("training is deterministic") {
    Rng rng(7);
    const std::vector<Mask> masks = {test::random_mask(4, 4, 0.5, rng), test::random_mask(4, 4, 0.5, rng)};
    const auto a = train_prior(masks, quick_config(30, 9));
    const auto b = train_prior(masks, quick_config(30, 9));
    CHECK(a.loss_trace == b.loss_trace);
    CHECK(a.prior.params == b.prior.params);
    const auto c = train_prior(masks, quick_config(30, 10));
    CHECK(a.loss_trace != c.loss_trace);
  }

  TEST_CASE("single-mask training converges to the mask") {
    const Mask m = test::mask_of(4, 4, {1, 1, 0, 0, 1, 0, 1, 0, 0, 0, 1, 1, 1, 0, 0, 1});
    const auto r = train_prior(std::vector<Mask>{m}, quick_config(2000, 12));
    Rng rng(12);
    const Tensor target = r.prior.codec.one_hot(m);
    Tensor mean(2, 4, 4);
    const int draws = 20;
    for (int k = 0; k < draws; ++k) {
      std::vector<double> eps(target.size());
      for (double& e : eps) e = standard_normal(rng);
      const Tensor xt(2, 4, 4, forward_corrupt(r.prior.schedule, r.prior.codec.encode(m).data,
                                               r.prior.schedule.t_min, eps));
      const Tensor p = predict_probs(r.prior, xt, r.prior.schedule.t_min);
      for (std::size_t i = 0; i < p.size(); ++i) mean.data[i] += p.data[i] / draws;
    }
    for (std::size_t i = 0; i < mean.size(); ++i) CHECK(std::abs(mean.data[i] - target.data[i]) <= 0.05);

    CHECK(sample_unconditional(r.prior, 4, 4, 20, 1) == m);
    int agree = 0, total = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Mask a = sample_unconditional(r.prior, 4, 4, 10, seed);
      const Mask b = sample_unconditional(r.prior, 4, 4, 20, seed);
      agree += static_cast<int>(a.size() - hamming(a, b));
      total += static_cast<int>(a.size());
    }
    CHECK(agree >= 0.8 * total);
  }
}
