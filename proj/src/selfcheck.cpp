#include "oamp/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "oamp/mask_prior.hpp"
#include "oamp/rng.hpp"

namespace oamp {

namespace {

Tensor normal_tensor(int c, int h, int w, Rng& rng) {
  Tensor x(c, h, w);
  for (double& v : x.data) v = standard_normal(rng);
  return x;
}

// sum(a * y + 0.5 * b * y^2) with fixed random a, b
LossFn quadratic_loss(std::size_t n, Rng& rng) {
  std::vector<double> a(n), b(n);
  for (double& v : a) v = standard_normal(rng);
  for (double& v : b) v = std::abs(standard_normal(rng));
  return [a, b](const Tensor& y, Tensor& grad) {
    double loss = 0;
    grad = Tensor(y.channels, y.height, y.width);
    for (std::size_t i = 0; i < y.size(); ++i) {
      loss += a[i] * y.data[i] + 0.5 * b[i] * y.data[i] * y.data[i];
      grad.data[i] = a[i] + b[i] * y.data[i];
    }
    return loss;
  };
}

double rel_err(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
}

}  // namespace

GradCheckSummary gradient_check(const ConvNetSpec& spec, int n_coords, std::uint64_t seed) {
  Rng rng = make_rng(seed, "gradcheck");
  NetParams params = NetParams::initialize(spec, {seed, InitScheme::kHeNormalRandomHead});
  Tensor x = normal_tensor(spec.in_channels, 6, 5, rng);
  if (spec.head == OutputHead::kSoftmax) x = channel_softmax(x);
  const double t = 0.37, h = 1e-5;
  const LossFn loss = quadratic_loss(static_cast<std::size_t>(spec.out_channels) * x.plane_size(), rng);
  auto value = [&](const NetParams& p, const Tensor& in) {
    Tensor g;
    return loss(forward(p, in, t), g);
  };

  GradCheckSummary out;
  const GradResult pg = param_grad(params, std::vector<BatchItem>{{x, t, loss}});
  std::uniform_int_distribution<std::size_t> pick(0, params.values.size() - 1);
  for (int k = 0; k < n_coords; ++k) {
    const std::size_t i = pick(rng);
    const double keep = params.values[i];
    params.values[i] = keep + h;
    const double up = value(params, x);
    params.values[i] = keep - h;
    const double down = value(params, x);
    params.values[i] = keep;
    out.worst = std::max(out.worst, rel_err(pg.grad[i], (up - down) / (2 * h)));
    ++out.checked;
  }

  const InputGradResult ig = input_grad(params, loss, x, t);
  std::uniform_int_distribution<std::size_t> pick_in(0, x.size() - 1);
  for (int k = 0; k < n_coords; ++k) {
    const std::size_t i = pick_in(rng);
    Tensor z = x;
    z.data[i] = x.data[i] + h;
    const double up = value(params, z);
    z.data[i] = x.data[i] - h;
    const double down = value(params, z);
    out.worst = std::max(out.worst, rel_err(ig.grad.data[i], (up - down) / (2 * h)));
    ++out.checked;
  }
  return out;
}

int shift_invariance_check(int n_trials, std::uint64_t seed) {
  Rng rng = make_rng(seed, "shift-check");
  // values on a 2^-8 lattice, so the shifted latent is represented exactly
  std::uniform_int_distribution<int> lattice(-1024, 1024);
  auto dyadic = [&] { return std::ldexp(static_cast<double>(lattice(rng)), -8); };
  int equal = 0;
  for (int trial = 0; trial < n_trials; ++trial) {
    const auto params = NetParams::initialize(prior_net_spec(8, trial % 5),
                                              {derive_seed(seed, "shift-net", trial), InitScheme::kHeNormalRandomHead});
    Tensor x(2, 4 + trial % 4, 5);
    for (double& v : x.data) v = dyadic();
    Tensor shifted = x;
    for (std::size_t i = 0; i < x.plane_size(); ++i) {
      const double c = dyadic();
      shifted.data[i] += c;
      shifted.data[x.plane_size() + i] += c;
    }
    const double t = uniform01(rng);
    equal += forward(params, channel_softmax(shifted), t) == forward(params, channel_softmax(x), t);
  }
  return equal;
}

double single_atom_score_check(std::uint64_t seed) {
  Rng rng = make_rng(seed, "atom-check");
  Mask m = Mask::zeros(4, 4);
  for (std::size_t i = 0; i < m.size(); ++i) m.set(i, uniform01(rng) < 0.5);
  PriorTrainConfig c;
  c.steps = 2000;
  c.batch = 4;
  c.hidden_channels = 12;
  c.coord_features = 2;
  c.learning_rate = 1e-3;
  c.seed = derive_seed(seed, "atom-train");
  const MaskPrior prior = train_prior(std::vector<Mask>{m}, c).prior;
  const Tensor atom = prior.codec.encode(m);
  double worst = 0;
  for (double t : {0.2, 0.5, 0.8}) {
    const auto as = prior.schedule.at(t);
    for (int draw = 0; draw < 5; ++draw) {
      std::vector<double> eps(atom.size());
      for (double& e : eps) e = standard_normal(rng);
      const Tensor xt(2, 4, 4, forward_corrupt(prior.schedule, atom.data, t, eps));
      const auto score =
          tweedie_score(prior.schedule, xt.data, predict_probs(prior, xt, t).data, t, prior.codec.kappa);
      double num = 0, den = 0;
      for (std::size_t i = 0; i < score.size(); ++i) {
        const double exact = (as.alpha * atom.data[i] - xt.data[i]) / (as.sigma * as.sigma);
        num += (score[i] - exact) * (score[i] - exact);
        den += exact * exact;
      }
      worst = std::max(worst, std::sqrt(num / den));
    }
  }
  return worst;
}

}  // namespace oamp
