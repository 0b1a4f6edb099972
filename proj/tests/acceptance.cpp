// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line and
// the process exits non-zero on failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "gradcheck.hpp"
#include "oamp/errors.hpp"
#include "oamp/guided.hpp"
#include "oamp/imputer.hpp"
#include "oamp/mask_prior.hpp"
#include "oamp/metrics.hpp"
#include "oamp/partitioning.hpp"
#include "oamp/schedule.hpp"
#include "oamp/synth.hpp"

using namespace oamp;
namespace fs = std::filesystem;

namespace {

double now() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// --- 1 ------------------------------------------------------------------------

Outcome positivity_enumeration(const fs::path&) {
  Outcome o;
  const double t0 = now();
  const auto s = randomized_coverage_campaign(200, 6, 1);
  o.require(s.trials == 200, "200 trials");
  o.require(s.marginal_violations == 0, "no context-marginal violations");
  o.require(s.fixed_violations == 0, "no fixed-observation violations");
  o.require(s.marginal_assumption_held > 0 && s.fixed_assumption_held > 0, "assumptions exercised");
  o.require(s.rational_max_error <= 1e-12, "rational cross-check");
  const auto dist = DiscreteMaskDistribution::uniform(2, {parse_bit_string("10"), parse_bit_string("01"),
                                                          parse_bit_string("11")});
  o.require(context_marginal_probabilities(dist, 0, 0).second == 0.5, "hand case = 1/2");
  const double dt = now() - t0;
  o.require(dt < 60.0, "runtime < 1 min");
  o.note(std::to_string(s.marginal_assumption_held) + "+" + std::to_string(s.fixed_assumption_held) +
         " cases checked, " + fmt("%.1fs", dt));
  return o;
}

// --- 2 ------------------------------------------------------------------------

Tensor dyadic_tensor(int c, int h, int w, Rng& rng) {
  Tensor x(c, h, w);
  std::uniform_int_distribution<int> k(-1024, 1024);
  for (double& v : x.data) v = std::ldexp(static_cast<double>(k(rng)), -8);
  return x;
}

Outcome shift_invariance(const fs::path&) {
  Outcome o;
  Rng rng(2);
  int equal = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto spec = prior_net_spec(8 + trial % 3 * 8, trial % 5);
    const auto p = NetParams::initialize(spec, {static_cast<std::uint64_t>(trial), InitScheme::kHeNormalRandomHead});
    const Tensor x = dyadic_tensor(2, 4 + trial % 4, 5, rng);
    Tensor shifted = x;
    for (std::size_t i = 0; i < x.plane_size(); ++i) {
      const double c = dyadic_tensor(1, 1, 1, rng).data[0];
      shifted.data[i] += c;
      shifted.data[x.plane_size() + i] += c;
    }
    const double t = uniform01(rng);
    equal += forward(p, channel_softmax(shifted), t) == forward(p, channel_softmax(x), t);
  }
  o.require(equal == 100, "bitwise equal outputs");
  o.note(std::to_string(equal) + "/100 triples bitwise equal");
  return o;
}

// --- 3 ------------------------------------------------------------------------

Outcome gradient_fidelity(const fs::path&) {
  Outcome o;
  const double t0 = now();
  Rng rng(3);
  double worst = 0;
  const std::vector<std::pair<std::string, ConvNetSpec>> specs = {{"prior", prior_net_spec()},
                                                                  {"imputer", imputer_net_spec()}};
  for (const auto& [name, spec] : specs) {
    const auto p = NetParams::initialize(spec, {7, InitScheme::kHeNormalRandomHead});
    Tensor x = test::random_tensor(spec.in_channels, 6, 5, rng);
    if (spec.head == OutputHead::kSoftmax) x = channel_softmax(x);
    const auto pg = test::check_param_grad(p, x, 0.37, 60, 11);
    const auto ig = test::check_input_grad(p, x, 0.37, 60, 12);
    o.require(pg.checked >= 50 && ig.checked >= 50, name + " coordinates");
    o.require(pg.worst <= 1e-4, name + " parameter gradient");
    o.require(ig.worst <= 1e-4, name + " input gradient");
    worst = std::max({worst, pg.worst, ig.worst});
  }
  const double dt = now() - t0;
  o.require(dt < 120.0, "runtime < 2 min");
  o.note(fmt("worst relative error %.2e", worst) + fmt(", %.1fs", dt));
  return o;
}

// --- 4 ------------------------------------------------------------------------

Outcome schedule_identities(const fs::path&) {
  Outcome o;
  const NoiseSchedule s;
  double worst = 0;
  for (int i = 0; i <= 1000; ++i) {
    const auto as = alpha_sigma(s, i / 1000.0);
    worst = std::max(worst, std::abs(as.alpha * as.alpha + as.sigma * as.sigma - 1.0));
  }
  o.require(worst <= 1e-12, "alpha^2 + sigma^2 = 1");

  Rng rng(4);
  std::vector<double> x(50), x0(50);
  for (double& v : x) v = standard_normal(rng);
  for (double& v : x0) v = standard_normal(rng);
  o.require(ode_step(s, x, x0, 0.4, 0.4) == x, "ode_step fixed point");

  // renoise from t to t_up must give the forward marginal variance at t_up
  {
    const double t = 0.3, t_up = 0.7, mu = 1.5;
    const int n = 20000;
    const auto au = alpha_sigma(s, t_up);
    std::vector<double> eps(n), xt(n), mu_v(n, mu);
    for (double& e : eps) e = standard_normal(rng);
    xt = forward_corrupt(s, mu_v, t, eps);
    for (double& e : eps) e = standard_normal(rng);
    const auto up = renoise(s, xt, t, t_up, eps);
    double mean = 0, var = 0;
    for (double v : up) mean += v / n;
    for (double v : up) var += (v - mean) * (v - mean) / (n - 1);
    const double want_var = au.sigma * au.sigma;
    const double se_var = want_var * std::sqrt(2.0 / (n - 1));
    o.require(std::abs(mean - au.alpha * mu) <= 3 * au.sigma / std::sqrt(n), "renoise mean in 3 sigma band");
    o.require(std::abs(var - want_var) <= 3 * se_var, "renoise variance in 3 sigma band");
  }

  // score of a prior trained on a single mask against the single-atom Gaussian score
  const Mask m = [] {
    Mask k = Mask::zeros(4, 4);
    const int bits[16] = {1, 1, 0, 0, 1, 0, 1, 0, 0, 0, 1, 1, 1, 0, 0, 1};
    for (std::size_t i = 0; i < 16; ++i) k.set(i, bits[i]);
    return k;
  }();
  PriorTrainConfig c;
  c.steps = 2000;
  c.batch = 4;
  c.hidden_channels = 12;
  c.coord_features = 2;
  c.learning_rate = 1e-3;
  c.seed = 12;
  const auto prior = train_prior(std::vector<Mask>{m}, c).prior;
  const Tensor atom = prior.codec.encode(m);
  double worst_rel = 0;
  for (double t : {0.2, 0.5, 0.8}) {
    const auto as = alpha_sigma(prior.schedule, t);
    for (int draw = 0; draw < 5; ++draw) {
      std::vector<double> eps(atom.size());
      for (double& e : eps) e = standard_normal(rng);
      const Tensor xt(2, 4, 4, forward_corrupt(prior.schedule, atom.data, t, eps));
      const Tensor probs = predict_probs(prior, xt, t);
      const auto score = tweedie_score(prior.schedule, xt.data, probs.data, t, prior.codec.kappa);
      double num = 0, den = 0;
      for (std::size_t i = 0; i < score.size(); ++i) {
        const double analytic = (as.alpha * atom.data[i] - xt.data[i]) / (as.sigma * as.sigma);
        num += (score[i] - analytic) * (score[i] - analytic);
        den += analytic * analytic;
      }
      worst_rel = std::max(worst_rel, std::sqrt(num / den));
    }
  }
  o.require(worst_rel <= 0.05, "trained score within 5% of the analytic score");
  o.note(fmt("identity error %.1e", worst) + fmt(", worst score relative error %.4f", worst_rel));
  return o;
}

// --- 5 ------------------------------------------------------------------------

Outcome prior_fit(const fs::path&) {
  Outcome o;
  const double t0 = now();
  std::vector<Mask> masks;
  Rng rng = make_rng(7, "toy");
  for (int k = 0; k < 4; ++k) {
    Mask m = Mask::zeros(8, 8);
    for (std::size_t i = 0; i < 64; ++i) m.set(i, uniform01(rng) < 0.5);
    masks.push_back(m);
  }
  PriorTrainConfig c;
  c.steps = 5000;
  c.batch = 8;
  c.seed = 1;
  c.coord_features = 4;
  c.t_sampling = "logsnr";
  c.lr_schedule = "cosine";
  const auto prior = train_prior(masks, c).prior;
  std::vector<int> counts(5, 0);
  for (int s = 0; s < 500; ++s) {
    const Mask m = sample_unconditional(prior, 8, 8, 20, derive_seed(99, "s", s));
    int hit = 4;
    for (int k = 0; k < 4; ++k) {
      if (m == masks[k]) hit = k;
    }
    ++counts[hit];
  }
  double tv = counts[4] / 500.0;
  for (int k = 0; k < 4; ++k) tv += std::abs(counts[k] / 500.0 - 0.25);
  tv *= 0.5;
  const double exact = 1.0 - counts[4] / 500.0;
  const double dt = now() - t0;
  o.require(exact >= 0.90, "exact-match rate >= 90%");
  o.require(tv <= 0.15, "total variation <= 0.15");
  o.require(dt <= 600.0, "runtime <= 10 min");
  o.note(fmt("exact %.3f", exact) + fmt(", tv %.3f", tv) + fmt(", %.0fs", dt));
  return o;
}

// --- 6, 7 ---------------------------------------------------------------------

struct GuidanceSetup {
  std::vector<Mask> masks;
  std::shared_ptr<const MaskPrior> prior;
};

GuidanceSetup guidance_setup() {
  SynthConfig sc;
  sc.height = sc.width = 16;
  sc.seed = 3;
  GuidanceSetup g;
  for (int i = 0; i < sc.samples; ++i) g.masks.push_back(gen_occlusion(sc, sample_seed(sc, i)));
  PriorTrainConfig pc;
  pc.steps = 3000;
  pc.batch = 8;
  pc.seed = 1;
  pc.t_sampling = "logsnr";
  pc.lr_schedule = "cosine";
  g.prior = std::make_shared<const MaskPrior>(
      train_prior(std::span<const Mask>(g.masks.data(), 80), pc).prior);
  return g;
}

Outcome guidance_efficacy(const fs::path&) {
  Outcome o;
  const double t0 = now();
  const auto g = guidance_setup();
  std::vector<double> loss_guided, loss_plain;
  double agree = 0;
  for (int s = 0; s < 50; ++s) {
    const Mask& m = g.masks[80 + s % 20];
    GuidanceConfig cfg;
    cfg.rho = 1.0;
    cfg.scale = 120.0;
    cfg.seed = derive_seed(5, "pair", s);
    const auto a = guided_sample_full(*g.prior, m, cfg);
    cfg.scale = 0.0;
    const auto b = guided_sample_full(*g.prior, m, cfg);
    loss_guided.push_back(a.final_loss);
    loss_plain.push_back(b.final_loss);
    agree += static_cast<double>(intersect(a.mask, a.anchor).count()) / a.anchor.count() / 50.0;
  }
  // per-pixel spread of 16 guided draws, averaged over observed masks
  double sd_full = 0, sd_partial = 0;
  for (int j = 0; j < 4; ++j) {
    const Mask& m = g.masks[80 + j];
    for (double rho : {1.0, 0.8}) {
      std::vector<double> mean(m.size(), 0.0);
      for (int k = 0; k < 16; ++k) {
        GuidanceConfig cfg;
        cfg.rho = rho;
        cfg.seed = derive_seed(6, "ens", static_cast<std::uint64_t>(j * 100 + k));
        const Mask out = guided_sample(*g.prior, m, cfg);
        for (std::size_t i = 0; i < m.size(); ++i) mean[i] += out[i] / 16.0;
      }
      double sd = 0;
      for (double p : mean) sd += std::sqrt(p * (1 - p)) / static_cast<double>(m.size());
      (rho == 1.0 ? sd_full : sd_partial) += sd / 4;
    }
  }
  const double dt = now() - t0;
  o.require(median(loss_guided) < median(loss_plain), "median guided loss lower");
  o.require(agree >= 0.95, "anchor agreement >= 95%");
  o.require(sd_partial >= sd_full, "rho 0.8 spread >= rho 1 spread");
  o.require(dt <= 600.0, "runtime <= 10 min");
  o.note(fmt("median loss %.4f", median(loss_guided)) + fmt(" vs %.4f", median(loss_plain)) +
         fmt(", agreement %.4f", agree) + fmt(", spread %.4f", sd_partial) + fmt(" vs %.4f", sd_full) +
         fmt(", %.0fs", dt));
  return o;
}

Outcome positivity_in_practice(const fs::path& out) {
  Outcome o;
  const double t0 = now();
  const auto g = guidance_setup();
  const Mask& m = g.masks[95];
  const strategy::Guided guided{g.prior, GuidanceConfig{}};
  const auto grid =
      query_prob_heatmap(m, [&](std::uint64_t s) { return partition(guided, m, nullptr, s); }, 256, 11);
  const auto dropout = query_prob_heatmap(
      m, [&](std::uint64_t s) { return partition(strategy::PixelLevel{}, m, nullptr, s); }, 256, 11);
  fs::create_directories(out);
  write_heatmap(out / "query_prob_guided.pgm", out / "query_prob_guided.grd", grid);
  write_heatmap(out / "query_prob_pixel.pgm", out / "query_prob_pixel.grd", dropout);
  const double dt = now() - t0;
  o.require(grid.min_valid() > 0.0, "query frequency > 0 on every observed pixel");
  o.require(fs::exists(out / "query_prob_pixel.pgm"), "pixel-dropout heatmap written");
  o.require(dt <= 300.0, "runtime <= 5 min");
  o.note(fmt("min frequency %.4f", grid.min_valid()) + fmt(", mean %.4f", grid.mean_valid()) +
         fmt(", %.0fs", dt));
  return o;
}

// --- 8 ------------------------------------------------------------------------

struct EndToEndPlan {
  int prior_steps = 2000;
  int imputer_steps = 5000;
  int imputer_hidden = 32;  // 48 does not fit the time budget on one core
  int bank_per_sample = 4;
  int eval_ensemble = 4;
  int seeds = 3;
};

Outcome end_to_end(const fs::path& out) {
  Outcome o;
  const EndToEndPlan plan;
  const double t0 = now();
  SynthConfig sc;
  sc.seed = 2024;
  const auto manifest = gen_dataset(sc, out / "e2e_data");
  const auto samples = load_samples(manifest);
  const std::vector<Sample> train(samples.begin(), samples.begin() + 80);
  const std::vector<Sample> held(samples.begin() + 80, samples.end());
  std::vector<Mask> train_masks, pool;
  for (const auto& s : train) train_masks.push_back(s.mask);
  for (const auto& s : held) pool.push_back(s.mask);
  const Mask land = land_mask(manifest);

  PriorTrainConfig pc;
  pc.steps = plan.prior_steps;
  pc.batch = 4;
  pc.seed = 1;
  pc.t_sampling = "logsnr";
  pc.lr_schedule = "cosine";
  const auto prior = std::make_shared<const MaskPrior>(train_prior(train_masks, pc).prior);
  const PartitionStrategy guided = strategy::Guided{prior, GuidanceConfig{}};
  const PartitionStrategy uncond = strategy::UnconditionalPrior{prior, 15};
  const PartitionStrategy pixel = strategy::PixelLevel{};
  const auto guided_bank =
      std::make_shared<const PartitionBank>(build_partition_bank(guided, train, plan.bank_per_sample, 7));
  const auto uncond_bank =
      std::make_shared<const PartitionBank>(build_partition_bank(uncond, train, plan.bank_per_sample, 8));

  // evaluation cases and their inference ensembles are shared by all imputers
  struct Case {
    Field input;
    Field oracle;
    Mask region;
    std::vector<Partition> ensemble;
  };
  std::vector<Case> cases;
  for (std::size_t i = 0; i < held.size(); ++i) {
    const EvalCase ec = build_eval_case(held[i].mask, pool, derive_seed(9, "case", i));
    const Field masked = held[i].observed.masked(ec.input_mask);
    Field input(std::vector<double>(masked.values().begin(), masked.values().end()), ec.input_mask);
    const auto gen = [&](std::uint64_t s) { return partition(guided, ec.input_mask, nullptr, s); };
    auto ens = partition_ensemble(ec.input_mask, gen, plan.eval_ensemble, derive_seed(10, "ens", i));
    cases.push_back({std::move(input), load_oracle(manifest, 80 + i), subtract(complement(ec.input_mask), land),
                     std::move(ens)});
  }

  std::map<std::string, std::vector<double>> mse;
  const std::vector<std::tuple<std::string, PartitionStrategy, std::shared_ptr<const PartitionBank>>> arms = {
      {"guided", guided, guided_bank}, {"pixel", pixel, nullptr}, {"unconditional", uncond, uncond_bank}};
  for (int seed = 0; seed < plan.seeds; ++seed) {
    for (const auto& [name, strat, bank] : arms) {
      ImputerTrainConfig ic;
      ic.strategy = strat;
      ic.bank = bank;
      ic.steps = plan.imputer_steps;
      ic.hidden_channels = plan.imputer_hidden;
      ic.seed = derive_seed(100, name, static_cast<std::uint64_t>(seed));
      const auto params = std::make_shared<const NetParams>(train_imputer(train, ic).params);
      const auto pred = network_predictor(params);
      double total = 0;
      for (const auto& c : cases) {
        const Field est(c.input.height(), c.input.width(), ensemble_mean(pred, c.input.values(), c.ensemble));
        total += masked_mse(est, c.oracle, c.region);
      }
      mse[name].push_back(total / static_cast<double>(cases.size()));
      std::printf("  seed %d %-13s oracle-region mse %.4f (%.0fs elapsed)\n", seed, name.c_str(),
                  mse[name].back(), now() - t0);
      std::fflush(stdout);
    }
  }
  const double g = median(mse["guided"]), p = median(mse["pixel"]), u = median(mse["unconditional"]);
  const double dt = now() - t0;
  o.require(g <= p, "guided <= pixel");
  o.require(g <= u, "guided <= unconditional");
  o.require(dt <= 45 * 60.0, "runtime <= 45 min");
  o.note(fmt("median mse guided %.4f", g) + fmt(", pixel %.4f", p) + fmt(", unconditional %.4f", u) +
         fmt(", %.0fs", dt));
  return o;
}

// --- 9 ------------------------------------------------------------------------

Outcome sampler_contracts(const fs::path& out) {
  Outcome o;
  SynthConfig sc;
  sc.height = sc.width = 16;
  sc.samples = 6;
  sc.seed = 17;
  const auto manifest = gen_dataset(sc, out / "sampler_data");
  const auto samples = load_samples(manifest);
  const std::vector<SamplerConfig> all = {sampler::DirectProjection{}, sampler::Proximal{},
                                          sampler::IterativeConditioning{}, sampler::Repaint{},
                                          sampler::RecursiveJump{}};
  const auto net = network_predictor(std::make_shared<const NetParams>(
      NetParams::initialize(imputer_net_spec(8), {5, InitScheme::kHeNormalRandomHead})));
  double iter_worst = 0;
  bool kept = true, direct_exact = true;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Field& obs = samples[i].observed;
    const Mask& m = samples[i].mask;
    const Field sealed = load_oracle(manifest, i);
    const std::vector<double> truth(sealed.values().begin(), sealed.values().end());
    const auto oracle = oracle_predictor(truth);
    const auto gen = [&](std::uint64_t s) { return partition(strategy::PixelLevel{}, m, nullptr, s); };
    for (const auto& s : all) {
      for (const Predictor* pred : {&oracle, &net}) {
        const Field f = impute(*pred, obs, s, gen, i);
        for (std::size_t p = 0; p < f.size(); ++p) {
          if (m[p] && f[p] != obs[p]) kept = false;
        }
        if (pred != &oracle) continue;
        for (std::size_t p = 0; p < f.size(); ++p) {
          if (std::holds_alternative<sampler::DirectProjection>(s) && f[p] != truth[p]) direct_exact = false;
          if (std::holds_alternative<sampler::IterativeConditioning>(s)) {
            iter_worst = std::max(iter_worst, std::abs(f[p] - truth[p]));
          }
        }
      }
    }
  }
  o.require(kept, "observed pixels returned unchanged");
  o.require(direct_exact, "direct projection reproduces the oracle exactly");
  o.require(iter_worst <= 1e-6, "iterative conditioning within 1e-6 of the oracle");
  o.note(fmt("iterative conditioning max error %.2e", iter_worst));
  return o;
}

// --- 10 -----------------------------------------------------------------------

Outcome metric_cases(const fs::path&) {
  Outcome o;
  o.require(psnr(0.01, 1.0) == 20.0 && psnr(0.04, 2.0) == 20.0 && psnr(1.0, 10.0) == 20.0, "psnr cases");
  o.require(std::isinf(psnr(0.0, 1.0)), "psnr of a perfect match");

  const int h = 10, w = 12;
  std::vector<double> ramp(h * w), flat(h * w, 3.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) ramp[y * w + x] = 0.7 * x - 1.3 * y + 0.2;
  }
  Mask ctx = Mask::zeros(h, w), gen = Mask::zeros(h, w);
  Rng rng(10);
  for (int y = 1; y + 1 < h; ++y) {
    for (int x = 1; x + 1 < w; ++x) (uniform01(rng) < 0.5 ? ctx : gen).set(y, x, true);
  }
  const double c = cbgd(Field(h, w, ramp), ctx, gen);
  o.require(std::abs(c - 1.0) <= 1e-9, "cbgd = 1 on a linear ramp");
  bool undefined = false;
  try {
    cbgd(Field(h, w, flat), ctx, gen);
  } catch (const UndefinedMetricError&) {
    undefined = true;
  }
  o.require(undefined, "cbgd undefined on a constant field");
  bool empty = false;
  try {
    masked_mse(Field(h, w, ramp), Field(h, w, flat), Mask::zeros(h, w));
  } catch (const ValidationError&) {
    empty = true;
  }
  o.require(empty, "masked mse rejects an empty region");
  o.note(fmt("cbgd %.12f", c));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  int criterion = 0;
  std::string out = "acceptance_out";
  app.add_option("--criterion", criterion, "criterion number, 0 for all")->check(CLI::Range(0, 10));
  app.add_option("--out", out, "directory for generated artifacts");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome(const fs::path&)>>> checks = {
      {"positivity enumeration", positivity_enumeration},
      {"shift invariance", shift_invariance},
      {"gradient fidelity", gradient_fidelity},
      {"schedule identities", schedule_identities},
      {"prior distribution fit", prior_fit},
      {"guidance efficacy", guidance_efficacy},
      {"positivity in practice", positivity_in_practice},
      {"end-to-end ordering", end_to_end},
      {"sampler contracts", sampler_contracts},
      {"metric cases", metric_cases},
  };
  bool ok = true;
  for (std::size_t k = 0; k < checks.size(); ++k) {
    if (criterion != 0 && static_cast<std::size_t>(criterion) != k + 1) continue;
    Outcome r;
    try {
      r = checks[k].second(out);
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %zu %s: %s\n", r.pass ? "PASS" : "FAIL", k + 1, checks[k].first.c_str(),
                r.detail.c_str());
    std::fflush(stdout);
    ok = ok && r.pass;
  }
  return ok ? 0 : 1;
}
