// oamp: command-line pipeline (synthetic data, mask prior, guided partitions,
// imputer training, imputation, evaluation, verification).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "oamp/errors.hpp"
#include "oamp/guided.hpp"
#include "oamp/imputer.hpp"
#include "oamp/io.hpp"
#include "oamp/mask_prior.hpp"
#include "oamp/metrics.hpp"
#include "oamp/partitioning.hpp"
#include "oamp/selfcheck.hpp"
#include "oamp/synth.hpp"
#include "run_config.hpp"

using namespace oamp;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

struct Args {
  std::string config_path;
  std::optional<long long> seed;
  std::string out;
  std::optional<double> rho, guidance_scale;
  std::optional<int> steps, ensemble, trials;
  std::optional<std::string> sampler, strategy;
  std::optional<std::string> data, prior, imputer, predictions, observed;
  bool guided = false;
};

// --- shared helpers ------------------------------------------------------------

DatasetManifest open_dataset(const cli::RunConfig& cfg) {
  const std::string dir = cfg.text("data");
  if (dir.empty()) throw ConfigError("--data is required");
  return load_manifest(fs::path(dir) / "manifest.json");
}

std::size_t train_count(const cli::RunConfig& cfg, const DatasetManifest& man) {
  const double f = cfg.number("data.train_fraction");
  if (!(f > 0.0 && f < 1.0)) throw ConfigError("data.train_fraction must be in (0, 1)");
  const auto n = static_cast<std::size_t>(std::floor(f * static_cast<double>(man.samples.size())));
  if (n == 0 || n >= man.samples.size()) throw ConfigError("train/held-out split leaves an empty side");
  return n;
}

void write_loss_trace(const fs::path& path, const std::vector<double>& trace) {
  std::ostringstream os;
  os.precision(17);
  os << "step,loss\n";
  for (std::size_t i = 0; i < trace.size(); ++i) os << i << ',' << trace[i] << '\n';
  io::write_atomic(path, os.str());
}

void write_json(const fs::path& path, const json& j) { io::write_atomic(path, j.dump(2) + "\n"); }

std::shared_ptr<const MaskPrior> open_prior(const cli::RunConfig& cfg) {
  const std::string dir = cfg.text("prior");
  if (dir.empty()) throw ConfigError("--prior is required");
  const json meta = json::parse(io::read_text(fs::path(dir) / "prior.json"));
  MaskPrior p;
  p.params = load_checkpoint(fs::path(dir) / "prior.ckpt");
  p.codec.kappa = meta.at("kappa").get<double>();
  p.schedule.t_min = meta.at("t_min").get<double>();
  p.codec.validate();
  p.schedule.validate();
  return std::make_shared<const MaskPrior>(std::move(p));
}

GuidanceConfig guidance_config(const cli::RunConfig& cfg, std::uint64_t seed) {
  GuidanceConfig g;
  g.rho = cfg.number("guidance.rho");
  g.scale = cfg.number("guidance.scale");
  g.steps = cfg.integer("guidance.steps");
  g.clamp = cfg.number("guidance.clamp");
  g.seed = seed;
  g.validate();
  return g;
}

PartitionStrategy strategy_by_name(const std::string& name, const cli::RunConfig& cfg,
                                   const std::vector<Mask>& pool) {
  if (name == "guided") return strategy::Guided{open_prior(cfg), guidance_config(cfg, 0)};
  if (name == "unconditional") {
    return strategy::UnconditionalPrior{open_prior(cfg), cfg.integer("strategy.unconditional_steps")};
  }
  if (name == "pixel") return strategy::PixelLevel{cfg.number("strategy.r_ctx"), cfg.number("strategy.r_qry")};
  if (name == "block") {
    return strategy::BlockWise{cfg.integer("strategy.block_grid"), cfg.number("strategy.r_ctx"),
                               cfg.number("strategy.r_qry")};
  }
  if (name == "saliency") return strategy::SaliencyDriven{cfg.number("strategy.r_ctx")};
  if (name == "empirical") return strategy::Empirical{std::make_shared<const std::vector<Mask>>(pool)};
  throw ConfigError("unknown strategy '" + name +
                    "' (guided, pixel, block, saliency, empirical, unconditional)");
}

SamplerConfig sampler_config(const cli::RunConfig& cfg) {
  SamplerConfig s = sampler_from_name(cfg.text("impute.sampler"));
  const int k = cfg.integer("impute.ensemble");
  const int steps = cfg.integer("impute.steps");
  std::visit(overloaded{
                 [&](sampler::DirectProjection& d) { d.k_ens = k; },
                 [&](sampler::Proximal& p) {
                   p.k_ens = k;
                   p.delta = cfg.number("impute.delta");
                 },
                 [&](sampler::IterativeConditioning& c) {
                   c.k_ens = k;
                   c.steps = steps;
                 },
                 [&](sampler::Repaint& r) {
                   r.k_ens = k;
                   r.steps = steps;
                   r.jump = cfg.integer("impute.jump");
                   r.frequency = cfg.integer("impute.frequency");
                 },
                 [&](sampler::RecursiveJump& r) {
                   r.k_ens = k;
                   r.steps = steps;
                   r.stages = cfg.integer("impute.stages");
                 },
             },
             s);
  validate(s);
  return s;
}

std::string sample_id(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu", index);
  return buf;
}

fs::path out_dir(const Args& a) {
  if (a.out.empty()) throw ConfigError("--out is required");
  fs::create_directories(a.out);
  return a.out;
}

// --- subcommands ---------------------------------------------------------------

void run_synth(const cli::RunConfig& cfg, const fs::path& out) {
  SynthConfig sc;
  sc.height = cfg.integer("synth.height");
  sc.width = cfg.integer("synth.width");
  sc.corr_length = cfg.number("synth.corr_length");
  sc.style = cfg.text("synth.style");
  sc.coverage = cfg.number("synth.coverage");
  sc.land_fraction = cfg.number("synth.land_fraction");
  sc.samples = cfg.integer("synth.samples");
  sc.seed = cfg.seed();
  gen_dataset(sc, out);
}

void run_train_prior(const cli::RunConfig& cfg, const fs::path& out) {
  const auto man = open_dataset(cfg);
  auto masks = load_masks(man);
  masks.resize(train_count(cfg, man));
  PriorTrainConfig pc;
  pc.steps = cfg.integer("prior.steps");
  pc.batch = cfg.integer("prior.batch");
  pc.learning_rate = cfg.number("prior.learning_rate");
  pc.weighting = cfg.text("prior.weighting");
  pc.t_sampling = cfg.text("prior.t_sampling");
  pc.lr_schedule = cfg.text("prior.lr_schedule");
  pc.hidden_channels = cfg.integer("prior.hidden_channels");
  pc.coord_features = cfg.integer("prior.coord_features");
  pc.seed = cfg.seed();
  ScaledLogitCodec codec{cfg.number("prior.kappa")};
  NoiseSchedule schedule;
  schedule.t_min = cfg.number("prior.t_min");
  const auto r = train_prior(masks, pc, codec, schedule);
  save_checkpoint(out / "prior.ckpt", r.prior.params);
  write_json(out / "prior.json", {{"kappa", codec.kappa}, {"t_min", schedule.t_min}});
  write_loss_trace(out / "loss.csv", r.loss_trace);
}

void run_sample_mask(const cli::RunConfig& cfg, const fs::path& out) {
  const auto prior = open_prior(cfg);
  const bool guided = cfg.flag("guidance.enabled");
  const std::string observed_path = cfg.text("observed");
  std::optional<Mask> observed;
  if (!observed_path.empty()) observed = load_mask(observed_path);
  if (guided && !observed) throw ConfigError("guided sampling needs --observed");
  const int h = observed ? observed->height() : cfg.integer("sample.height");
  const int w = observed ? observed->width() : cfg.integer("sample.width");
  const int k_ens = cfg.integer("sample.ensemble");
  if (k_ens < 1) throw ConfigError("sample.ensemble must be >= 1");

  std::vector<double> mean(static_cast<std::size_t>(h) * w, 0.0);
  json losses = json::array();
  for (int k = 0; k < k_ens; ++k) {
    const std::uint64_t s = derive_seed(cfg.seed(), "sample-mask", static_cast<std::uint64_t>(k));
    Mask m;
    if (guided) {
      const auto g = guided_sample_full(*prior, *observed, guidance_config(cfg, s));
      m = g.mask;
      losses.push_back(g.final_loss);
    } else {
      m = sample_unconditional(*prior, h, w, cfg.integer("guidance.steps"), s);
    }
    save_grid(out / ("mask_" + sample_id(static_cast<std::size_t>(k)) + ".grd"), m);
    for (std::size_t i = 0; i < m.size(); ++i) mean[i] += m[i] / static_cast<double>(k_ens);
  }
  if (k_ens > 1) {
    std::vector<double> sd(mean.size());
    // binary draws: the per-pixel variance is p (1 - p)
    for (std::size_t i = 0; i < sd.size(); ++i) sd[i] = std::sqrt(mean[i] * (1.0 - mean[i]));
    save_grid(out / "ensemble_mean.grd", ValueGrid{h, w, mean});
    save_grid(out / "ensemble_std.grd", ValueGrid{h, w, sd});
  }
  if (guided) write_json(out / "guidance_loss.json", losses);
}

void run_train_imputer(const cli::RunConfig& cfg, const fs::path& out) {
  const auto man = open_dataset(cfg);
  auto samples = load_samples(man);
  samples.resize(train_count(cfg, man));
  std::vector<Mask> pool;
  for (const auto& s : samples) pool.push_back(s.mask);
  ImputerTrainConfig ic;
  ic.strategy = strategy_by_name(cfg.text("imputer.strategy"), cfg, pool);
  ic.steps = cfg.integer("imputer.steps");
  ic.batch = cfg.integer("imputer.batch");
  ic.learning_rate = cfg.number("imputer.learning_rate");
  ic.p_clean = cfg.number("imputer.p_clean");
  ic.hidden_channels = cfg.integer("imputer.hidden_channels");
  ic.seed = cfg.seed();
  if (const int n = cfg.integer("imputer.bank"); n > 0) {
    ic.bank = std::make_shared<const PartitionBank>(
        build_partition_bank(ic.strategy, samples, n, derive_seed(cfg.seed(), "bank")));
  }
  const auto r = train_imputer(samples, ic);
  save_checkpoint(out / "imputer.ckpt", r.params);
  write_loss_trace(out / "loss.csv", r.loss_trace);
  write_json(out / "train_summary.json", {{"skipped", r.skipped}});
}

void run_impute(const cli::RunConfig& cfg, const fs::path& out) {
  const auto man = open_dataset(cfg);
  const std::string imp_dir = cfg.text("imputer");
  if (imp_dir.empty()) throw ConfigError("--imputer is required");
  const auto params = std::make_shared<const NetParams>(load_checkpoint(fs::path(imp_dir) / "imputer.ckpt"));
  const auto predictor = network_predictor(params);
  const SamplerConfig sampler = sampler_config(cfg);
  const auto samples = load_samples(man);
  const std::size_t first = train_count(cfg, man);
  std::vector<Mask> pool;
  for (std::size_t i = first; i < samples.size(); ++i) pool.push_back(samples[i].mask);

  const std::string gen_name = cfg.text("impute.generator");
  PartitionStrategy gen_strategy;
  if (gen_name == "guided") {
    gen_strategy = strategy::Guided{open_prior(cfg), guidance_config(cfg, 0)};
  } else if (gen_name == "pixel") {
    gen_strategy = strategy::PixelLevel{0.8, 0.2};
  } else {
    throw ConfigError("impute.generator must be guided or pixel");
  }

  json entries = json::array();
  for (std::size_t i = first; i < samples.size(); ++i) {
    const EvalCase ec = build_eval_case(samples[i].mask, pool, derive_seed(cfg.seed(), "eval-case", i));
    const Field masked = samples[i].observed.masked(ec.input_mask);
    const Field input(std::vector<double>(masked.values().begin(), masked.values().end()), ec.input_mask);
    const PartitionGenerator gen = [&](std::uint64_t s) { return partition(gen_strategy, ec.input_mask, nullptr, s); };
    const Field est = impute(predictor, input, sampler, gen, derive_seed(cfg.seed(), "impute", i));
    const std::string id = sample_id(i);
    save_grid(out / (id + ".grd"), est);
    save_grid(out / (id + "_input.grd"), ec.input_mask);
    save_grid(out / (id + "_eval.grd"), ec.eval_region);
    entries.push_back({{"index", i},
                       {"id", id},
                       {"prediction", id + ".grd"},
                       {"input_mask", id + "_input.grd"},
                       {"eval_region", id + "_eval.grd"}});
  }
  write_json(out / "eval_manifest.json", {{"cases", entries}});
}

void run_evaluate(const cli::RunConfig& cfg, const fs::path& out) {
  const auto man = open_dataset(cfg);
  const std::string pred_dir = cfg.text("predictions");
  if (pred_dir.empty()) throw ConfigError("--predictions is required");
  const json em = json::parse(io::read_text(fs::path(pred_dir) / "eval_manifest.json"));
  const Mask land = land_mask(man);

  struct Loaded {
    std::string id;
    Field pred, truth;
    Mask input, region;
  };
  std::vector<Loaded> cases;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& e : em.at("cases")) {
    const auto idx = e.at("index").get<std::size_t>();
    const ValueGrid v = load_values(fs::path(pred_dir) / e.at("prediction").get<std::string>());
    Loaded c{e.at("id").get<std::string>(), Field(v.height, v.width, v.values), load_oracle(man, idx),
             load_mask(fs::path(pred_dir) / e.at("input_mask").get<std::string>()),
             load_mask(fs::path(pred_dir) / e.at("eval_region").get<std::string>())};
    for (std::size_t p = 0; p < c.region.size(); ++p) {
      if (!c.region[p]) continue;
      lo = std::min(lo, c.truth[p]);
      hi = std::max(hi, c.truth[p]);
    }
    cases.push_back(std::move(c));
  }
  if (cases.empty()) throw ValidationError("evaluation manifest lists no cases");
  const double peak = hi - lo;

  std::vector<MetricRow> rows;
  double mse_sum = 0, psnr_sum = 0, cbgd_sum = 0;
  int cbgd_n = 0;
  for (const auto& c : cases) {
    MetricRow r;
    r.sample_id = c.id;
    r.mse = masked_mse(c.pred, c.truth, c.region);
    r.psnr = psnr(r.mse, peak);
    r.n_eval_pixels = c.region.count();
    try {
      r.cbgd = cbgd(c.pred, c.input, subtract(complement(c.input), land));
      cbgd_sum += r.cbgd;
      ++cbgd_n;
    } catch (const UndefinedMetricError&) {
      r.cbgd = std::numeric_limits<double>::quiet_NaN();
    }
    mse_sum += r.mse;
    psnr_sum += r.psnr;
    rows.push_back(r);
  }
  write_metrics_csv(out / "metrics.csv", rows);
  const double n = static_cast<double>(rows.size());
  json summary = {{"cases", rows.size()}, {"peak", peak}, {"mse", mse_sum / n}, {"cbgd_defined", cbgd_n}};
  const double mean_psnr = psnr_sum / n;
  summary["psnr"] = std::isfinite(mean_psnr) ? json(mean_psnr) : json("inf");
  summary["cbgd"] = cbgd_n > 0 ? json(cbgd_sum / cbgd_n) : json(nullptr);
  write_json(out / "summary.json", summary);
}

void run_heatmap(const cli::RunConfig& cfg, const fs::path& out) {
  const auto man = open_dataset(cfg);
  const auto samples = load_samples(man);
  const std::size_t first = train_count(cfg, man);
  const int chosen = cfg.integer("heatmap.sample");
  const std::size_t idx = chosen < 0 ? first : static_cast<std::size_t>(chosen);
  if (idx >= samples.size()) throw ConfigError("heatmap.sample out of range");
  std::vector<Mask> pool;
  for (std::size_t i = 0; i < first; ++i) pool.push_back(samples[i].mask);
  const auto strat = strategy_by_name(cfg.text("heatmap.strategy"), cfg, pool);
  const Sample& s = samples[idx];
  const auto grid = query_prob_heatmap(
      s.mask, [&](std::uint64_t seed) { return partition(strat, s.mask, &s.observed, seed); },
      cfg.integer("heatmap.ensemble"), cfg.seed());
  write_heatmap(out / "query_prob.pgm", out / "query_prob.grd", grid);
  write_json(out / "summary.json",
             {{"sample", idx}, {"ensemble", grid.n_ens}, {"min", grid.min_valid()}, {"mean", grid.mean_valid()}});
}

bool run_verify(const cli::RunConfig& cfg, const fs::path& out) {
  const auto c = randomized_coverage_campaign(cfg.integer("verify.trials"), cfg.integer("verify.max_dim"), cfg.seed());
  const auto hand = context_marginal_probabilities(
      DiscreteMaskDistribution::uniform(2, {parse_bit_string("10"), parse_bit_string("01"), parse_bit_string("11")}),
      0, 0);
  const int shift_trials = 100;
  const int shift_equal = shift_invariance_check(shift_trials, derive_seed(cfg.seed(), "shift"));
  const auto g_prior = gradient_check(prior_net_spec(), 50, derive_seed(cfg.seed(), "grad-prior"));
  const auto g_imp = gradient_check(imputer_net_spec(), 50, derive_seed(cfg.seed(), "grad-imputer"));
  const double score_err = single_atom_score_check(derive_seed(cfg.seed(), "score"));

  const bool ok_positivity = c.marginal_violations == 0 && c.fixed_violations == 0 && hand.second == 0.5;
  const bool ok_shift = shift_equal == shift_trials;
  const bool ok_grad = g_prior.worst <= 1e-4 && g_imp.worst <= 1e-4;
  const bool ok_score = score_err <= 0.05;
  json report = {
      {"positivity",
       {{"trials", c.trials},
        {"context_marginal", {{"cases", c.marginal_cases}, {"assumption_held", c.marginal_assumption_held}, {"violations", c.marginal_violations}}},
        {"fixed_observation",
         {{"runs", c.fixed_runs}, {"skipped", c.fixed_skipped}, {"cases", c.fixed_cases},
          {"assumption_held", c.fixed_assumption_held}, {"violations", c.fixed_violations}}},
        {"rational_checks", c.rational_checks},
        {"rational_max_error", c.rational_max_error},
        {"hand_case_p_query", hand.second},
        {"passed", ok_positivity}}},
      {"violations", c.marginal_violations + c.fixed_violations},
      {"shift_invariance", {{"trials", shift_trials}, {"bitwise_equal", shift_equal}, {"passed", ok_shift}}},
      {"gradient_check",
       {{"prior", {{"checked", g_prior.checked}, {"worst_relative_error", g_prior.worst}}},
        {"imputer", {{"checked", g_imp.checked}, {"worst_relative_error", g_imp.worst}}},
        {"tolerance", 1e-4},
        {"passed", ok_grad}}},
      {"score_check", {{"worst_relative_error", score_err}, {"tolerance", 0.05}, {"passed", ok_score}}},
      {"passed", ok_positivity && ok_shift && ok_grad && ok_score},
  };
  write_json(out / "report.json", report);
  return report["passed"].get<bool>();
}

void apply_args(cli::RunConfig& cfg, const std::string& command, const Args& a) {
  if (!a.config_path.empty()) cfg.merge_file(a.config_path);
  const std::string locked = cfg.text("command");
  if (!locked.empty() && locked != command) {
    throw ConfigError("config was written for '" + locked + "', not '" + command + "'");
  }
  cfg.set("command", command);
  if (a.seed) cfg.set("seed", *a.seed);
  if (a.data) cfg.set("data", *a.data);
  if (a.prior) cfg.set("prior", *a.prior);
  if (a.imputer) cfg.set("imputer", *a.imputer);
  if (a.predictions) cfg.set("predictions", *a.predictions);
  if (a.observed) cfg.set("observed", *a.observed);
  if (a.rho) cfg.set("guidance.rho", *a.rho);
  if (a.guidance_scale) cfg.set("guidance.scale", *a.guidance_scale);
  if (a.guided) cfg.set("guidance.enabled", true);
  if (a.trials) cfg.set("verify.trials", *a.trials);
  if (a.sampler) cfg.set("impute.sampler", *a.sampler);
  if (a.strategy) cfg.set(command == "heatmap" ? "heatmap.strategy" : "imputer.strategy", *a.strategy);
  if (a.steps) {
    static const std::map<std::string, std::string> key = {{"train-prior", "prior.steps"},
                                                           {"sample-mask", "guidance.steps"},
                                                           {"train-imputer", "imputer.steps"},
                                                           {"impute", "impute.steps"}};
    const auto it = key.find(command);
    if (it == key.end()) throw ConfigError("--steps does not apply to " + command);
    cfg.set(it->second, *a.steps);
  }
  if (a.ensemble) {
    static const std::map<std::string, std::string> key = {
        {"sample-mask", "sample.ensemble"}, {"impute", "impute.ensemble"}, {"heatmap", "heatmap.ensemble"}};
    const auto it = key.find(command);
    if (it == key.end()) throw ConfigError("--ensemble does not apply to " + command);
    cfg.set(it->second, *a.ensemble);
  }
}

void error_line(const char* kind, const std::string& msg) {
  std::cerr << json{{"error", kind}, {"message", msg}}.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mask-prior guided partitioning and imputation of gridded fields"};
  app.require_subcommand(1);
  Args a;

  struct Spec {
    const char* name;
    const char* help;
    bool stochastic;
  };
  const std::vector<Spec> commands = {
      {"synth", "generate a synthetic dataset", true},
      {"train-prior", "train the mask prior", true},
      {"sample-mask", "sample masks from the prior, optionally guided", true},
      {"train-imputer", "train the imputer with a partition strategy", true},
      {"impute", "impute the held-out samples", true},
      {"evaluate", "score predictions against the complete fields", false},
      {"heatmap", "query probability heatmap for one sample", true},
      {"verify", "exact positivity enumeration and numerical self-checks", true},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", a.config_path, "flat JSON config (dotted keys)");
    sub->add_option("--out", a.out, "output directory")->required();
    if (c.stochastic) sub->add_option("--seed", a.seed, "master seed")->required();
    subs[c.name] = sub;
  }
  for (const char* n : {"train-prior", "train-imputer", "impute", "evaluate", "heatmap"}) {
    subs[n]->add_option("--data", a.data, "dataset directory");
  }
  for (const char* n : {"sample-mask", "train-imputer", "impute", "heatmap"}) {
    subs[n]->add_option("--prior", a.prior, "trained prior directory");
  }
  subs["impute"]->add_option("--imputer", a.imputer, "trained imputer directory");
  subs["evaluate"]->add_option("--predictions", a.predictions, "impute output directory");
  subs["sample-mask"]->add_option("--observed", a.observed, "observed mask (.grd)");
  subs["sample-mask"]->add_flag("--guided", a.guided, "guide sampling toward the observed mask");
  for (const char* n : {"sample-mask", "impute"}) {
    subs[n]->add_option("--rho", a.rho, "anchor keep probability");
    subs[n]->add_option("--guidance-scale", a.guidance_scale, "guidance weight");
  }
  subs["train-imputer"]->add_option("--rho", a.rho, "anchor keep probability");
  subs["train-imputer"]->add_option("--guidance-scale", a.guidance_scale, "guidance weight");
  subs["heatmap"]->add_option("--rho", a.rho, "anchor keep probability");
  subs["heatmap"]->add_option("--guidance-scale", a.guidance_scale, "guidance weight");
  for (const char* n : {"train-prior", "sample-mask", "train-imputer", "impute"}) {
    subs[n]->add_option("--steps", a.steps, "training or sampling steps");
  }
  for (const char* n : {"sample-mask", "impute", "heatmap"}) {
    subs[n]->add_option("--ensemble", a.ensemble, "ensemble size");
  }
  subs["impute"]->add_option("--sampler", a.sampler, "direct, proximal, iterative, repaint, recursive-jump");
  subs["train-imputer"]->add_option("--strategy", a.strategy, "partition strategy");
  subs["heatmap"]->add_option("--strategy", a.strategy, "partition strategy");
  subs["verify"]->add_option("--trials", a.trials, "random distributions to enumerate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    error_line("usage", e.what());
    return 1;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    cli::RunConfig cfg;
    apply_args(cfg, command, a);
    const fs::path out = out_dir(a);
    bool ok = true;
    if (command == "synth") run_synth(cfg, out);
    else if (command == "train-prior") run_train_prior(cfg, out);
    else if (command == "sample-mask") run_sample_mask(cfg, out);
    else if (command == "train-imputer") run_train_imputer(cfg, out);
    else if (command == "impute") run_impute(cfg, out);
    else if (command == "evaluate") run_evaluate(cfg, out);
    else if (command == "heatmap") run_heatmap(cfg, out);
    else if (command == "verify") ok = run_verify(cfg, out);
    cfg.write_lock(out);
    if (!ok) {
      error_line("numerical", "verification failed; see report.json");
      return 2;
    }
    return 0;
  } catch (const NumericalError& e) {
    error_line("numerical", e.what());
    return 2;
  } catch (const ValidationError& e) {
    error_line("validation", e.what());
    return 1;
  } catch (const json::exception& e) {
    error_line("validation", e.what());
    return 1;
  } catch (const std::exception& e) {
    error_line("validation", e.what());
    return 1;
  }
}
