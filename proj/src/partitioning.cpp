#include "oamp/partitioning.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <set>

#include <boost/multiprecision/cpp_int.hpp>

#include "json.hpp"
#include "oamp/errors.hpp"
#include "oamp/io.hpp"
#include "oamp/metrics.hpp"
#include "oamp/rng.hpp"

namespace oamp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void check_ratio(double r, const char* what) {
  if (!(r > 0.0 && r <= 1.0)) throw ConfigError(std::string(what) + " must lie in (0, 1]");
}

Partition finish(Mask ctx, Mask qry, const Mask& observed) {
  const bool disjoint = intersect(ctx, qry).count() == 0;
  return {std::move(ctx), std::move(qry), observed, disjoint};
}

Partition pixel_level(const strategy::PixelLevel& s, const Mask& m, Rng& rng) {
  Mask ctx = Mask::zeros(m.height(), m.width()), qry = ctx;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!m[i]) continue;
    if (uniform01(rng) < s.r_ctx) ctx.set(i, true);
    if (uniform01(rng) < s.r_qry) qry.set(i, true);
  }
  return finish(std::move(ctx), std::move(qry), m);
}

Partition block_wise(const strategy::BlockWise& s, const Mask& m, Rng& rng) {
  const int d = s.grid_d;
  const int n_blocks = d * d;
  const auto n_ctx = static_cast<int>(std::floor(s.r_ctx * n_blocks));
  const auto n_qry = static_cast<int>(std::floor(s.r_qry * n_blocks));
  std::vector<int> ids(static_cast<std::size_t>(n_blocks));
  std::iota(ids.begin(), ids.end(), 0);
  auto choose = [&](int n) {
    std::vector<int> out;
    std::sample(ids.begin(), ids.end(), std::back_inserter(out), n, rng);
    return out;
  };
  const auto ctx_blocks = choose(n_ctx);
  const auto qry_blocks = choose(n_qry);
  auto paint = [&](const std::vector<int>& blocks) {
    Mask out = Mask::zeros(m.height(), m.width());
    for (int b : blocks) {
      const int by = b / d, bx = b % d;
      const int y0 = by * m.height() / d, y1 = (by + 1) * m.height() / d;
      const int x0 = bx * m.width() / d, x1 = (bx + 1) * m.width() / d;
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) out.set(y, x, m(y, x));
      }
    }
    return out;
  };
  return finish(paint(ctx_blocks), paint(qry_blocks), m);
}

Partition saliency(const strategy::SaliencyDriven& s, const Mask& m, const Field* field, Rng& rng) {
  if (field == nullptr) throw ValidationError("saliency partition requires the observed field");
  require_same_shape(field->validity(), m, "saliency partition");
  const auto mag = sobel_magnitude(field->masked(m));
  std::vector<std::size_t> obs;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i]) obs.push_back(i);
  }
  std::stable_sort(obs.begin(), obs.end(),
                   [&](std::size_t a, std::size_t b) { return mag[a] > mag[b]; });
  const std::size_t n_ctx = static_cast<std::size_t>(std::floor(s.r_ctx * static_cast<double>(obs.size())));
  const std::size_t n_half = n_ctx / 2;
  const std::size_t split = obs.size() / 2;
  std::vector<std::size_t> chosen;
  std::sample(obs.begin(), obs.begin() + static_cast<std::ptrdiff_t>(split),
              std::back_inserter(chosen), n_half, rng);
  std::sample(obs.begin() + static_cast<std::ptrdiff_t>(split), obs.end(),
              std::back_inserter(chosen), n_ctx - n_half, rng);
  Mask ctx = Mask::zeros(m.height(), m.width());
  for (std::size_t i : chosen) ctx.set(i, true);
  return finish(ctx, subtract(m, ctx), m);
}

}  // namespace

std::string strategy_name(const PartitionStrategy& s) {
  return std::visit(overloaded{
                        [](const strategy::Guided&) { return std::string("guided"); },
                        [](const strategy::PixelLevel&) { return std::string("pixel"); },
                        [](const strategy::BlockWise&) { return std::string("block"); },
                        [](const strategy::SaliencyDriven&) { return std::string("saliency"); },
                        [](const strategy::Empirical&) { return std::string("empirical"); },
                        [](const strategy::UnconditionalPrior&) { return std::string("unconditional"); },
                    },
                    s);
}

void validate(const PartitionStrategy& s) {
  std::visit(overloaded{
                 [](const strategy::Guided& g) {
                   if (!g.prior) throw ConfigError("guided strategy needs a trained prior");
                   g.guidance.validate();
                 },
                 [](const strategy::PixelLevel& p) {
                   check_ratio(p.r_ctx, "r_ctx");
                   check_ratio(p.r_qry, "r_qry");
                 },
                 [](const strategy::BlockWise& b) {
                   if (b.grid_d < 1) throw ConfigError("grid_d must be >= 1");
                   check_ratio(b.r_ctx, "r_ctx");
                   check_ratio(b.r_qry, "r_qry");
                 },
                 [](const strategy::SaliencyDriven& p) { check_ratio(p.r_ctx, "r_ctx"); },
                 [](const strategy::Empirical& e) {
                   if (!e.pool || e.pool->empty()) throw ConfigError("empirical strategy needs a mask pool");
                 },
                 [](const strategy::UnconditionalPrior& u) {
                   if (!u.prior) throw ConfigError("unconditional strategy needs a trained prior");
                   if (u.steps < 1) throw ConfigError("steps must be >= 1");
                 },
             },
             s);
}

Partition partition(const PartitionStrategy& s, const Mask& observed, const Field* field,
                    std::uint64_t seed) {
  validate(s);
  if (observed.count() == 0) throw ValidationError("partition: empty observed region");
  Rng rng = make_rng(seed, "partition");
  return std::visit(
      overloaded{
          [&](const strategy::Guided& g) {
            GuidanceConfig cfg = g.guidance;
            cfg.seed = derive_seed(seed, "partition-guided");
            return make_partition(observed, guided_sample(*g.prior, observed, cfg));
          },
          [&](const strategy::PixelLevel& p) { return pixel_level(p, observed, rng); },
          [&](const strategy::BlockWise& b) { return block_wise(b, observed, rng); },
          [&](const strategy::SaliencyDriven& p) { return saliency(p, observed, field, rng); },
          [&](const strategy::Empirical& e) {
            std::uniform_int_distribution<std::size_t> pick(0, e.pool->size() - 1);
            const Mask& drawn = (*e.pool)[pick(rng)];
            require_same_shape(drawn, observed, "empirical partition");
            return make_partition(observed, drawn);
          },
          [&](const strategy::UnconditionalPrior& u) {
            return make_partition(
                observed, sample_unconditional(*u.prior, observed.height(), observed.width(),
                                               u.steps, derive_seed(seed, "partition-prior")));
          },
      },
      s);
}

// ---------------------------------------------------------------------------

namespace {

constexpr int kMaxDim = 12;

bool bit(std::uint32_t m, int i) { return (m >> i) & 1U; }

using Rational = boost::multiprecision::cpp_rational;

Rational exact(double p) { return Rational(p); }

}  // namespace

void DiscreteMaskDistribution::validate() const {
  if (d < 1 || d > kMaxDim) throw ValidationError("distribution dimension must lie in [1, 12]");
  if (support.empty()) throw ValidationError("distribution support is empty");
  if (support.size() != probs.size()) throw ValidationError("support and probs differ in length");
  const std::set<std::uint32_t> distinct(support.begin(), support.end());
  if (distinct.size() != support.size()) throw ValidationError("support masks must be distinct");
  double total = 0.0;
  for (std::size_t j = 0; j < support.size(); ++j) {
    if (support[j] >> d) throw ValidationError("support mask wider than d");
    if (!(probs[j] > 0.0)) throw ValidationError("support probabilities must be positive");
    total += probs[j];
  }
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("distribution is not normalized");
}

DiscreteMaskDistribution DiscreteMaskDistribution::uniform(int d, std::vector<std::uint32_t> support) {
  const double p = 1.0 / static_cast<double>(support.size());
  DiscreteMaskDistribution dist{d, std::move(support), {}};
  dist.probs.assign(dist.support.size(), p);
  return dist;
}

std::string bit_string(std::uint32_t mask, int d) {
  std::string s(static_cast<std::size_t>(d), '0');
  for (int i = 0; i < d; ++i) {
    if (bit(mask, i)) s[static_cast<std::size_t>(i)] = '1';
  }
  return s;
}

std::uint32_t parse_bit_string(const std::string& s) {
  if (s.empty() || s.size() > kMaxDim) throw FormatError("bit string length must lie in [1, 12]");
  std::uint32_t m = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '1') {
      m |= 1U << i;
    } else if (s[i] != '0') {
      throw FormatError("bit string may only contain 0 and 1: '" + s + "'");
    }
  }
  return m;
}

DiscreteMaskDistribution load_distribution(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("distribution " + path.string() + ": " + e.what());
  }
  DiscreteMaskDistribution dist;
  try {
    dist.d = j.at("d").get<int>();
    for (const auto& s : j.at("support")) {
      const auto str = s.get<std::string>();
      if (static_cast<int>(str.size()) != dist.d) throw FormatError("support entry length differs from d");
      dist.support.push_back(parse_bit_string(str));
    }
    dist.probs = j.at("probs").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("distribution " + path.string() + ": " + e.what());
  }
  dist.validate();
  return dist;
}

void save_distribution(const std::filesystem::path& path, const DiscreteMaskDistribution& dist) {
  dist.validate();
  nlohmann::json j;
  j["d"] = dist.d;
  j["support"] = nlohmann::json::array();
  for (auto m : dist.support) j["support"].push_back(bit_string(m, dist.d));
  j["probs"] = dist.probs;
  io::write_atomic(path, j.dump(2) + "\n");
}

std::pair<double, double> context_marginal_probabilities(const DiscreteMaskDistribution& dist,
                                                 std::uint32_t ctx, int dim) {
  double p_ctx = 0.0, p_joint = 0.0;
  for (std::size_t a = 0; a < dist.support.size(); ++a) {
    for (std::size_t b = 0; b < dist.support.size(); ++b) {
      const std::uint32_t m1 = dist.support[a], m2 = dist.support[b];
      if ((m1 & m2) != ctx) continue;
      const double p = dist.probs[a] * dist.probs[b];
      p_ctx += p;
      // qry = M1 AND NOT ctx
      if (bit(m1 & ~ctx, dim)) p_joint += p;
    }
  }
  return {p_ctx, p_ctx > 0.0 ? p_joint / p_ctx : 0.0};
}

ContextMarginalReport verify_context_marginal(const DiscreteMaskDistribution& dist) {
  dist.validate();
  ContextMarginalReport report;
  std::set<std::uint32_t> contexts;
  for (auto x : dist.support) {
    for (auto y : dist.support) contexts.insert(x & y);
  }
  const bool rational = dist.d <= 4;
  double max_err = 0.0;
  for (std::uint32_t m : contexts) {
    for (int i = 0; i < dist.d; ++i) {
      if (bit(m, i)) continue;
      ContextMarginalCase c;
      c.ctx = m;
      c.dim = i;
      for (auto a : dist.support) {
        for (auto b : dist.support) {
          if ((a & b) == m && bit(a, i)) {
            c.witness = std::make_pair(a, b);
            break;
          }
        }
        if (c.witness) break;
      }
      c.assumption = c.witness.has_value();
      std::tie(c.p_ctx, c.p_query) = context_marginal_probabilities(dist, m, i);
      c.violation = c.assumption && !(c.p_query > 0.0);
      if (rational) {
        Rational r_ctx = 0, r_joint = 0;
        for (std::size_t a = 0; a < dist.support.size(); ++a) {
          for (std::size_t b = 0; b < dist.support.size(); ++b) {
            if ((dist.support[a] & dist.support[b]) != m) continue;
            const Rational p = exact(dist.probs[a]) * exact(dist.probs[b]);
            r_ctx += p;
            if (bit(dist.support[a], i)) r_joint += p;
          }
        }
        const Rational q = r_joint / r_ctx;
        max_err = std::max({max_err, std::abs(c.p_ctx - static_cast<double>(r_ctx)),
                            std::abs(c.p_query - static_cast<double>(q))});
        if (c.assumption && q <= 0) c.violation = true;
      }
      if (c.assumption) ++report.assumption_held;
      if (c.violation) ++report.violations;
      report.cases.push_back(c);
    }
  }
  if (rational) report.rational_max_error = max_err;
  return report;
}

FixedObservationReport verify_fixed_observation(const DiscreteMaskDistribution& dist, std::uint32_t observed, int k) {
  dist.validate();
  if (observed >> dist.d) throw ValidationError("observed mask wider than d");
  const int n_obs = std::popcount(observed);
  if (!(k > 0 && k < n_obs)) throw ValidationError("fixed-observation check requires 0 < k < |M|");
  FixedObservationReport report;
  double total = 0.0;
  for (std::size_t j = 0; j < dist.support.size(); ++j) {
    if (std::popcount(dist.support[j] & observed) == k) {
      report.constrained_support.push_back(dist.support[j]);
      report.constrained_probs.push_back(dist.probs[j]);
      total += dist.probs[j];
    }
  }
  if (report.constrained_support.empty()) {
    throw ValidationError("fixed-observation check: constrained support is empty");
  }
  for (double& p : report.constrained_probs) p /= total;
  const bool rational = dist.d <= 4;
  double max_err = 0.0;
  for (int i = 0; i < dist.d; ++i) {
    if (!bit(observed, i)) continue;
    FixedObservationCase c;
    c.dim = i;
    for (std::size_t j = 0; j < report.constrained_support.size(); ++j) {
      const std::uint32_t mh = report.constrained_support[j];
      const double p = report.constrained_probs[j];
      const std::uint32_t ctx = mh & observed;
      const std::uint32_t qry = observed & ~ctx;
      if (bit(qry, i)) c.p_query += p;
      if (!bit(mh, i)) {
        c.p_generated_zero += p;
        if (!c.witness) c.witness = mh;
      }
    }
    c.assumption = c.witness.has_value();
    c.violation = (c.assumption && !(c.p_query > 0.0)) ||
                  std::abs(c.p_query - c.p_generated_zero) > 1e-12;
    if (rational) {
      Rational r_total = 0, r_q = 0;
      for (std::size_t j = 0; j < dist.support.size(); ++j) {
        if (std::popcount(dist.support[j] & observed) != k) continue;
        r_total += exact(dist.probs[j]);
        if (!bit(dist.support[j], i)) r_q += exact(dist.probs[j]);
      }
      const Rational q = r_q / r_total;
      max_err = std::max(max_err, std::abs(c.p_query - static_cast<double>(q)));
      if (c.assumption && q <= 0) c.violation = true;
    }
    if (!c.assumption) report.collapsed.push_back(i);
    if (c.assumption) ++report.assumption_held;
    if (c.violation) ++report.violations;
    report.cases.push_back(c);
  }
  if (rational) report.rational_max_error = max_err;
  return report;
}

DiscreteMaskDistribution random_distribution(int d, std::uint64_t seed) {
  if (d < 1 || d > kMaxDim) throw ValidationError("random_distribution: d must lie in [1, 12]");
  Rng rng = make_rng(seed, "coverage-dist");
  const std::uint32_t n_masks = 1U << d;
  const std::uint32_t max_support = std::min<std::uint32_t>(n_masks, 16);
  const auto size = std::uniform_int_distribution<std::uint32_t>(1, max_support)(rng);
  std::vector<std::uint32_t> all(n_masks);
  std::iota(all.begin(), all.end(), 0U);
  std::shuffle(all.begin(), all.end(), rng);
  DiscreteMaskDistribution dist{d, std::vector<std::uint32_t>(all.begin(), all.begin() + size), {}};
  std::sort(dist.support.begin(), dist.support.end());
  double total = 0.0;
  for (std::size_t j = 0; j < size; ++j) {
    dist.probs.push_back(0.05 + uniform01(rng));
    total += dist.probs.back();
  }
  for (double& p : dist.probs) p /= total;
  return dist;
}

CampaignSummary randomized_coverage_campaign(int n_trials, int d_max, std::uint64_t seed) {
  if (n_trials < 0) throw ValidationError("campaign: n_trials must be >= 0");
  if (d_max < 1 || d_max > kMaxDim) throw ValidationError("campaign: d_max must lie in [1, 12]");
  CampaignSummary s;
  Rng rng = make_rng(seed, "coverage-campaign");
  for (int trial = 0; trial < n_trials; ++trial) {
    ++s.trials;
    const int d = std::uniform_int_distribution<int>(1, d_max)(rng);
    const auto dist = random_distribution(d, derive_seed(seed, "trial", static_cast<std::uint64_t>(trial)));
    const auto r1 = verify_context_marginal(dist);
    s.marginal_cases += r1.cases.size();
    s.marginal_assumption_held += r1.assumption_held;
    s.marginal_violations += r1.violations;
    if (r1.rational_max_error) {
      ++s.rational_checks;
      s.rational_max_error = std::max(s.rational_max_error, *r1.rational_max_error);
    }
    if (d < 2) continue;
    // observation with at least two observed dimensions, then a feasible k
    std::uint32_t observed = 0;
    while (std::popcount(observed) < 2) {
      observed = std::uniform_int_distribution<std::uint32_t>(0, (1U << d) - 1)(rng);
    }
    const int k = std::uniform_int_distribution<int>(1, std::popcount(observed) - 1)(rng);
    try {
      const auto r2 = verify_fixed_observation(dist, observed, k);
      ++s.fixed_runs;
      s.fixed_cases += r2.cases.size();
      s.fixed_assumption_held += r2.assumption_held;
      s.fixed_violations += r2.violations;
      if (r2.rational_max_error) {
        ++s.rational_checks;
        s.rational_max_error = std::max(s.rational_max_error, *r2.rational_max_error);
      }
    } catch (const ValidationError&) {
      ++s.fixed_skipped;
    }
  }
  return s;
}

}  // namespace oamp
