#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "oamp/grids.hpp"
#include "oamp/guided.hpp"
#include "oamp/mask_prior.hpp"

namespace oamp {

namespace strategy {

struct Guided {
  std::shared_ptr<const MaskPrior> prior;
  GuidanceConfig guidance;
};

struct PixelLevel {
  double r_ctx = 0.3;
  double r_qry = 0.3;
};

struct BlockWise {
  int grid_d = 8;
  double r_ctx = 0.5;
  double r_qry = 0.5;
};

struct SaliencyDriven {
  double r_ctx = 0.3;
};

struct Empirical {
  std::shared_ptr<const std::vector<Mask>> pool;
};

struct UnconditionalPrior {
  std::shared_ptr<const MaskPrior> prior;
  int steps = 15;
};

}  // namespace strategy

using PartitionStrategy =
    std::variant<strategy::Guided, strategy::PixelLevel, strategy::BlockWise,
                 strategy::SaliencyDriven, strategy::Empirical, strategy::UnconditionalPrior>;

std::string strategy_name(const PartitionStrategy& s);
void validate(const PartitionStrategy& s);

/// Splits the observed mask into context and query. `field` is required by
/// the saliency strategy and ignored by the others.
Partition partition(const PartitionStrategy& s, const Mask& observed, const Field* field,
                    std::uint64_t seed);

// ---------------------------------------------------------------------------
// Exact verifiers over small discrete mask distributions.

/// Masks are bit-vectors of length d stored as integers (bit j = dimension j).
struct DiscreteMaskDistribution {
  int d = 0;
  std::vector<std::uint32_t> support;
  std::vector<double> probs;

  void validate() const;
  static DiscreteMaskDistribution uniform(int d, std::vector<std::uint32_t> support);
};

std::string bit_string(std::uint32_t mask, int d);
std::uint32_t parse_bit_string(const std::string& s);

DiscreteMaskDistribution load_distribution(const std::filesystem::path& path);
void save_distribution(const std::filesystem::path& path, const DiscreteMaskDistribution& dist);

struct ContextMarginalCase {
  std::uint32_t ctx = 0;  // valid context mask m
  int dim = 0;            // i with m_i = 0
  double p_ctx = 0.0;     // P(M_ctx = m)
  double p_query = 0.0;   // P((M_qry)_i = 1 | M_ctx = m)
  bool assumption = false;
  std::optional<std::pair<std::uint32_t, std::uint32_t>> witness;  // (M_a, M_b)
  bool violation = false;
};

struct ContextMarginalReport {
  std::vector<ContextMarginalCase> cases;
  std::size_t assumption_held = 0;
  std::size_t violations = 0;
  /// Largest |float - exact rational| over all probabilities (d <= 4 only).
  std::optional<double> rational_max_error;
};

ContextMarginalReport verify_context_marginal(const DiscreteMaskDistribution& dist);

/// P(M_ctx = ctx) and P((M_qry)_dim = 1 | M_ctx = ctx) by pair enumeration.
std::pair<double, double> context_marginal_probabilities(const DiscreteMaskDistribution& dist,
                                                 std::uint32_t ctx, int dim);

struct FixedObservationCase {
  int dim = 0;               // observed dimension i
  double p_query = 0.0;      // P((M_qry)_i = 1 | C_k), from the partition
  double p_generated_zero = 0.0;  // P(M_hat_i = 0 | C_k)
  bool assumption = false;
  std::optional<std::uint32_t> witness;  // M_hat_a with (M_hat_a)_i = 0
  bool violation = false;
};

struct FixedObservationReport {
  std::vector<std::uint32_t> constrained_support;
  std::vector<double> constrained_probs;
  std::vector<FixedObservationCase> cases;
  std::size_t assumption_held = 0;
  std::size_t violations = 0;
  /// Observed dimensions where the constrained prior collapses (always 1).
  std::vector<int> collapsed;
  std::optional<double> rational_max_error;
};

FixedObservationReport verify_fixed_observation(const DiscreteMaskDistribution& dist, std::uint32_t observed, int k);

struct CampaignSummary {
  int trials = 0;
  std::size_t marginal_cases = 0;
  std::size_t marginal_assumption_held = 0;
  std::size_t marginal_violations = 0;
  int fixed_runs = 0;
  int fixed_skipped = 0;  // empty constrained support
  std::size_t fixed_cases = 0;
  std::size_t fixed_assumption_held = 0;
  std::size_t fixed_violations = 0;
  int rational_checks = 0;
  double rational_max_error = 0.0;

  friend bool operator==(const CampaignSummary&, const CampaignSummary&) = default;
};

DiscreteMaskDistribution random_distribution(int d, std::uint64_t seed);

CampaignSummary randomized_coverage_campaign(int n_trials, int d_max, std::uint64_t seed);

}  // namespace oamp
