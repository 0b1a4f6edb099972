#pragma once

#include <span>
#include <string>
#include <vector>

namespace oamp {

struct AlphaSigma {
  double alpha;
  double sigma;
};

/// Variance-preserving schedule alpha(t) = sqrt(1 - t), sigma(t) = sqrt(t).
///
/// Network evaluations happen on [t_min, 1]. t = 0 is accepted as the clean
/// endpoint (alpha = 1, sigma = 0) so that the final reverse step of a sampler
/// lands exactly on the predicted data, and so re-noising can start from it.
struct NoiseSchedule {
  double t_min = 1e-3;
  std::string kind = "vp-linear";

  AlphaSigma at(double t) const;
  /// Validates kind and t_min.
  void validate() const;
};

/// Which reverse update `ode_step` applies.
enum class StepRule {
  /// x' = a' x0 + s' (x - a x0) / s  (deterministic DDIM / probability-flow step)
  kDeterministic,
  /// x' = a' x0 + s' (a x0 - x) / s^2, exactly as printed in the original
  /// mask-generation pseudocode. Kept for comparison only.
  kPrintedVariant,
};

AlphaSigma alpha_sigma(const NoiseSchedule& s, double t);

std::vector<double> forward_corrupt(const NoiseSchedule& s, std::span<const double> x0, double t,
                                    std::span<const double> eps);

/// Noise implied by a data estimate: (x_t - alpha x0_hat) / sigma. Requires t > 0.
std::vector<double> implied_noise(const NoiseSchedule& s, std::span<const double> x_t,
                                  std::span<const double> x0_hat, double t);

/// alpha(t) x0 + sigma(t) eps, for a data estimate and noise that need not come
/// from the same state (the observed/unobserved blends of the inpainting
/// samplers).
std::vector<double> recombine(const NoiseSchedule& s, std::span<const double> x0,
                              std::span<const double> eps, double t);

std::vector<double> ode_step(const NoiseSchedule& s, std::span<const double> x_t,
                             std::span<const double> x0_hat, double t, double t_next,
                             StepRule rule = StepRule::kDeterministic);

/// Jump forward from t to t_up, consistently with the forward marginals.
std::vector<double> renoise(const NoiseSchedule& s, std::span<const double> x_t, double t,
                            double t_up, std::span<const double> eps);

/// (alpha kappa e_hat - x_t) / sigma^2.
std::vector<double> tweedie_score(const NoiseSchedule& s, std::span<const double> x_t,
                                  std::span<const double> e_hat, double t, double kappa);

/// n + 1 times 1 = t_0 > t_1 > ... > t_n = 0, uniform spacing. Evaluation
/// times t_0..t_{n-1} are clamped to at least t_min.
std::vector<double> time_grid(const NoiseSchedule& s, int n_steps);

}  // namespace oamp
