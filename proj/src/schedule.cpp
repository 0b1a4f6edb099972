#include "oamp/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "oamp/errors.hpp"

namespace oamp {
namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw DimensionError(std::string(what) + ": array sizes differ");
}

}  // namespace

void NoiseSchedule::validate() const {
  if (kind != "vp-linear") throw ConfigError("unknown noise schedule kind '" + kind + "'");
  if (!(t_min > 0.0 && t_min < 1.0)) throw ConfigError("t_min must lie in (0, 1)");
}

AlphaSigma NoiseSchedule::at(double t) const { return alpha_sigma(*this, t); }

AlphaSigma alpha_sigma(const NoiseSchedule& s, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw ValidationError("time " + std::to_string(t) + " outside [0, 1]");
  }
  (void)s;
  return {std::sqrt(1.0 - t), std::sqrt(t)};
}

std::vector<double> forward_corrupt(const NoiseSchedule& s, std::span<const double> x0, double t,
                                    std::span<const double> eps) {
  require_same_size(x0.size(), eps.size(), "forward_corrupt");
  const auto [a, sg] = alpha_sigma(s, t);
  std::vector<double> out(x0.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x0[i] + sg * eps[i];
  return out;
}

std::vector<double> implied_noise(const NoiseSchedule& s, std::span<const double> x_t,
                                  std::span<const double> x0_hat, double t) {
  require_same_size(x_t.size(), x0_hat.size(), "implied_noise");
  const auto [a, sg] = alpha_sigma(s, t);
  if (sg == 0.0) throw NumericalError("implied_noise: sigma(t) = 0");
  std::vector<double> out(x_t.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (x_t[i] - a * x0_hat[i]) / sg;
  return out;
}

std::vector<double> recombine(const NoiseSchedule& s, std::span<const double> x0,
                              std::span<const double> eps, double t) {
  return forward_corrupt(s, x0, t, eps);
}

std::vector<double> ode_step(const NoiseSchedule& s, std::span<const double> x_t,
                             std::span<const double> x0_hat, double t, double t_next,
                             StepRule rule) {
  require_same_size(x_t.size(), x0_hat.size(), "ode_step");
  if (t_next > t) throw ValidationError("ode_step: t_next must not exceed t");
  const auto [a, sg] = alpha_sigma(s, t);
  const auto [an, sn] = alpha_sigma(s, t_next);
  if (sg == 0.0) throw NumericalError("ode_step: sigma(t) = 0");
  std::vector<double> out(x_t.size());
  if (rule == StepRule::kDeterministic) {
    if (t_next == t) return {x_t.begin(), x_t.end()};
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = an * x0_hat[i] + sn * (x_t[i] - a * x0_hat[i]) / sg;
    }
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = an * x0_hat[i] + sn * (a * x0_hat[i] - x_t[i]) / (sg * sg);
    }
  }
  return out;
}

std::vector<double> renoise(const NoiseSchedule& s, std::span<const double> x_t, double t,
                            double t_up, std::span<const double> eps) {
  require_same_size(x_t.size(), eps.size(), "renoise");
  if (t_up < t) throw ValidationError("renoise: t_up must be >= t");
  if (t_up == t) return {x_t.begin(), x_t.end()};
  const auto [a, sg] = alpha_sigma(s, t);
  const auto [au, su] = alpha_sigma(s, t_up);
  if (a == 0.0) throw NumericalError("renoise: alpha(t) = 0");
  const double ratio = au / a;
  const double radicand = su * su - ratio * ratio * sg * sg;
  // Exact arithmetic gives su^2 - (1 - t_up) t / (1 - t) >= 0; allow rounding.
  if (radicand < -1e-12) throw NumericalError("renoise: negative variance increment");
  const double scale = std::sqrt(std::max(radicand, 0.0));
  std::vector<double> out(x_t.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ratio * x_t[i] + scale * eps[i];
  return out;
}

std::vector<double> tweedie_score(const NoiseSchedule& s, std::span<const double> x_t,
                                  std::span<const double> e_hat, double t, double kappa) {
  require_same_size(x_t.size(), e_hat.size(), "tweedie_score");
  const auto [a, sg] = alpha_sigma(s, t);
  if (sg == 0.0) throw NumericalError("tweedie_score: sigma(t) = 0");
  std::vector<double> out(x_t.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(e_hat[i] >= 0.0 && e_hat[i] <= 1.0)) {
      throw ValidationError("tweedie_score: probability outside [0, 1]");
    }
    out[i] = (a * kappa * e_hat[i] - x_t[i]) / (sg * sg);
  }
  return out;
}

std::vector<double> time_grid(const NoiseSchedule& s, int n_steps) {
  if (n_steps < 1) throw ConfigError("time_grid: n_steps must be >= 1");
  std::vector<double> grid(static_cast<std::size_t>(n_steps) + 1);
  for (int i = 0; i <= n_steps; ++i) {
    grid[i] = 1.0 - static_cast<double>(i) / n_steps;
  }
  grid[n_steps] = 0.0;
  for (int i = 0; i < n_steps; ++i) grid[i] = std::max(grid[i], s.t_min);
  return grid;
}

}  // namespace oamp
