#pragma once

#include <cstdint>

#include "oamp/nnet.hpp"

namespace oamp {

struct GradCheckSummary {
  int checked = 0;
  double worst = 0.0;  // largest relative error
};

/// Central differences against param_grad and input_grad on random
/// coordinates of a random-head network, under a random quadratic loss.
GradCheckSummary gradient_check(const ConvNetSpec& spec, int n_coords, std::uint64_t seed);

/// Number of trials (out of n_trials) in which adding a per-pixel constant to
/// both latent channels left the prior network output bitwise unchanged.
int shift_invariance_check(int n_trials, std::uint64_t seed);

/// Trains a small prior on one 4x4 mask and returns the worst relative error
/// between its score and the exact score of the single-atom Gaussian at
/// t = 0.2, 0.5, 0.8.
double single_atom_score_check(std::uint64_t seed);

}  // namespace oamp
