#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "msgp/rng.hpp"

namespace msgp {

// Truncated Dirichlet-process weights.
struct MixtureWeights {
  std::vector<double> p;
  double alpha = 0.5;

  std::size_t k0() const { return p.size(); }
};

// p_1 = v_1, p_k = v_k prod_{k'<k} (1 - v_k'). The returned prefix sums to
// 1 - prod_k (1 - v_k).
MixtureWeights stick_breaking(std::span<const double> v, double alpha = 1.0);

// Draw from Dir(alpha/k0 + counts_k).
MixtureWeights sample_weights_posterior(double alpha, std::size_t k0, std::span<const long> counts, Rng& rng);

// Prior draw from the finite Dir(alpha/k0, ..., alpha/k0) approximation.
MixtureWeights sample_weights_prior(double alpha, std::size_t k0, Rng& rng);

// Component labels are 0-based internally; reports print them 1-based.
std::vector<long> occupancy(std::span<const std::size_t> assignments, std::size_t k0);

// Number of components whose share of the total exceeds `threshold`.
std::size_t effective_components(std::span<const double> weights_or_counts, double threshold = 0.02);
std::size_t effective_components(std::span<const long> counts, double threshold = 0.02);

// Categorical draw from unnormalized log-probabilities (log-sum-exp).
std::size_t sample_log_categorical(std::span<const double> log_weights, Rng& rng);

}  // namespace msgp
