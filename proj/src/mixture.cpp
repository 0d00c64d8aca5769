#include "msgp/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "msgp/error.hpp"

namespace msgp {

MixtureWeights stick_breaking(std::span<const double> v, double alpha) {
  MixtureWeights w{{}, alpha};
  double remaining = 1.0;
  for (double vk : v) {
    if (!(vk > 0.0 && vk < 1.0)) {
      fail(ErrorKind::config, "stick-breaking fractions must lie in (0, 1), got " + std::to_string(vk));
    }
    w.p.push_back(vk * remaining);
    remaining *= 1.0 - vk;
  }
  return w;
}

MixtureWeights sample_weights_posterior(double alpha, std::size_t k0, std::span<const long> counts, Rng& rng) {
  if (k0 == 0) fail(ErrorKind::config, "truncation level k0 must be at least 1");
  if (!(alpha > 0.0)) fail(ErrorKind::config, "Dirichlet concentration alpha must be positive");
  if (counts.size() != k0) fail(ErrorKind::config, "one occupancy count per component required");
  for (long c : counts) {
    if (c < 0) fail(ErrorKind::data, "occupancy counts must be nonnegative");
  }
  MixtureWeights w{std::vector<double>(k0, 0.0), alpha};
  if (k0 == 1) {
    w.p[0] = 1.0;
    return w;
  }
  const double base = alpha / static_cast<double>(k0);
  double total = 0.0;
  for (std::size_t k = 0; k < k0; ++k) {
    w.p[k] = rng.gamma(base + static_cast<double>(counts[k]));
    total += w.p[k];
  }
  if (!(total > 0.0)) {
    // Every gamma draw underflowed (tiny shapes): the Dirichlet mass sits on
    // one vertex, chosen in proportion to the shapes.
    std::vector<double> logw(k0);
    for (std::size_t k = 0; k < k0; ++k) logw[k] = std::log(base + static_cast<double>(counts[k]));
    std::fill(w.p.begin(), w.p.end(), 0.0);
    w.p[sample_log_categorical(logw, rng)] = 1.0;
    return w;
  }
  for (auto& p : w.p) p /= total;
  return w;
}

MixtureWeights sample_weights_prior(double alpha, std::size_t k0, Rng& rng) {
  const std::vector<long> zeros(k0, 0);
  return sample_weights_posterior(alpha, k0, zeros, rng);
}

std::vector<long> occupancy(std::span<const std::size_t> assignments, std::size_t k0) {
  std::vector<long> counts(k0, 0);
  for (auto z : assignments) {
    if (z >= k0) fail(ErrorKind::data, "assignment outside 1..k0");
    ++counts[z];
  }
  return counts;
}

std::size_t effective_components(std::span<const double> weights_or_counts, double threshold) {
  const double total = std::accumulate(weights_or_counts.begin(), weights_or_counts.end(), 0.0);
  if (!(total > 0.0)) return 0;
  return static_cast<std::size_t>(std::count_if(weights_or_counts.begin(), weights_or_counts.end(),
                                                [&](double w) { return w / total > threshold; }));
}

std::size_t effective_components(std::span<const long> counts, double threshold) {
  std::vector<double> w(counts.begin(), counts.end());
  return effective_components(std::span<const double>(w), threshold);
}

std::size_t sample_log_categorical(std::span<const double> log_weights, Rng& rng) {
  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  if (!std::isfinite(top)) {
    if (top == std::numeric_limits<double>::infinity()) {
      return static_cast<std::size_t>(std::max_element(log_weights.begin(), log_weights.end()) -
                                      log_weights.begin());
    }
    fail(ErrorKind::numerical, "categorical draw with no finite log-weight");
  }
  double total = 0.0;
  for (double lw : log_weights) total += std::exp(lw - top);
  double u = rng.uniform() * total;
  for (std::size_t k = 0; k < log_weights.size(); ++k) {
    const double w = std::exp(log_weights[k] - top);
    if (u < w) return k;
    u -= w;
  }
  // Rounding left u marginally above the last bucket.
  for (std::size_t k = log_weights.size(); k-- > 0;) {
    if (log_weights[k] > -std::numeric_limits<double>::infinity()) return k;
  }
  return 0;
}

}  // namespace msgp
