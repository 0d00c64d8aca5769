#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

#include "msgp/dataset.hpp"
#include "msgp/lattice.hpp"
#include "msgp/sampler.hpp"

namespace msgp {

// Predictive moments of de-trended outcomes at target sites. The variance
// includes the measurement noise sigma2.
struct PredictionResult {
  std::vector<double> mean;
  std::vector<double> variance;
  Eigen::MatrixXd covariance;  // empty unless requested
  std::vector<std::vector<double>> draw_mean;  // per retained draw, when kept
  std::vector<std::vector<double>> draw_variance;
};

struct KrigingOptions {
  bool covariance = false;
  // Components with p_k at or below this weight are skipped.
  double min_weight = 0.0;
  // posterior_predict only.
  bool keep_draws = false;
  std::size_t thin = 1;
};

// Mixture kriging given labels, component parameters, weights and noise
// (the z, thetas, p and sigma2 fields of `draw`).
PredictionResult krige_msgp(const Lattice& lattice, std::span<const std::size_t> targets,
                            const ObservedData& data, const ChainDraw& draw,
                            const KrigingOptions& options = {});

// Same with covariance zeroed between different labels.
PredictionResult krige_igp(const Lattice& lattice, std::span<const std::size_t> targets,
                           const ObservedData& data, const ChainDraw& draw,
                           const KrigingOptions& options = {});

// Average over retained draws with the law of total variance.
PredictionResult posterior_predict(const Lattice& lattice, std::span<const std::size_t> targets,
                                   const ObservedData& data, const PosteriorChain& chain,
                                   CoefficientMode mode = CoefficientMode::shared,
                                   const KrigingOptions& options = {});

// var_IGP - var_MSGP per target under one shared state.
std::vector<double> efficiency_gap(const Lattice& lattice, std::span<const std::size_t> targets,
                                   const ObservedData& data, const ChainDraw& draw);

struct Metrics {
  double rmse = 0.0;
  double avg_uncertainty = 0.0;
};

Metrics metrics(std::span<const double> mean, std::span<const double> variance, std::span<const double> truth);
inline Metrics metrics(const PredictionResult& r, std::span<const double> truth) {
  return metrics(r.mean, r.variance, truth);
}

}  // namespace msgp
