#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "msgp/dataset.hpp"
#include "msgp/predict.hpp"
#include "msgp/sampler.hpp"

namespace msgp {

struct FitSettings {
  SamplerConfig sampler;
  std::vector<std::size_t> lattice_sizes;  // empty: chosen from the data
  double padding = 2.0;
  std::size_t trend_degree = 2;
  CollisionPolicy collision = CollisionPolicy::error;
  std::size_t chains = 1;
  std::size_t threads = 0;  // 0: min(chains, MSGP_THREADS, hardware)
  double threshold = 0.02;  // dominating-component occupancy fraction

  void validate(std::size_t dims) const;
};

nlohmann::json to_json(const FitSettings& settings);
FitSettings settings_from_json(const nlohmann::json& j);

// Chain c uses the configured seed for c = 0 and a derived seed otherwise.
std::uint64_t chain_seed(std::uint64_t seed, std::size_t chain);

struct FitModel {
  FitSettings settings;
  Dataset data;  // rows with finite outcomes
  LatticeMapping mapping;
  Lattice lattice{std::vector<std::size_t>{2}};
  Trend trend;
  ObservedData observed;  // de-trended, on the lattice
  std::vector<std::string> runner_states;  // ChainRunner::save per chain
  std::vector<PosteriorChain> chains;

  bool finished() const;
};

// Mapping, trend and lattice data; no sweeps yet.
FitModel prepare_fit(const Dataset& data, const FitSettings& settings);
// Advances every chain to `sweeps` total (all remaining if 0). Chains run on
// separate threads; results do not depend on the thread count.
void run_chains(FitModel& model, std::size_t sweeps = 0);
FitModel fit(const Dataset& data, const FitSettings& settings);

// Component labels of one chain ordered by descending posterior-mean
// occupancy, with those fractions.
struct ComponentOrder {
  std::vector<std::size_t> labels;
  std::vector<double> occupancy;
};
ComponentOrder component_order(const PosteriorChain& chain, std::size_t k0);

// pr(z_i = rank r | y) pooled over chains after each chain's own sort.
struct AssignmentSummary {
  std::vector<double> occupancy;            // per rank
  std::vector<std::vector<double>> prob;    // n x k0, per rank
  std::vector<std::size_t> map;             // 0-based rank per observation
  std::size_t effective = 0;
};
AssignmentSummary summarize_assignments(const FitModel& model);

nlohmann::json fit_summary(const FitModel& model);
// Retained draws of all chains, in chain order.
PosteriorChain pooled_chain(const FitModel& model);

// Predictive moments at raw coordinates, trend added back.
PredictionResult predict(const FitModel& model, const std::vector<std::vector<double>>& coords,
                         const KrigingOptions& options = {});

std::string save_checkpoint(const FitModel& model);
FitModel load_checkpoint(const std::string& bytes);
nlohmann::json checkpoint_sidecar(const FitModel& model, const std::string& checkpoint_bytes);

// Held-out window comparison of independently trained MSGP and IGP fits.
struct Window {
  double lo;
  double hi;
};
struct RegionComparison {
  Window window;
  Metrics msgp;
  Metrics igp;
  std::vector<double> x;  // held-out first coordinates
  std::vector<double> truth;
  PredictionResult msgp_prediction;
  PredictionResult igp_prediction;
};
// Each window holds out the rows with lo < x1 < hi; both models train on
// the rest with the same settings apart from the coefficient mode.
std::vector<RegionComparison> compare_models(const Dataset& data, const std::vector<Window>& windows,
                                             const FitSettings& settings, const KrigingOptions& options = {});
nlohmann::json comparison_report(const std::vector<RegionComparison>& regions);
std::string variance_curves_csv(const std::vector<RegionComparison>& regions);

}  // namespace msgp
