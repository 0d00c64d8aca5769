#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "msgp/dataset.hpp"
#include "msgp/kernels.hpp"
#include "msgp/lattice.hpp"
#include "msgp/mixture.hpp"
#include "msgp/rng.hpp"
#include "msgp/spectral.hpp"

namespace msgp {

// Independent log-uniform prior on every parameter of a family.
struct ThetaPrior {
  std::string family = "se";
  std::size_t dims = 1;
  std::vector<double> lo;
  std::vector<double> hi;

  // phi and rho in [0.1, 100] lattice units, c in [1, 1e5].
  static ThetaPrior defaults(const std::string& family, std::size_t dims);
  bool contains(const Theta& theta) const;
  // -inf outside the support; normalization constants are dropped.
  double log_density(const Theta& theta) const;
  Theta draw(Rng& rng) const;
};

// MSGP shares one (a, b) across components; IGP gives each its own.
enum class CoefficientMode { shared, independent };

// Inverse-gamma shape count: every augmented value (k0 |W|), or the literal
// number of observations.
enum class SigmaShape { augmented, observations };

struct SamplerConfig {
  std::string family = "se";
  std::size_t k0 = 20;
  double alpha = 0.5;
  std::size_t iters = 2000;
  std::uint64_t seed = 1;
  ThetaPrior prior;  // filled from defaults when lo/hi are empty
  std::size_t adapt_window = 50;
  double target_accept = 0.234;
  bool adapt = true;
  double initial_step = 0.1;  // initial half-width as a fraction of each parameter
  CoefficientMode mode = CoefficientMode::shared;
  SigmaShape sigma_shape = SigmaShape::augmented;
  std::size_t thin = 1;  // keep every thin-th post-burn-in sweep
  // Integrate out the augmented vectors of components with no observations
  // instead of carrying them as latent variables.
  bool marginalize_empty = true;
  // Update each occupied theta jointly with its free augmented entries, so
  // the acceptance ratio involves only the observations.
  bool collapse_theta = false;

  void validate(std::size_t dims) const;
};

struct MixtureState {
  std::vector<std::size_t> z;  // 0-based label per observation
  std::vector<Theta> thetas;
  std::vector<SpectralDensityTable> tables;
  MixtureWeights weights;
  std::vector<SpectralCoefficients> coeffs;  // one entry (shared) or k0 entries
  double sigma2 = 1.0;
  std::vector<std::vector<double>> ytilde;  // k0 full-lattice vectors

  std::size_t k0() const { return thetas.size(); }
  const SpectralCoefficients& coeffs_for(std::size_t k) const {
    return coeffs.size() == 1 ? coeffs[0] : coeffs[k];
  }
};

struct AdaptationState {
  std::vector<std::vector<double>> step_sizes;  // per component, per parameter
  std::vector<long> accepted;                   // current window, per component
  std::vector<long> proposed;
  std::size_t window = 50;
  std::size_t windows_done = 0;
  double target = 0.234;
};

// End-of-window Robbins-Monro update s <- s exp(eta_t (rate - target)),
// eta_t = min(1, 10/t); counters reset.
void adapt_step_sizes(AdaptationState& adapt);

// One retained sweep.
struct ChainDraw {
  std::size_t sweep = 0;
  std::vector<std::size_t> z;
  std::vector<Theta> thetas;
  std::vector<double> p;
  double sigma2 = 0.0;
  double log_likelihood = 0.0;
};

struct PosteriorChain {
  std::size_t iters = 0;
  std::size_t burn_in = 0;
  std::vector<ChainDraw> draws;
  std::vector<double> log_likelihood;         // every sweep
  std::vector<std::size_t> effective;         // every sweep
  std::vector<double> acceptance_rate;        // per component, post burn-in
  std::vector<std::vector<double>> step_sizes;  // frozen values
};

// Inverse-gamma draw sigma2 ~ IG(count/2 + 2, residual/2 + 1).
double sample_sigma2(double count, double residual, Rng& rng);
struct InverseGamma {
  double shape;
  double scale;
};
InverseGamma sigma2_posterior(double count, double residual);

// Chain state and the six updates. Steps may be called
// individually; cached fields and spectra are refreshed on demand.
class Sampler {
 public:
  Sampler(Lattice lattice, ObservedData data, SamplerConfig config);

  // Overdispersed start: uniform labels, prior thetas and coefficients,
  // sigma2 = 0.1 var(y), free augmented entries drawn around the fields.
  void initialize(Rng& rng);

  void step1_update_assignments(Rng& rng);
  void step2_update_latent(Rng& rng);
  void step3_update_coefficients(Rng& rng);
  void step4_update_sigma2(Rng& rng);
  void step5_update_thetas(AdaptationState& adapt, Rng& rng);
  void step6_update_weights(Rng& rng);
  void sweep(AdaptationState& adapt, Rng& rng);

  double augmented_log_likelihood();
  // sum_w |Q* ytilde_k - (G_k/2)^{1/2}(a + jb)|^2 over the full grid.
  double component_residual(std::size_t k);
  double component_residual(std::size_t k, const SpectralDensityTable& table);
  // Log Metropolis-Hastings ratio for replacing thetas[k] by `proposal`
  // under step sizes `steps`.
  double theta_log_ratio(std::size_t k, const Theta& proposal, std::span<const double> steps,
                         SpectralDensityTable* proposal_table = nullptr);

  const MixtureState& state() const { return state_; }
  // Direct state edits; caches are dropped.
  MixtureState& mutable_state();
  void set_theta(std::size_t k, const Theta& theta);
  // Replaces the observed outcomes (same sites) and re-pins them.
  void set_outcomes(std::span<const double> y);
  const std::vector<double>& field(std::size_t k);
  const Lattice& lattice() const { return lattice_; }
  const ObservedData& data() const { return data_; }
  const SamplerConfig& config() const { return config_; }

  void save(std::ostream& out) const;
  void load(std::istream& in);

 private:
  void refresh_fields();
  void refresh_spectra();
  void pin_observations();
  std::vector<std::vector<char>> pinned_mask() const;
  bool carries(std::size_t k) const;
  double observed_log_ratio(std::size_t k, const SpectralDensityTable& proposal, std::vector<double>* field);

  Lattice lattice_;
  ObservedData data_;
  SamplerConfig config_;
  MixtureState state_;
  std::vector<std::vector<double>> fields_;
  std::vector<std::vector<Complex>> spectra_;
  bool fields_valid_ = false;
  bool spectra_valid_ = false;
};

// Full chain with resumable progress. Burn-in is the first floor(iters/2)
// sweeps; adaptation runs only during burn-in.
class ChainRunner {
 public:
  ChainRunner(const Lattice& lattice, const ObservedData& data, const SamplerConfig& config);

  // Runs until `sweeps` sweeps are complete in total (all remaining if 0).
  void run(std::size_t sweeps = 0);
  bool finished() const { return sweep_ == config_.iters; }
  std::size_t sweeps_done() const { return sweep_; }
  PosteriorChain chain() const;
  const Sampler& sampler() const { return sampler_; }

  void save(std::ostream& out) const;
  // Restores progress written by save onto a runner built from the same
  // lattice, data and config.
  void load(std::istream& in);

 private:
  SamplerConfig config_;
  Sampler sampler_;
  AdaptationState adapt_;
  Rng rng_;
  std::size_t sweep_ = 0;
  PosteriorChain chain_;
  std::vector<long> post_accepted_;
  std::vector<long> post_proposed_;
};

PosteriorChain run_chain(const Lattice& lattice, const ObservedData& data, const SamplerConfig& config);

}  // namespace msgp
