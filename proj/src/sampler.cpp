#include "msgp/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include "binary_io.hpp"
#include "msgp/error.hpp"

namespace msgp {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// Kernels that are not positive definite on the lattice lie outside the
// prior support.
std::optional<SpectralDensityTable> try_spectral_table(const Theta& theta, const Lattice& lattice) {
  try {
    return spectral_table(theta, lattice, false);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::numerical) throw;
    return std::nullopt;
  }
}

double window_width(double x, double s, double lo, double hi) {
  return std::min(hi, x + s) - std::max(lo, x - s);
}

}  // namespace

ThetaPrior ThetaPrior::defaults(const std::string& family, std::size_t dims) {
  ThetaPrior prior;
  prior.family = family;
  prior.dims = dims;
  for (const auto& name : param_names(family, dims)) {
    if (name.front() == 'c') {
      prior.lo.push_back(1.0);
      prior.hi.push_back(1e5);
    } else {
      prior.lo.push_back(0.1);
      prior.hi.push_back(100.0);
    }
  }
  return prior;
}

bool ThetaPrior::contains(const Theta& theta) const {
  if (theta.values.size() != lo.size()) return false;
  for (std::size_t l = 0; l < lo.size(); ++l) {
    if (!(theta.values[l] >= lo[l] && theta.values[l] <= hi[l])) return false;
  }
  return true;
}

double ThetaPrior::log_density(const Theta& theta) const {
  if (!contains(theta)) return -std::numeric_limits<double>::infinity();
  double s = 0.0;
  for (double v : theta.values) s -= std::log(v);
  return s;
}

Theta ThetaPrior::draw(Rng& rng) const {
  Theta theta;
  theta.family = family;
  theta.dims = dims;
  for (std::size_t l = 0; l < lo.size(); ++l) {
    theta.values.push_back(std::exp(rng.uniform(std::log(lo[l]), std::log(hi[l]))));
  }
  return theta;
}

void SamplerConfig::validate(std::size_t dims) const {
  const auto& def = kernel_definition(family);
  if (def.fixed_dims != 0 && def.fixed_dims != dims) {
    fail(ErrorKind::config, "kernel '" + family + "' needs " + std::to_string(def.fixed_dims) + " dimensions");
  }
  if (k0 < 1) fail(ErrorKind::config, "k0 must be at least 1");
  if (!(alpha > 0.0)) fail(ErrorKind::config, "alpha must be positive");
  if (iters < 2) fail(ErrorKind::config, "iters must be at least 2");
  if (adapt_window < 1) fail(ErrorKind::config, "adapt_window must be at least 1");
  if (!(target_accept > 0.0 && target_accept < 1.0)) fail(ErrorKind::config, "target_accept must lie in (0, 1)");
  if (!(initial_step > 0.0)) fail(ErrorKind::config, "initial_step must be positive");
  if (thin < 1) fail(ErrorKind::config, "thin must be at least 1");
  if (!prior.lo.empty()) {
    const std::size_t np = param_names(family, dims).size();
    if (prior.lo.size() != np || prior.hi.size() != np) fail(ErrorKind::config, "prior bounds have the wrong length");
    for (std::size_t l = 0; l < np; ++l) {
      if (!(prior.lo[l] > 0.0 && prior.hi[l] > prior.lo[l])) {
        fail(ErrorKind::config, "prior bounds must satisfy 0 < lo < hi");
      }
    }
  }
}

void adapt_step_sizes(AdaptationState& adapt) {
  ++adapt.windows_done;
  const double eta = std::min(1.0, 10.0 / static_cast<double>(adapt.windows_done));
  for (std::size_t k = 0; k < adapt.step_sizes.size(); ++k) {
    if (adapt.proposed[k] > 0) {
      const double rate = static_cast<double>(adapt.accepted[k]) / static_cast<double>(adapt.proposed[k]);
      const double factor = std::exp(eta * (rate - adapt.target));
      for (auto& s : adapt.step_sizes[k]) s *= factor;
    }
    adapt.accepted[k] = 0;
    adapt.proposed[k] = 0;
  }
}

InverseGamma sigma2_posterior(double count, double residual) {
  return {count / 2.0 + 2.0, residual / 2.0 + 1.0};
}

double sample_sigma2(double count, double residual, Rng& rng) {
  const auto ig = sigma2_posterior(count, residual);
  double g = rng.gamma(ig.shape);
  if (!(g > 0.0)) g = std::numeric_limits<double>::min();
  return ig.scale / g;
}

Sampler::Sampler(Lattice lattice, ObservedData data, SamplerConfig config)
    : lattice_(std::move(lattice)), data_(std::move(data)), config_(std::move(config)) {
  config_.validate(lattice_.dims());
  if (config_.prior.lo.empty()) config_.prior = ThetaPrior::defaults(config_.family, lattice_.dims());
  config_.prior.family = config_.family;
  config_.prior.dims = lattice_.dims();
  if (data_.sites.size() != data_.y.size()) fail(ErrorKind::data, "observation sites and outcomes differ in length");
  if (data_.size() == 0) fail(ErrorKind::data, "no observations");
  std::vector<char> seen(lattice_.size(), 0);
  for (std::size_t i = 0; i < data_.size(); ++i) {
    const std::size_t s = data_.sites[i];
    if (s >= lattice_.size()) fail(ErrorKind::data, "observation site outside the lattice");
    if (seen[s]) fail(ErrorKind::data, "two observations share lattice site " + std::to_string(s));
    if (!std::isfinite(data_.y[i])) fail(ErrorKind::data, "non-finite outcome at observation " + std::to_string(i + 1));
    seen[s] = 1;
  }
}

void Sampler::initialize(Rng& rng) {
  const std::size_t k0 = config_.k0;
  const std::size_t n = data_.size();
  state_ = MixtureState{};
  state_.z.resize(n);
  for (auto& z : state_.z) z = rng.index(k0);
  for (std::size_t k = 0; k < k0; ++k) {
    // Prior draws whose kernel has no valid spectral density are redrawn.
    for (int attempt = 0;; ++attempt) {
      Theta t = config_.prior.draw(rng);
      auto table = try_spectral_table(t, lattice_);
      if (table) {
        state_.thetas.push_back(std::move(t));
        state_.tables.push_back(std::move(*table));
        break;
      }
      if (attempt == 999) fail(ErrorKind::numerical, "no valid kernel parameters found in 1000 prior draws");
    }
  }
  state_.weights.alpha = config_.alpha;
  state_.weights.p.assign(k0, 1.0 / static_cast<double>(k0));
  const std::size_t ncoef = config_.mode == CoefficientMode::shared ? 1 : k0;
  for (std::size_t c = 0; c < ncoef; ++c) state_.coeffs.push_back(SpectralCoefficients::draw(lattice_, rng));

  const double mean = std::accumulate(data_.y.begin(), data_.y.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double v : data_.y) var += (v - mean) * (v - mean);
  var = n > 1 ? var / static_cast<double>(n - 1) : 0.0;
  state_.sigma2 = var > 0.0 ? 0.1 * var : 0.1;

  fields_valid_ = spectra_valid_ = false;
  refresh_fields();
  const double sd = std::sqrt(state_.sigma2);
  state_.ytilde.assign(k0, std::vector<double>(lattice_.size()));
  for (std::size_t k = 0; k < k0; ++k) {
    for (std::size_t x = 0; x < lattice_.size(); ++x) state_.ytilde[k][x] = fields_[k][x] + sd * rng.normal();
  }
  pin_observations();
}

MixtureState& Sampler::mutable_state() {
  fields_valid_ = spectra_valid_ = false;
  return state_;
}

void Sampler::set_theta(std::size_t k, const Theta& theta) {
  validate(theta);
  state_.thetas.at(k) = theta;
  state_.tables[k] = spectral_table(theta, lattice_, false);
  fields_valid_ = false;
}

void Sampler::set_outcomes(std::span<const double> y) {
  if (y.size() != data_.size()) fail(ErrorKind::data, "set_outcomes: wrong number of outcomes");
  data_.y.assign(y.begin(), y.end());
  if (!state_.ytilde.empty()) pin_observations();
}

const std::vector<double>& Sampler::field(std::size_t k) {
  refresh_fields();
  return fields_.at(k);
}

void Sampler::refresh_fields() {
  if (fields_valid_) return;
  fields_.resize(state_.k0());
  for (std::size_t k = 0; k < state_.k0(); ++k) {
    fields_[k] = component_field(lattice_, state_.tables[k], state_.coeffs_for(k));
  }
  fields_valid_ = true;
}

void Sampler::refresh_spectra() {
  if (spectra_valid_) return;
  spectra_.resize(state_.k0());
  std::vector<Complex> buf(lattice_.size());
  for (std::size_t k = 0; k < state_.k0(); ++k) {
    for (std::size_t x = 0; x < buf.size(); ++x) buf[x] = Complex(state_.ytilde[k][x], 0.0);
    spectra_[k].resize(buf.size());
    lattice_.forward(buf, spectra_[k]);
  }
  spectra_valid_ = true;
}

void Sampler::pin_observations() {
  for (std::size_t i = 0; i < data_.size(); ++i) state_.ytilde[state_.z[i]][data_.sites[i]] = data_.y[i];
  spectra_valid_ = false;
}

std::vector<std::vector<char>> Sampler::pinned_mask() const {
  std::vector<std::vector<char>> mask(state_.k0(), std::vector<char>(lattice_.size(), 0));
  for (std::size_t i = 0; i < data_.size(); ++i) mask[state_.z[i]][data_.sites[i]] = 1;
  return mask;
}

bool Sampler::carries(std::size_t k) const {
  if (!config_.marginalize_empty) return true;
  return std::find(state_.z.begin(), state_.z.end(), k) != state_.z.end();
}

void Sampler::step1_update_assignments(Rng& rng) {
  refresh_fields();
  const std::size_t k0 = state_.k0();
  if (k0 == 1) return;
  std::vector<double> logp(k0);
  for (std::size_t k = 0; k < k0; ++k) logp[k] = std::log(state_.weights.p[k]);
  const double inv2s = 0.5 / state_.sigma2;
  std::vector<double> logw(k0);
  for (std::size_t i = 0; i < data_.size(); ++i) {
    const std::size_t site = data_.sites[i];
    for (std::size_t k = 0; k < k0; ++k) {
      const double r = data_.y[i] - fields_[k][site];
      logw[k] = logp[k] - r * r * inv2s;
    }
    state_.z[i] = sample_log_categorical(logw, rng);
  }
  pin_observations();
}

void Sampler::step2_update_latent(Rng& rng) {
  refresh_fields();
  const auto mask = pinned_mask();
  const double sd = std::sqrt(state_.sigma2);
  for (std::size_t k = 0; k < state_.k0(); ++k) {
    if (!carries(k)) continue;
    for (std::size_t x = 0; x < lattice_.size(); ++x) {
      if (!mask[k][x]) state_.ytilde[k][x] = fields_[k][x] + sd * rng.normal();
    }
  }
  spectra_valid_ = false;
}

void Sampler::step3_update_coefficients(Rng& rng) {
  refresh_spectra();
  const auto& half = lattice_.half_space();
  const double inv_s2 = 1.0 / state_.sigma2;
  auto update = [&](const std::vector<std::size_t>& ks, SpectralCoefficients& c) {
    for (std::size_t h = 0; h < half.size(); ++h) {
      const std::size_t f = half[h];
      const std::size_t fm = lattice_.mirror(f);
      double prec = 1.0;
      double la = 0.0;
      double lb = 0.0;
      for (std::size_t k : ks) {
        const auto sg = state_.tables[k].sqrt_values();
        const double sf = sg[f] * kInvSqrt2;
        const double sm = sg[fm] * kInvSqrt2;
        const Complex uf = spectra_[k][f];
        const Complex um = spectra_[k][fm];
        prec += (sf * sf + sm * sm) * inv_s2;
        la += (sf * uf.real() + sm * um.real()) * inv_s2;
        lb += (sf * uf.imag() - sm * um.imag()) * inv_s2;
      }
      const double sd = 1.0 / std::sqrt(prec);
      c.a[h] = la / prec + sd * rng.normal();
      c.b[h] = lb / prec + sd * rng.normal();
    }
  };
  std::vector<std::size_t> carried;
  for (std::size_t k = 0; k < state_.k0(); ++k) {
    if (carries(k)) carried.push_back(k);
  }
  if (state_.coeffs.size() == 1) {
    update(carried, state_.coeffs[0]);
  } else {
    for (std::size_t k = 0; k < state_.k0(); ++k) {
      update(carries(k) ? std::vector<std::size_t>{k} : std::vector<std::size_t>{}, state_.coeffs[k]);
    }
  }
  fields_valid_ = false;
}

double Sampler::component_residual(std::size_t k) { return component_residual(k, state_.tables[k]); }

double Sampler::component_residual(std::size_t k, const SpectralDensityTable& table) {
  refresh_spectra();
  const auto& half = lattice_.half_space();
  const auto sg = table.sqrt_values();
  const auto& c = state_.coeffs_for(k);
  const auto& u = spectra_[k];
  double r = 0.0;
  for (std::size_t h = 0; h < half.size(); ++h) {
    const std::size_t f = half[h];
    const std::size_t fm = lattice_.mirror(f);
    r += std::norm(u[f] - Complex(c.a[h], c.b[h]) * (sg[f] * kInvSqrt2));
    r += std::norm(u[fm] - Complex(c.a[h], -c.b[h]) * (sg[fm] * kInvSqrt2));
  }
  return r;
}

void Sampler::step4_update_sigma2(Rng& rng) {
  double residual = 0.0;
  std::size_t carried = 0;
  for (std::size_t k = 0; k < state_.k0(); ++k) {
    if (!carries(k)) continue;
    residual += component_residual(k);
    ++carried;
  }
  const double count = config_.sigma_shape == SigmaShape::augmented
                           ? static_cast<double>(carried * lattice_.size())
                           : static_cast<double>(data_.size());
  state_.sigma2 = sample_sigma2(count, residual, rng);
}

double Sampler::theta_log_ratio(std::size_t k, const Theta& proposal, std::span<const double> steps,
                                SpectralDensityTable* proposal_table) {
  const auto& prior = config_.prior;
  const Theta& current = state_.thetas[k];
  if (!prior.contains(proposal)) return -std::numeric_limits<double>::infinity();
  if (proposal == current) {
    if (proposal_table) *proposal_table = state_.tables[k];
    return 0.0;
  }
  auto valid = try_spectral_table(proposal, lattice_);
  if (!valid) return -std::numeric_limits<double>::infinity();
  SpectralDensityTable table = std::move(*valid);
  double log_ratio = 0.0;
  if (!carries(k)) {
    // Likelihood does not depend on theta_k once its vector is integrated out.
  } else if (config_.collapse_theta) {
    log_ratio = observed_log_ratio(k, table, nullptr);
  } else {
    log_ratio = -(component_residual(k, table) - component_residual(k)) / (2.0 * state_.sigma2);
  }
  log_ratio += prior.log_density(proposal) - prior.log_density(current);
  for (std::size_t l = 0; l < proposal.values.size(); ++l) {
    log_ratio += std::log(window_width(current.values[l], steps[l], prior.lo[l], prior.hi[l])) -
                 std::log(window_width(proposal.values[l], steps[l], prior.lo[l], prior.hi[l]));
  }
  if (proposal_table) *proposal_table = std::move(table);
  return log_ratio;
}

double Sampler::observed_log_ratio(std::size_t k, const SpectralDensityTable& proposal, std::vector<double>* field) {
  refresh_fields();
  auto f_new = component_field(lattice_, proposal, state_.coeffs_for(k));
  const auto& f_cur = fields_[k];
  double d = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (state_.z[i] != k) continue;
    const std::size_t s = data_.sites[i];
    const double rn = data_.y[i] - f_new[s];
    const double rc = data_.y[i] - f_cur[s];
    d += rn * rn - rc * rc;
  }
  if (field) *field = std::move(f_new);
  return -d / (2.0 * state_.sigma2);
}

void Sampler::step5_update_thetas(AdaptationState& adapt, Rng& rng) {
  const auto& prior = config_.prior;
  for (std::size_t k = 0; k < state_.k0(); ++k) {
    const auto& steps = adapt.step_sizes[k];
    Theta proposal = state_.thetas[k];
    for (std::size_t l = 0; l < proposal.values.size(); ++l) {
      const double x = proposal.values[l];
      proposal.values[l] = rng.uniform(std::max(prior.lo[l], x - steps[l]), std::min(prior.hi[l], x + steps[l]));
    }
    SpectralDensityTable table;
    const double log_ratio = theta_log_ratio(k, proposal, steps, &table);
    ++adapt.proposed[k];
    if (std::log(rng.uniform()) < log_ratio) {
      ++adapt.accepted[k];
      const bool redraw = config_.collapse_theta && carries(k);
      state_.thetas[k] = std::move(proposal);
      state_.tables[k] = std::move(table);
      fields_valid_ = false;
      if (redraw) {
        // Free entries follow theta_k from their conditional.
        refresh_fields();
        const double sd = std::sqrt(state_.sigma2);
        const auto mask = pinned_mask();
        for (std::size_t x = 0; x < lattice_.size(); ++x) {
          if (!mask[k][x]) state_.ytilde[k][x] = fields_[k][x] + sd * rng.normal();
        }
        spectra_valid_ = false;
      }
    }
  }
}

void Sampler::step6_update_weights(Rng& rng) {
  const auto counts = occupancy(state_.z, state_.k0());
  state_.weights = sample_weights_posterior(config_.alpha, state_.k0(), counts, rng);
}

void Sampler::sweep(AdaptationState& adapt, Rng& rng) {
  step1_update_assignments(rng);
  step2_update_latent(rng);
  step3_update_coefficients(rng);
  step4_update_sigma2(rng);
  step5_update_thetas(adapt, rng);
  step6_update_weights(rng);
}

double Sampler::augmented_log_likelihood() {
  const double log_sigma = 0.5 * std::log(state_.sigma2);
  const double n_sites = static_cast<double>(lattice_.size());
  double ll = 0.0;
  for (std::size_t k = 0; k < state_.k0(); ++k) {
    if (!carries(k)) continue;
    ll += -n_sites * log_sigma - component_residual(k) / (2.0 * state_.sigma2);
  }
  for (auto z : state_.z) ll += std::log(state_.weights.p[z]);
  for (const auto& c : state_.coeffs) ll -= 0.5 * c.squared_norm();
  return ll;
}

void Sampler::save(std::ostream& out) const {
  bin::put_vec(out, state_.z);
  bin::put_size(out, state_.thetas.size());
  for (const auto& t : state_.thetas) bin::put_vec(out, t.values);
  bin::put_vec(out, state_.weights.p);
  bin::put(out, state_.weights.alpha);
  bin::put_size(out, state_.coeffs.size());
  for (const auto& c : state_.coeffs) {
    bin::put_vec(out, c.a);
    bin::put_vec(out, c.b);
  }
  bin::put(out, state_.sigma2);
  bin::put_vec2(out, state_.ytilde);
}

void Sampler::load(std::istream& in) {
  MixtureState s;
  s.z = bin::get_vec<std::size_t>(in);
  const std::size_t k0 = bin::get_size(in);
  if (k0 != config_.k0 || s.z.size() != data_.size()) fail(ErrorKind::data, "checkpoint state does not match the configuration");
  for (std::size_t k = 0; k < k0; ++k) {
    Theta t;
    t.family = config_.family;
    t.dims = lattice_.dims();
    t.values = bin::get_vec<double>(in);
    validate(t);
    s.tables.push_back(spectral_table(t, lattice_, false));
    s.thetas.push_back(std::move(t));
  }
  s.weights.p = bin::get_vec<double>(in);
  s.weights.alpha = bin::get<double>(in);
  const std::size_t nc = bin::get_size(in);
  for (std::size_t c = 0; c < nc; ++c) {
    SpectralCoefficients coeffs;
    coeffs.a = bin::get_vec<double>(in);
    coeffs.b = bin::get_vec<double>(in);
    if (coeffs.a.size() != lattice_.half_space().size()) fail(ErrorKind::data, "checkpoint coefficients do not match the lattice");
    s.coeffs.push_back(std::move(coeffs));
  }
  s.sigma2 = bin::get<double>(in);
  s.ytilde = bin::get_vec2<double>(in);
  for (auto z : s.z) {
    if (z >= k0) fail(ErrorKind::data, "checkpoint assignment out of range");
  }
  state_ = std::move(s);
  fields_valid_ = spectra_valid_ = false;
}

ChainRunner::ChainRunner(const Lattice& lattice, const ObservedData& data, const SamplerConfig& config)
    : config_(config), sampler_(lattice, data, config), rng_(config.seed) {
  sampler_.initialize(rng_);
  const std::size_t k0 = config_.k0;
  adapt_.window = config_.adapt_window;
  adapt_.target = config_.target_accept;
  adapt_.accepted.assign(k0, 0);
  adapt_.proposed.assign(k0, 0);
  for (const auto& t : sampler_.state().thetas) {
    std::vector<double> s(t.values.size());
    for (std::size_t l = 0; l < s.size(); ++l) s[l] = config_.initial_step * t.values[l];
    adapt_.step_sizes.push_back(std::move(s));
  }
  chain_.iters = config_.iters;
  chain_.burn_in = config_.iters / 2;
  post_accepted_.assign(k0, 0);
  post_proposed_.assign(k0, 0);
}

void ChainRunner::run(std::size_t sweeps) {
  const std::size_t target = sweeps == 0 ? config_.iters : std::min(sweeps, config_.iters);
  const std::size_t k0 = config_.k0;
  while (sweep_ < target) {
    const bool burning = sweep_ < chain_.burn_in;
    sampler_.sweep(adapt_, rng_);
    ++sweep_;
    const auto& st = sampler_.state();
    const double ll = sampler_.augmented_log_likelihood();
    if (!std::isfinite(ll)) {
      std::ostringstream msg;
      msg << "non-finite augmented log-likelihood at sweep " << sweep_ << "; sigma2=" << st.sigma2 << " p=[";
      for (double p : st.weights.p) msg << p << ' ';
      msg << "] thetas=[";
      for (const auto& t : st.thetas) {
        msg << '(';
        for (double v : t.values) msg << v << ' ';
        msg << ')';
      }
      msg << ']';
      fail(ErrorKind::numerical, msg.str());
    }
    const auto counts = occupancy(st.z, k0);
    chain_.log_likelihood.push_back(ll);
    chain_.effective.push_back(effective_components(counts));
    if (burning) {
      if (sweep_ % adapt_.window == 0) {
        if (config_.adapt) {
          adapt_step_sizes(adapt_);
        } else {
          std::fill(adapt_.accepted.begin(), adapt_.accepted.end(), 0);
          std::fill(adapt_.proposed.begin(), adapt_.proposed.end(), 0);
        }
      }
      if (sweep_ == chain_.burn_in) {
        std::fill(adapt_.accepted.begin(), adapt_.accepted.end(), 0);
        std::fill(adapt_.proposed.begin(), adapt_.proposed.end(), 0);
      }
      continue;
    }
    for (std::size_t k = 0; k < k0; ++k) {
      post_accepted_[k] += adapt_.accepted[k];
      post_proposed_[k] += adapt_.proposed[k];
      adapt_.accepted[k] = adapt_.proposed[k] = 0;
    }
    if ((sweep_ - chain_.burn_in - 1) % config_.thin == 0) {
      ChainDraw d;
      d.sweep = sweep_;
      d.z = st.z;
      d.thetas = st.thetas;
      d.p = st.weights.p;
      d.sigma2 = st.sigma2;
      d.log_likelihood = ll;
      chain_.draws.push_back(std::move(d));
    }
  }
}

PosteriorChain ChainRunner::chain() const {
  PosteriorChain out = chain_;
  out.acceptance_rate.resize(config_.k0);
  for (std::size_t k = 0; k < config_.k0; ++k) {
    out.acceptance_rate[k] = post_proposed_[k] > 0
                                 ? static_cast<double>(post_accepted_[k]) / static_cast<double>(post_proposed_[k])
                                 : 0.0;
  }
  out.step_sizes = adapt_.step_sizes;
  return out;
}

void ChainRunner::save(std::ostream& out) const {
  bin::put_size(out, sweep_);
  bin::put_string(out, rng_.save());
  bin::put_vec2(out, adapt_.step_sizes);
  bin::put_vec(out, adapt_.accepted);
  bin::put_vec(out, adapt_.proposed);
  bin::put_size(out, adapt_.windows_done);
  bin::put_vec(out, post_accepted_);
  bin::put_vec(out, post_proposed_);
  bin::put_vec(out, chain_.log_likelihood);
  bin::put_vec(out, chain_.effective);
  bin::put_size(out, chain_.draws.size());
  for (const auto& d : chain_.draws) {
    bin::put_size(out, d.sweep);
    bin::put_vec(out, d.z);
    bin::put_size(out, d.thetas.size());
    for (const auto& t : d.thetas) bin::put_vec(out, t.values);
    bin::put_vec(out, d.p);
    bin::put(out, d.sigma2);
    bin::put(out, d.log_likelihood);
  }
  sampler_.save(out);
}

void ChainRunner::load(std::istream& in) {
  sweep_ = bin::get_size(in);
  if (sweep_ > config_.iters) fail(ErrorKind::data, "checkpoint is past the configured iteration count");
  rng_.load(bin::get_string(in));
  adapt_.step_sizes = bin::get_vec2<double>(in);
  adapt_.accepted = bin::get_vec<long>(in);
  adapt_.proposed = bin::get_vec<long>(in);
  adapt_.windows_done = bin::get_size(in);
  post_accepted_ = bin::get_vec<long>(in);
  post_proposed_ = bin::get_vec<long>(in);
  chain_.log_likelihood = bin::get_vec<double>(in);
  chain_.effective = bin::get_vec<std::size_t>(in);
  chain_.draws.resize(bin::get_size(in));
  for (auto& d : chain_.draws) {
    d.sweep = bin::get_size(in);
    d.z = bin::get_vec<std::size_t>(in);
    d.thetas.resize(bin::get_size(in));
    for (auto& t : d.thetas) {
      t.family = config_.family;
      t.dims = sampler_.lattice().dims();
      t.values = bin::get_vec<double>(in);
    }
    d.p = bin::get_vec<double>(in);
    d.sigma2 = bin::get<double>(in);
    d.log_likelihood = bin::get<double>(in);
  }
  if (adapt_.step_sizes.size() != config_.k0) fail(ErrorKind::data, "checkpoint adaptation state does not match k0");
  sampler_.load(in);
}

PosteriorChain run_chain(const Lattice& lattice, const ObservedData& data, const SamplerConfig& config) {
  ChainRunner runner(lattice, data, config);
  runner.run();
  return runner.chain();
}

}  // namespace msgp
