#include "msgp/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "msgp/error.hpp"

namespace msgp {

namespace {

constexpr double kDecayTolerance = 1e-8;
constexpr std::size_t kMaxOversampledSize = std::size_t{1} << 22;

// Odd per-dimension factors so the kernel has decayed below tolerance along
// every axis by the edge of the oversampled lag window.
std::vector<std::size_t> choose_oversample(const Theta& theta, const Lattice& lattice) {
  const std::size_t d = lattice.dims();
  std::vector<double> delta(d, 0.0);
  const double k0 = std::abs(lag_covariance(theta, delta));
  std::vector<std::size_t> r(d, 1);
  for (std::size_t l = 0; l < d; ++l) {
    while (r[l] < 255) {
      std::fill(delta.begin(), delta.end(), 0.0);
      delta[l] = static_cast<double>(r[l] * lattice.sizes()[l] / 2);
      if (std::abs(lag_covariance(theta, delta)) <= kDecayTolerance * k0) break;
      r[l] += 2;
    }
  }
  auto total = [&] {
    std::size_t t = 1;
    for (std::size_t l = 0; l < d; ++l) t *= r[l] * lattice.sizes()[l];
    return t;
  };
  while (total() > kMaxOversampledSize) {
    auto it = std::max_element(r.begin(), r.end());
    if (*it == 1) break;
    *it -= 2;
  }
  return r;
}

}  // namespace

SpectralDensityTable spectral_table(const Theta& theta, const Lattice& lattice, bool warn_aliasing) {
  validate(theta);
  if (theta.dims != lattice.dims()) {
    fail(ErrorKind::config, "kernel dimension " + std::to_string(theta.dims) +
                                " does not match lattice dimension " + std::to_string(lattice.dims()));
  }
  const auto& def = kernel_definition(theta.family);
  const std::size_t n = lattice.size();
  const std::vector<double> zero(lattice.dims(), 0.0);
  const double k0 = lag_covariance(theta, zero);

  std::vector<double> values(n);
  if (def.log_spectral_density) {
    std::vector<double> w(lattice.dims());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < n; ++f) {
      lattice.frequency(f, w);
      values[f] = def.log_spectral_density(theta.values, w);
      top = std::max(top, values[f]);
    }
    for (auto& v : values) v = std::exp(v - top);
  } else {
    const LagKernel kernel = [&theta](std::span<const double> delta) {
      return lag_covariance(theta, delta);
    };
    const auto raw = numeric_spectral_density(kernel, lattice, choose_oversample(theta, lattice));
    values.assign(raw.values().begin(), raw.values().end());
  }

  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  if (!(mean > 0.0)) fail(ErrorKind::numerical, "spectral table for " + theta.family + " has no mass");
  const double scale = k0 / mean;
  for (auto& v : values) v *= scale;

  SpectralDensityTable table(lattice.sizes(), std::move(values), theta_hash(theta));
  if (warn_aliasing) {
    const double ratio = boundary_mass_ratio(table, lattice);
    if (ratio > 1e-3) {
      std::ostringstream msg;
      msg << "spectral density of " << theta.family << " is " << ratio
          << " of its peak at the boundary frequencies; length-scales are too short for the lattice";
      warn(msg.str());
    }
  }
  return table;
}

double boundary_mass_ratio(const SpectralDensityTable& table, const Lattice& lattice) {
  double peak = 0.0;
  double edge = 0.0;
  for (std::size_t f = 0; f < lattice.size(); ++f) {
    const double v = table.values()[f];
    peak = std::max(peak, v);
    const auto idx = lattice.unflatten(f);
    for (std::size_t l = 0; l < lattice.dims(); ++l) {
      if (idx[l] == 0 || idx[l] + 1 == lattice.sizes()[l]) {
        edge = std::max(edge, v);
        break;
      }
    }
  }
  return peak > 0.0 ? edge / peak : 0.0;
}

SpectralCoefficients SpectralCoefficients::zeros(const Lattice& lattice) {
  const std::size_t h = lattice.half_space().size();
  return SpectralCoefficients{std::vector<double>(h, 0.0), std::vector<double>(h, 0.0)};
}

SpectralCoefficients SpectralCoefficients::draw(const Lattice& lattice, Rng& rng) {
  auto c = zeros(lattice);
  for (std::size_t h = 0; h < c.a.size(); ++h) {
    c.a[h] = rng.normal();
    c.b[h] = rng.normal();
  }
  return c;
}

double SpectralCoefficients::squared_norm() const {
  double s = 0.0;
  for (double v : a) s += v * v;
  for (double v : b) s += v * v;
  return s;
}

void component_spectrum(const Lattice& lattice, std::span<const double> sqrt_g,
                        const SpectralCoefficients& coeffs, std::span<Complex> out) {
  const auto& half = lattice.half_space();
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  for (std::size_t h = 0; h < half.size(); ++h) {
    const std::size_t f = half[h];
    const std::size_t fm = lattice.mirror(f);
    out[f] = Complex(coeffs.a[h], coeffs.b[h]) * (sqrt_g[f] * kInvSqrt2);
    out[fm] = Complex(coeffs.a[h], -coeffs.b[h]) * (sqrt_g[fm] * kInvSqrt2);
  }
}

std::vector<double> component_field(const Lattice& lattice, const SpectralDensityTable& table,
                                    const SpectralCoefficients& coeffs, double* max_imag) {
  if (!table.matches(lattice)) fail(ErrorKind::config, "spectral table built on a different lattice");
  std::vector<Complex> buf(lattice.size());
  component_spectrum(lattice, table.sqrt_values(), coeffs, buf);
  lattice.inverse(buf, buf);
  std::vector<double> field(lattice.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < buf.size(); ++i) {
    field[i] = buf[i].real();
    worst = std::max(worst, std::abs(buf[i].imag()));
  }
  if (max_imag) *max_imag = worst;
  if (worst >= 1e-10) {
    fail(ErrorKind::numerical, "reconstructed field is not real (imaginary residue " +
                                   std::to_string(worst) + ")");
  }
  return field;
}

double cross_covariance(const Lattice& lattice, std::size_t site_i, std::size_t site_j,
                        const SpectralDensityTable& gi, const SpectralDensityTable& gj) {
  if (!gi.matches(lattice) || !gj.matches(lattice)) {
    fail(ErrorKind::config, "cross_covariance: spectral tables come from different lattices");
  }
  const auto xi = lattice.unflatten(site_i);
  const auto xj = lattice.unflatten(site_j);
  const std::size_t d = lattice.dims();
  std::vector<double> delta(d), w(d);
  for (std::size_t l = 0; l < d; ++l) delta[l] = static_cast<double>(xi[l]) - static_cast<double>(xj[l]);
  const auto si = gi.sqrt_values();
  const auto sj = gj.sqrt_values();
  double sum = 0.0;
  for (std::size_t f = 0; f < lattice.size(); ++f) {
    lattice.frequency(f, w);
    double phase = 0.0;
    for (std::size_t l = 0; l < d; ++l) phase += delta[l] * w[l];
    sum += std::cos(phase) * si[f] * sj[f];
  }
  return sum / static_cast<double>(lattice.size());
}

CrossCovarianceCache::CrossCovarianceCache(const Lattice& lattice, std::vector<SpectralDensityTable> tables)
    : lattice_(lattice), tables_(std::move(tables)) {
  for (const auto& t : tables_) {
    if (!t.matches(lattice_)) fail(ErrorKind::config, "spectral table built on a different lattice");
  }
  const std::size_t n = lattice_.size();
  const std::size_t k = tables_.size();
  const double root_n = std::sqrt(static_cast<double>(n));
  lags_.resize(k * (k + 1) / 2);
  std::vector<Complex> buf(n);
  for (std::size_t k1 = 0; k1 < k; ++k1) {
    for (std::size_t k2 = k1; k2 < k; ++k2) {
      const auto s1 = tables_[k1].sqrt_values();
      const auto s2 = tables_[k2].sqrt_values();
      for (std::size_t f = 0; f < n; ++f) buf[f] = s1[f] * s2[f];
      lattice_.inverse(buf, buf);
      auto& out = lags_[pair_index(k1, k2)];
      out.resize(n);
      for (std::size_t x = 0; x < n; ++x) out[x] = buf[x].real() / root_n;
    }
  }
  coords_.resize(n);
  for (std::size_t x = 0; x < n; ++x) coords_[x] = lattice_.unflatten(x);
}

std::size_t CrossCovarianceCache::pair_index(std::size_t k1, std::size_t k2) const {
  if (k1 > k2) std::swap(k1, k2);
  const std::size_t k = tables_.size();
  return k1 * k - k1 * (k1 - 1) / 2 + (k2 - k1);
}

double CrossCovarianceCache::operator()(std::size_t k1, std::size_t k2, std::size_t site_i,
                                        std::size_t site_j) const {
  const auto& a = coords_.at(site_i);
  const auto& b = coords_.at(site_j);
  const auto& m = lattice_.sizes();
  std::size_t flat = 0;
  double sign = 1.0;
  for (std::size_t l = 0; l < a.size(); ++l) {
    std::size_t lag;
    if (a[l] >= b[l]) {
      lag = a[l] - b[l];
    } else {
      // The lag function is anti-periodic with period m on this grid.
      lag = a[l] + m[l] - b[l];
      sign = -sign;
    }
    flat = flat * m[l] + lag;
  }
  return sign * lags_[pair_index(k1, k2)][flat];
}

Eigen::MatrixXd assemble_covariance(const CrossCovarianceCache& cache, std::span<const std::size_t> sites,
                                    std::span<const std::size_t> labels, double sigma2) {
  if (sites.size() != labels.size()) fail(ErrorKind::data, "assemble_covariance: sites and labels differ in length");
  const auto n = static_cast<Eigen::Index>(sites.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = cache(labels[i], labels[j], sites[i], sites[j]);
      m(i, j) = v;
      m(j, i) = v;
    }
    m(i, i) += sigma2;
  }
  return m;
}

namespace {

// Distinct parameter sets in first-seen order plus each entry's label.
std::pair<std::vector<Theta>, std::vector<std::size_t>> dedupe(std::span<const Theta> thetas) {
  std::vector<Theta> unique;
  std::vector<std::size_t> labels(thetas.size());
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    auto it = std::find(unique.begin(), unique.end(), thetas[i]);
    if (it == unique.end()) {
      unique.push_back(thetas[i]);
      labels[i] = unique.size() - 1;
    } else {
      labels[i] = static_cast<std::size_t>(it - unique.begin());
    }
  }
  return {std::move(unique), std::move(labels)};
}

}  // namespace

Eigen::MatrixXd assemble_covariance(const Lattice& lattice, std::span<const std::size_t> sites,
                                    std::span<const Theta> thetas, double sigma2) {
  if (sites.size() != thetas.size()) fail(ErrorKind::data, "assemble_covariance: one theta per site required");
  if (sites.empty()) fail(ErrorKind::data, "assemble_covariance: no sites");
  auto [unique, labels] = dedupe(thetas);
  std::vector<SpectralDensityTable> tables;
  for (const auto& t : unique) tables.push_back(spectral_table(t, lattice, false));
  const CrossCovarianceCache cache(lattice, std::move(tables));
  return assemble_covariance(cache, sites, labels, sigma2);
}

std::vector<double> simulate_field(const Lattice& lattice, std::span<const Theta> components,
                                   std::span<const std::size_t> site_component,
                                   std::span<const double> mu, double sigma2, Rng& rng) {
  const std::size_t n = lattice.size();
  if (site_component.size() != n) fail(ErrorKind::data, "simulate_field: one component label per lattice site");
  if (!mu.empty() && mu.size() != n) fail(ErrorKind::data, "simulate_field: mean must cover every lattice site");
  if (sigma2 < 0.0) fail(ErrorKind::config, "simulate_field: noise variance must be nonnegative");
  const auto coeffs = SpectralCoefficients::draw(lattice, rng);
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < components.size(); ++k) {
    if (std::find(site_component.begin(), site_component.end(), k) == site_component.end()) continue;
    // Zero-variance components contribute nothing and have no density to rescale.
    if (components[k].phi() == 0.0) continue;
    const auto table = spectral_table(components[k], lattice, false);
    const auto field = component_field(lattice, table, coeffs);
    for (std::size_t x = 0; x < n; ++x) {
      if (site_component[x] == k) out[x] = field[x];
    }
  }
  const double sd = std::sqrt(sigma2);
  for (std::size_t x = 0; x < n; ++x) {
    if (site_component[x] >= components.size()) fail(ErrorKind::data, "simulate_field: component label out of range");
    out[x] += (mu.empty() ? 0.0 : mu[x]) + (sigma2 > 0.0 ? sd * rng.normal() : 0.0);
  }
  return out;
}

std::vector<double> simulate_field(const Lattice& lattice, std::span<const Theta> thetas,
                                   std::span<const double> mu, double sigma2, Rng& rng) {
  if (thetas.size() != lattice.size()) fail(ErrorKind::data, "simulate_field: one theta per lattice site");
  auto [unique, labels] = dedupe(thetas);
  return simulate_field(lattice, unique, labels, mu, sigma2, rng);
}

}  // namespace msgp
