#include "msgp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>
#include <sstream>

#include "msgp/error.hpp"

namespace msgp {

namespace {

void check_dims(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    std::ostringstream msg;
    msg << what << ": dimension mismatch (got " << got << ", expected " << want << ")";
    fail(ErrorKind::config, msg.str());
  }
}

// Values are ordered phi, rho1..rhod.
double se_cov_flat(std::span<const double> v, std::span<const double> delta) {
  check_dims(delta.size(), v.size() - 1, "se_covariance");
  double q = 0.0;
  for (std::size_t l = 0; l < delta.size(); ++l) {
    const double r = delta[l] / v[l + 1];
    q += r * r;
  }
  return v[0] * std::exp(-0.5 * q);
}

double se_log_density_flat(std::span<const double> v, std::span<const double> w) {
  check_dims(w.size(), v.size() - 1, "se_spectral_density");
  const std::size_t d = w.size();
  double log_scale = 0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi);
  double q = 0.0;
  for (std::size_t l = 0; l < d; ++l) {
    log_scale += std::log(v[l + 1]);
    const double r = v[l + 1] * w[l];
    q += r * r;
  }
  return std::log(v[0]) + log_scale - 0.5 * q;
}

// Values are ordered phi, rho1, rho2, rho3, c1, c2.
double st_cov_flat(std::span<const double> v, std::span<const double> delta) {
  check_dims(delta.size(), 3, "st_covariance");
  const double d1 = delta[0] * delta[0];
  const double d2 = delta[1] * delta[1];
  const double t = std::abs(delta[2]);
  return v[0] * std::exp(-d1 / (2.0 * v[1] * v[1]) - d2 / (2.0 * v[2] * v[2]) - t / v[3] -
                         d1 * t / v[4] - d2 * t / v[5]);
}

std::vector<std::string> se_names(std::size_t dims) {
  std::vector<std::string> names{"phi"};
  for (std::size_t l = 1; l <= dims; ++l) names.push_back("rho" + std::to_string(l));
  return names;
}

std::vector<std::string> st_names(std::size_t) {
  return {"phi", "rho1", "rho2", "rho3", "c1", "c2"};
}

struct Registry {
  std::mutex mutex;
  std::map<std::string, KernelDefinition> defs;

  Registry() {
    defs["se"] = KernelDefinition{"se", 0, &se_names, &se_cov_flat, &se_log_density_flat};
    defs["st_nonseparable"] = KernelDefinition{"st_nonseparable", 3, &st_names, &st_cov_flat, nullptr};
  }
};

Registry& registry() {
  static Registry r;
  return r;
}

std::vector<double> se_values(const SEKernelParams& p) {
  std::vector<double> v{p.phi};
  v.insert(v.end(), p.rho.begin(), p.rho.end());
  return v;
}

}  // namespace

void validate(const SEKernelParams& params) {
  if (params.rho.empty()) fail(ErrorKind::config, "SE kernel needs at least one length-scale");
  if (!(params.phi > 0.0)) fail(ErrorKind::config, "SE kernel phi must be positive");
  for (double r : params.rho) {
    if (!(r > 0.0)) fail(ErrorKind::config, "SE kernel length-scales must be positive");
  }
}

void validate(const NonSeparableSTParams& p) {
  for (double v : {p.phi, p.rho1, p.rho2, p.rho3, p.c1, p.c2}) {
    if (!(v > 0.0)) fail(ErrorKind::config, "space-time kernel parameters must all be positive");
  }
}

double se_covariance(std::span<const double> delta, const SEKernelParams& params) {
  const auto v = se_values(params);
  return se_cov_flat(v, delta);
}

double se_spectral_density(std::span<const double> w, const SEKernelParams& params) {
  const auto v = se_values(params);
  if (params.phi == 0.0) {
    check_dims(w.size(), v.size() - 1, "se_spectral_density");
    return 0.0;
  }
  return std::exp(se_log_density_flat(v, w));
}

double st_covariance(std::span<const double> delta, const NonSeparableSTParams& p) {
  const double v[] = {p.phi, p.rho1, p.rho2, p.rho3, p.c1, p.c2};
  return st_cov_flat(v, delta);
}

SpectralDensityTable::SpectralDensityTable(std::vector<std::size_t> sizes, std::vector<double> values,
                                           std::uint64_t params_hash)
    : sizes_(std::move(sizes)), values_(std::move(values)), params_hash_(params_hash) {
  sqrt_values_.resize(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] >= 0.0)) fail(ErrorKind::numerical, "spectral density values must be nonnegative");
    sqrt_values_[i] = std::sqrt(values_[i]);
  }
}

double SpectralDensityTable::mean() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return values_.empty() ? 0.0 : s / static_cast<double>(values_.size());
}

namespace {

// Kernel sampled on a lattice of the given sizes with the sign fold of the
// half-shifted frequency grid: lag x - m contributes -K(x - m) at x > m/2.
std::vector<Complex> folded_samples(const LagKernel& kernel, const Lattice& lattice) {
  const std::size_t d = lattice.dims();
  const auto& m = lattice.sizes();
  std::vector<Complex> h(lattice.size());
  std::vector<double> delta(d);
  for (std::size_t flat = 0; flat < lattice.size(); ++flat) {
    const auto idx = lattice.unflatten(flat);
    double sign = 1.0;
    bool unpaired = false;
    for (std::size_t l = 0; l < d; ++l) {
      if (2 * idx[l] == m[l]) {
        unpaired = true;
        break;
      }
      if (2 * idx[l] > m[l]) {
        delta[l] = static_cast<double>(idx[l]) - static_cast<double>(m[l]);
        sign = -sign;
      } else {
        delta[l] = static_cast<double>(idx[l]);
      }
    }
    h[flat] = unpaired ? 0.0 : sign * kernel(delta);
  }
  return h;
}

}  // namespace

std::vector<double> sampled_kernel(const LagKernel& kernel, const Lattice& lattice) {
  const auto h = folded_samples(kernel, lattice);
  std::vector<double> out(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) out[i] = h[i].real();
  return out;
}

SpectralDensityTable numeric_spectral_density(const LagKernel& kernel, const Lattice& lattice,
                                              std::vector<std::size_t> oversample) {
  const std::size_t d = lattice.dims();
  if (oversample.empty()) oversample.assign(d, 1);
  if (oversample.size() != d) fail(ErrorKind::config, "oversample factors must match lattice dimension");
  std::vector<std::size_t> big_sizes(d);
  for (std::size_t l = 0; l < d; ++l) {
    if (oversample[l] % 2 == 0) fail(ErrorKind::config, "oversample factors must be odd");
    big_sizes[l] = oversample[l] * lattice.sizes()[l];
  }
  const Lattice big(big_sizes);
  auto h = folded_samples(kernel, big);
  big.forward(h, h);
  const double root_n = std::sqrt(static_cast<double>(big.size()));

  std::vector<double> values(lattice.size());
  double vmax = 0.0;
  for (std::size_t flat = 0; flat < lattice.size(); ++flat) {
    auto idx = lattice.unflatten(flat);
    for (std::size_t l = 0; l < d; ++l) idx[l] = oversample[l] * idx[l] + (oversample[l] - 1) / 2;
    values[flat] = h[big.flatten(idx)].real() * root_n;
    vmax = std::max(vmax, values[flat]);
  }
  // Even kernels have even densities; averaging with the mirror removes
  // round-off asymmetry that square roots would amplify near zero.
  for (std::size_t flat = 0; flat < lattice.size(); ++flat) {
    const std::size_t m = lattice.mirror(flat);
    if (m > flat) values[flat] = values[m] = 0.5 * (values[flat] + values[m]);
  }
  const auto worst = std::min_element(values.begin(), values.end());
  if (worst != values.end() && *worst < 0.0) {
    if (-*worst > 1e-6 * vmax) {
      const std::size_t flat = static_cast<std::size_t>(worst - values.begin());
      std::vector<double> w(d);
      lattice.frequency(flat, w);
      std::ostringstream msg;
      msg << "numeric spectral density has negative mass " << *worst << " (max " << vmax
          << ") at frequency (";
      for (std::size_t l = 0; l < d; ++l) msg << (l ? ", " : "") << w[l];
      msg << "); enlarge the lattice or the oversampling factor";
      fail(ErrorKind::numerical, msg.str());
    }
    for (auto& v : values) v = std::max(v, 0.0);
  }
  return SpectralDensityTable(lattice.sizes(), std::move(values), 0);
}

void register_kernel(const KernelDefinition& def) {
  if (def.name.empty() || !def.param_names || !def.covariance) {
    fail(ErrorKind::config, "kernel definition needs a name, parameter names and a covariance");
  }
  auto& r = registry();
  std::lock_guard<std::mutex> lock(r.mutex);
  r.defs[def.name] = def;
}

const KernelDefinition& kernel_definition(const std::string& name) {
  auto& r = registry();
  std::lock_guard<std::mutex> lock(r.mutex);
  const auto it = r.defs.find(name);
  if (it == r.defs.end()) fail(ErrorKind::config, "unknown kernel family '" + name + "'");
  return it->second;
}

std::vector<std::string> registered_kernels() {
  auto& r = registry();
  std::lock_guard<std::mutex> lock(r.mutex);
  std::vector<std::string> names;
  for (const auto& [name, def] : r.defs) names.push_back(name);
  return names;
}

std::vector<std::string> param_names(const std::string& family, std::size_t dims) {
  return kernel_definition(family).param_names(dims);
}

Theta make_theta(const SEKernelParams& params) {
  validate(params);
  return Theta{"se", params.rho.size(), se_values(params)};
}

Theta make_theta(const NonSeparableSTParams& p) {
  validate(p);
  return Theta{"st_nonseparable", 3, {p.phi, p.rho1, p.rho2, p.rho3, p.c1, p.c2}};
}

SEKernelParams as_se(const Theta& theta) {
  if (theta.family != "se") fail(ErrorKind::config, "theta is not a squared exponential");
  return SEKernelParams{theta.values[0], {theta.values.begin() + 1, theta.values.end()}};
}

NonSeparableSTParams as_st(const Theta& theta) {
  if (theta.family != "st_nonseparable") fail(ErrorKind::config, "theta is not a space-time kernel");
  const auto& v = theta.values;
  return NonSeparableSTParams{v[0], v[1], v[2], v[3], v[4], v[5]};
}

void validate(const Theta& theta) {
  const auto& def = kernel_definition(theta.family);
  if (def.fixed_dims != 0 && theta.dims != def.fixed_dims) {
    fail(ErrorKind::config, "kernel '" + theta.family + "' needs " + std::to_string(def.fixed_dims) +
                                " dimensions, got " + std::to_string(theta.dims));
  }
  const auto names = def.param_names(theta.dims);
  if (names.size() != theta.values.size()) {
    fail(ErrorKind::config, "kernel '" + theta.family + "' expects " + std::to_string(names.size()) +
                                " parameters, got " + std::to_string(theta.values.size()));
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!(theta.values[i] > 0.0) || !std::isfinite(theta.values[i])) {
      fail(ErrorKind::config, "kernel parameter " + names[i] + " must be positive and finite");
    }
  }
}

double lag_covariance(const Theta& theta, std::span<const double> delta) {
  return kernel_definition(theta.family).covariance(theta.values, delta);
}

std::map<std::string, double> to_param_map(const Theta& theta) {
  const auto names = param_names(theta.family, theta.dims);
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < names.size(); ++i) out[names[i]] = theta.values.at(i);
  return out;
}

Theta theta_from_map(const std::string& family, std::size_t dims,
                     const std::map<std::string, double>& map) {
  const auto names = param_names(family, dims);
  Theta theta{family, dims, {}};
  for (const auto& name : names) {
    const auto it = map.find(name);
    if (it == map.end()) fail(ErrorKind::config, "missing kernel parameter '" + name + "'");
    theta.values.push_back(it->second);
  }
  for (const auto& [key, value] : map) {
    if (std::find(names.begin(), names.end(), key) == names.end()) {
      fail(ErrorKind::config, "unexpected kernel parameter '" + key + "' for family " + family);
    }
  }
  validate(theta);
  return theta;
}

std::uint64_t theta_hash(const Theta& theta) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  mix(theta.family.data(), theta.family.size());
  mix(&theta.dims, sizeof(theta.dims));
  for (double v : theta.values) mix(&v, sizeof(v));
  return h;
}

}  // namespace msgp
