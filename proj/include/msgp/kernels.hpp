#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "msgp/lattice.hpp"

namespace msgp {

// Anisotropic squared exponential, phi * exp(-sum_l delta_l^2 / (2 rho_l^2)).
struct SEKernelParams {
  double phi = 1.0;
  std::vector<double> rho;  // one length-scale per dimension, lattice units
};

// Non-separable space-time kernel with space-time interaction scales c1, c2.
struct NonSeparableSTParams {
  double phi = 1.0;
  double rho1 = 1.0;
  double rho2 = 1.0;
  double rho3 = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;
};

double se_covariance(std::span<const double> delta, const SEKernelParams& params);
double se_spectral_density(std::span<const double> w, const SEKernelParams& params);
double st_covariance(std::span<const double> delta, const NonSeparableSTParams& params);

void validate(const SEKernelParams& params);
void validate(const NonSeparableSTParams& params);

// Nonnegative spectral density on a lattice's frequency grid.
class SpectralDensityTable {
 public:
  SpectralDensityTable() = default;
  SpectralDensityTable(std::vector<std::size_t> sizes, std::vector<double> values,
                       std::uint64_t params_hash);

  const std::vector<std::size_t>& sizes() const { return sizes_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<const double> sqrt_values() const { return sqrt_values_; }
  std::uint64_t params_hash() const { return params_hash_; }
  // (1/|W|) sum_w g(w): the zero-lag covariance the table encodes.
  double mean() const;
  bool matches(const Lattice& lattice) const { return sizes_ == lattice.sizes(); }

 private:
  std::vector<std::size_t> sizes_;
  std::vector<double> values_;
  std::vector<double> sqrt_values_;
  std::uint64_t params_hash_ = 0;
};

using LagKernel = std::function<double(std::span<const double>)>;

// g(w) = sum over lattice lags of K(lag) exp(-j lag.w), evaluated with one FFT.
// Lags span |delta_l| < r_l m_l / 2 where r_l = oversample[l] (odd, default 1);
// the unpaired lag r_l m_l / 2 is sampled as 0 so the result is real and even.
// Negative outputs within 1e-6 * max are clamped to 0; larger ones are an error
// naming the worst frequency.
SpectralDensityTable numeric_spectral_density(const LagKernel& kernel, const Lattice& lattice,
                                              std::vector<std::size_t> oversample = {});

// The lag values an inverse transform of numeric_spectral_density reproduces
// exactly on the site grid: the kernel on |delta_l| < m_l/2 with the
// alternating-sign fold the shifted frequency grid implies.
std::vector<double> sampled_kernel(const LagKernel& kernel, const Lattice& lattice);

// ---------------------------------------------------------------------------
// Kernel registry. Families are selected by string key ("se",
// "st_nonseparable") and parameterized by a flat positive vector whose names
// come from param_names().

struct KernelDefinition {
  std::string name;
  // 0 if the family accepts any dimension.
  std::size_t fixed_dims = 0;
  std::vector<std::string> (*param_names)(std::size_t dims) = nullptr;
  double (*covariance)(std::span<const double> values, std::span<const double> delta) = nullptr;
  // Log of the closed-form continuous spectral density, or nullptr when the
  // density has to be computed numerically.
  double (*log_spectral_density)(std::span<const double> values, std::span<const double> w) = nullptr;
};

void register_kernel(const KernelDefinition& def);
const KernelDefinition& kernel_definition(const std::string& name);
std::vector<std::string> registered_kernels();

// One stationary parameter set theta* of a registered family.
struct Theta {
  std::string family = "se";
  std::size_t dims = 1;
  std::vector<double> values;

  double phi() const { return values.front(); }
  bool operator==(const Theta& other) const = default;
};

std::vector<std::string> param_names(const std::string& family, std::size_t dims);
Theta make_theta(const SEKernelParams& params);
Theta make_theta(const NonSeparableSTParams& params);
SEKernelParams as_se(const Theta& theta);
NonSeparableSTParams as_st(const Theta& theta);

// Checks family/dimension/arity and strict positivity.
void validate(const Theta& theta);

double lag_covariance(const Theta& theta, std::span<const double> delta);

std::map<std::string, double> to_param_map(const Theta& theta);
Theta theta_from_map(const std::string& family, std::size_t dims,
                     const std::map<std::string, double>& map);

std::uint64_t theta_hash(const Theta& theta);

}  // namespace msgp
