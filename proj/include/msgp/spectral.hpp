#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "msgp/kernels.hpp"
#include "msgp/lattice.hpp"
#include "msgp/rng.hpp"

namespace msgp {

// Model spectral table for theta on the lattice: the closed-form density when
// the family has one, otherwise the lattice-sum FFT with enough oversampling
// for the kernel to decay. Values are rescaled so (1/|W|) sum_w g(w) equals
// K(0; theta) exactly, which makes the discrete cross-covariance
// (1/|W|) sum_w cos(delta.w) g_i^{1/2} g_j^{1/2} reproduce K(delta) when
// theta_i = theta_j. Warns when the density is not negligible at the
// boundary frequencies.
SpectralDensityTable spectral_table(const Theta& theta, const Lattice& lattice,
                                    bool warn_aliasing = true);

// Largest boundary-frequency value relative to max(g).
double boundary_mass_ratio(const SpectralDensityTable& table, const Lattice& lattice);

// White-noise coefficients a(w), b(w) stored on the canonical half-space
// (entry h belongs to frequency lattice.half_space()[h]). They extend to the
// full grid Hermitian-symmetrically: a(-w) = a(w), b(-w) = -b(w).
struct SpectralCoefficients {
  std::vector<double> a;
  std::vector<double> b;

  static SpectralCoefficients zeros(const Lattice& lattice);
  static SpectralCoefficients draw(const Lattice& lattice, Rng& rng);
  double squared_norm() const;
  bool operator==(const SpectralCoefficients& other) const = default;
};

// Full-grid spectrum (g(w)/2)^{1/2} (a(w) + j b(w)) of one component.
void component_spectrum(const Lattice& lattice, std::span<const double> sqrt_g,
                        const SpectralCoefficients& coeffs, std::span<Complex> out);

// Real field Q (G/2)^{1/2} (a + jb) on every lattice site. Throws if the
// imaginary residue exceeds 1e-10; reports it through max_imag when given.
std::vector<double> component_field(const Lattice& lattice, const SpectralDensityTable& table,
                                    const SpectralCoefficients& coeffs, double* max_imag = nullptr);

// (1/|W|) sum_w cos((x_i - x_j).w) g_i^{1/2}(w) g_j^{1/2}(w), evaluated
// directly. Measurement noise is not included.
double cross_covariance(const Lattice& lattice, std::size_t site_i, std::size_t site_j,
                        const SpectralDensityTable& gi, const SpectralDensityTable& gj);

// All-lag cross-covariance functions for a fixed set of component tables, one
// inverse FFT per unordered component pair.
class CrossCovarianceCache {
 public:
  CrossCovarianceCache(const Lattice& lattice, std::vector<SpectralDensityTable> tables);

  std::size_t components() const { return tables_.size(); }
  const Lattice& lattice() const { return lattice_; }
  double operator()(std::size_t k1, std::size_t k2, std::size_t site_i, std::size_t site_j) const;

 private:
  std::size_t pair_index(std::size_t k1, std::size_t k2) const;

  Lattice lattice_;
  std::vector<SpectralDensityTable> tables_;
  std::vector<std::vector<double>> lags_;
  std::vector<std::vector<std::size_t>> coords_;
};

// n x n covariance of observations at `sites` whose parameters are
// thetas[i]; sigma2 is added on the diagonal.
Eigen::MatrixXd assemble_covariance(const Lattice& lattice, std::span<const std::size_t> sites,
                                    std::span<const Theta> thetas, double sigma2);

// Same, for observations labelled with component indices into `components`.
Eigen::MatrixXd assemble_covariance(const CrossCovarianceCache& cache,
                                    std::span<const std::size_t> sites,
                                    std::span<const std::size_t> labels, double sigma2);

// One draw of y(x) = mu(x) + f_{theta(x)}(x) + eps over every lattice site,
// with a single white-noise draw shared by all components. site_component[x]
// indexes `components`; mu may be empty (zero mean).
std::vector<double> simulate_field(const Lattice& lattice, std::span<const Theta> components,
                                   std::span<const std::size_t> site_component,
                                   std::span<const double> mu, double sigma2, Rng& rng);

// Per-site parameter form: thetas has one entry per lattice site.
std::vector<double> simulate_field(const Lattice& lattice, std::span<const Theta> thetas,
                                   std::span<const double> mu, double sigma2, Rng& rng);

}  // namespace msgp
