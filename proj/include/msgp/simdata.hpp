#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "msgp/dataset.hpp"
#include "msgp/kernels.hpp"
#include "msgp/rng.hpp"

namespace msgp {

// Locally squared-exponential surface: beta(x) = 2 rho(x)^2.
struct PintoreField {
  std::function<double(double, double)> rho;
  double phi = 1.0;
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{100.0, 100.0};

  double beta(double x1, double x2) const;
  // rho(x) = (cos(4 pi x1 / 100) + 2) exp(x2 / 200) on (0, 100)^2.
  static PintoreField paper(double phi = 1.0);
};

using Point2 = std::array<double, 2>;

// phi h exp(-|xi - xj|^2 / theta), theta = (beta + beta')/2,
// h = 2 sqrt(beta beta') / (beta + beta').
double pintore_covariance(const Point2& xi, const Point2& xj, const PintoreField& field);
Eigen::MatrixXd pintore_covariance_matrix(std::span<const Point2> sites, const PintoreField& field);

// Squared-exponential covariance between locations carrying different
// parameters, mixed through the continuous spectral densities:
// sqrt(phi phi') prod_l sqrt(2 rho_l rho'_l / (rho_l^2 + rho'_l^2))
//   exp(-sum_l delta_l^2 / (rho_l^2 + rho'_l^2)).
double se_mixed_covariance(std::span<const double> delta, const SEKernelParams& a, const SEKernelParams& b);

// One draw from N(0, k + sigma2 I) through an eigendecomposition; fails when
// the smallest eigenvalue is below -1e-8 ||k||.
std::vector<double> sample_gaussian(const Eigen::MatrixXd& k, double sigma2, Rng& rng);

std::vector<double> simulate_pintore(std::span<const Point2> sites, const PintoreField& field, double sigma2,
                                     Rng& rng);

// Cell centres of a regular nx x ny grid over the field's domain, x2
// varying fastest (row-major lattice order).
std::vector<Point2> pintore_grid(std::size_t nx, std::size_t ny, const PintoreField& field);

// nx x ny grid draw as a dataset; `label`, when set, fills true_component.
Dataset simulate_pintore_dataset(std::size_t nx, std::size_t ny, const PintoreField& field, double sigma2, Rng& rng,
                                 const std::function<long(double, double)>& label = {});

// Three-level discretization of the paper's rho over (0, side)^2: points are
// rescaled to (0, 100)^2, rho < 1.8 is level 1, rho < 3 level 2, else 3.
long pintore_level(double x1, double x2, double side);
// Piecewise-constant field with rho = levels[pintore_level - 1].
PintoreField pintore_levels(const std::array<double, 3>& levels, double side, double phi = 1.0);

struct TwoRegionOptions {
  std::size_t n = 100;
  std::size_t split = 50;
  SEKernelParams left{4.0, {3.0}};
  SEKernelParams right{4.0, {12.0}};
  double sigma2 = 0.25;
  bool zero_cross = false;
};

// Sites 1..n; sites <= split use `left`. The cross-region covariance is
// se_mixed_covariance, or zero with `zero_cross`.
Eigen::MatrixXd two_region_covariance(const TwoRegionOptions& options);
Dataset simulate_two_region_1d(const TwoRegionOptions& options, Rng& rng);

// nx x ny x nt cube; region[s] picks the component of site s in row-major
// order (time fastest). Simulated on a lattice padded to twice each extent.
Dataset simulate_st_cube(std::size_t nx, std::size_t ny, std::size_t nt, std::span<const NonSeparableSTParams> components,
                         std::span<const std::size_t> region, double sigma2, Rng& rng);

}  // namespace msgp
