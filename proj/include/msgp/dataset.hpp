#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "msgp/lattice.hpp"

namespace msgp {

// Raw observations: one row per location.
struct Dataset {
  std::size_t dims = 1;
  std::vector<std::vector<double>> coords;  // n rows of d coordinates
  std::vector<double> y;                    // NaN marks a missing outcome
  std::vector<long> true_component;         // optional, 1-based; empty if absent

  std::size_t size() const { return coords.size(); }
};

// Observations after lattice mapping and de-trending; what the sampler sees.
struct ObservedData {
  std::vector<std::size_t> sites;  // flat lattice index per observation
  std::vector<double> y;

  std::size_t size() const { return sites.size(); }
};

enum class CollisionPolicy { error, average };

// Affine map from raw coordinates onto the site grid:
// site_l = round((x_l - offset_l) * scale_l). Data occupy [0, span_l] with
// span_l = floor((m_l - 1) / padding); the rest of the lattice is padding that
// keeps the wrap-around of the periodic transform away from the data.
struct LatticeMapping {
  std::vector<std::size_t> sizes;
  std::vector<double> offset;
  std::vector<double> scale;
  double padding = 2.0;

  std::vector<double> to_lattice(const std::vector<double>& x) const;
  std::size_t site(const Lattice& lattice, const std::vector<double>& x) const;
};

// Fits the mapping to the data extent. Empty `sizes` picks, per dimension,
// the smallest even m >= padding * (number of grid points), where the grid
// step is the smallest gap between distinct coordinate values (or one point
// per distinct value when that grid would be more than 4 times larger).
LatticeMapping fit_mapping(const Dataset& data, std::vector<std::size_t> sizes, double padding = 2.0);

// Maps every observation with a finite outcome to its site. Two observations
// on one site are an error naming both rows (1-based, header excluded) unless
// the policy is `average`.
ObservedData map_to_lattice(const Dataset& data, const LatticeMapping& mapping, const Lattice& lattice,
                            CollisionPolicy policy = CollisionPolicy::error);

// Polynomial trend mu(x) = beta_0 + sum_l sum_{p=1..degree} beta_{lp} x_l^p.
struct Trend {
  std::size_t degree = 0;
  std::size_t dims = 1;
  std::vector<double> beta;

  double operator()(const std::vector<double>& x) const;
};

struct TrendFit {
  Trend trend;
  std::vector<double> residuals;
};

Eigen::MatrixXd trend_design(const std::vector<std::vector<double>>& x, std::size_t degree);

// Ordinary least squares on the polynomial basis; rank deficiency is an error.
TrendFit fit_trend(const std::vector<std::vector<double>>& x, const std::vector<double>& y, std::size_t degree);

}  // namespace msgp
