#include "msgp/simdata.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "msgp/error.hpp"
#include "msgp/lattice.hpp"
#include "msgp/spectral.hpp"

namespace msgp {

double PintoreField::beta(double x1, double x2) const {
  const double r = rho(x1, x2);
  if (!(r > 0.0)) fail(ErrorKind::config, "pintore rho must be positive");
  return 2.0 * r * r;
}

PintoreField PintoreField::paper(double phi) {
  PintoreField f;
  f.phi = phi;
  f.rho = [](double x1, double x2) {
    return (std::cos(4.0 * std::numbers::pi * x1 / 100.0) + 2.0) * std::exp(x2 / 200.0);
  };
  return f;
}

double pintore_covariance(const Point2& xi, const Point2& xj, const PintoreField& field) {
  const double bi = field.beta(xi[0], xi[1]);
  const double bj = field.beta(xj[0], xj[1]);
  const double theta = 0.5 * (bi + bj);
  const double h = 2.0 * std::sqrt(bi * bj) / (bi + bj);
  const double d0 = xi[0] - xj[0];
  const double d1 = xi[1] - xj[1];
  return field.phi * h * std::exp(-(d0 * d0 + d1 * d1) / theta);
}

Eigen::MatrixXd pintore_covariance_matrix(std::span<const Point2> sites, const PintoreField& field) {
  const auto n = static_cast<Eigen::Index>(sites.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      k(i, j) = k(j, i) = pintore_covariance(sites[static_cast<std::size_t>(i)], sites[static_cast<std::size_t>(j)], field);
    }
  }
  return k;
}

double se_mixed_covariance(std::span<const double> delta, const SEKernelParams& a, const SEKernelParams& b) {
  if (a.rho.size() != delta.size() || b.rho.size() != delta.size()) {
    fail(ErrorKind::config, "se_mixed_covariance: dimension mismatch");
  }
  double v = std::sqrt(a.phi * b.phi);
  double e = 0.0;
  for (std::size_t l = 0; l < delta.size(); ++l) {
    const double s = a.rho[l] * a.rho[l] + b.rho[l] * b.rho[l];
    v *= std::sqrt(2.0 * a.rho[l] * b.rho[l] / s);
    e += delta[l] * delta[l] / s;
  }
  return v * std::exp(-e);
}

std::vector<double> sample_gaussian(const Eigen::MatrixXd& k, double sigma2, Rng& rng) {
  if (sigma2 < 0.0) fail(ErrorKind::config, "noise variance must be nonnegative");
  const auto n = k.rows();
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  if (n == 0) return out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
  if (es.info() != Eigen::Success) fail(ErrorKind::numerical, "eigendecomposition of the covariance failed");
  const auto& ev = es.eigenvalues();
  const double norm = ev.cwiseAbs().maxCoeff();
  if (ev.minCoeff() < -1e-8 * norm) {
    std::ostringstream msg;
    msg << "covariance is not positive semidefinite (smallest eigenvalue " << ev.minCoeff() << ", largest " << norm << ")";
    fail(ErrorKind::numerical, msg.str());
  }
  Eigen::VectorXd e(n);
  for (Eigen::Index i = 0; i < n; ++i) e[i] = std::sqrt(std::max(ev[i], 0.0)) * rng.normal();
  const Eigen::VectorXd f = es.eigenvectors() * e;
  const double sd = std::sqrt(sigma2);
  for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = f[i] + (sigma2 > 0.0 ? sd * rng.normal() : 0.0);
  return out;
}

std::vector<double> simulate_pintore(std::span<const Point2> sites, const PintoreField& field, double sigma2,
                                     Rng& rng) {
  return sample_gaussian(pintore_covariance_matrix(sites, field), sigma2, rng);
}

std::vector<Point2> pintore_grid(std::size_t nx, std::size_t ny, const PintoreField& field) {
  std::vector<Point2> out;
  out.reserve(nx * ny);
  const double dx = (field.hi[0] - field.lo[0]) / static_cast<double>(nx);
  const double dy = (field.hi[1] - field.lo[1]) / static_cast<double>(ny);
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      out.push_back({field.lo[0] + (static_cast<double>(i) + 0.5) * dx, field.lo[1] + (static_cast<double>(j) + 0.5) * dy});
    }
  }
  return out;
}

Dataset simulate_pintore_dataset(std::size_t nx, std::size_t ny, const PintoreField& field, double sigma2, Rng& rng,
                                 const std::function<long(double, double)>& label) {
  const auto grid = pintore_grid(nx, ny, field);
  const auto y = simulate_pintore(grid, field, sigma2, rng);
  Dataset out;
  out.dims = 2;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out.coords.push_back({grid[i][0], grid[i][1]});
    out.y.push_back(y[i]);
    if (label) out.true_component.push_back(label(grid[i][0], grid[i][1]));
  }
  return out;
}

long pintore_level(double x1, double x2, double side) {
  const double u1 = x1 * 100.0 / side;
  const double u2 = x2 * 100.0 / side;
  const double r = (std::cos(4.0 * std::numbers::pi * u1 / 100.0) + 2.0) * std::exp(u2 / 200.0);
  return r < 1.8 ? 1 : (r < 3.0 ? 2 : 3);
}

PintoreField pintore_levels(const std::array<double, 3>& levels, double side, double phi) {
  for (double r : levels) {
    if (!(r > 0.0)) fail(ErrorKind::config, "level length-scales must be positive");
  }
  PintoreField f;
  f.phi = phi;
  f.lo = {0.0, 0.0};
  f.hi = {side, side};
  f.rho = [levels, side](double x1, double x2) { return levels[static_cast<std::size_t>(pintore_level(x1, x2, side) - 1)]; };
  return f;
}

Eigen::MatrixXd two_region_covariance(const TwoRegionOptions& o) {
  if (o.split > o.n) fail(ErrorKind::config, "two-region split beyond n");
  validate(o.left);
  validate(o.right);
  const auto n = static_cast<Eigen::Index>(o.n);
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const bool li = static_cast<std::size_t>(i) < o.split;
      const bool lj = static_cast<std::size_t>(j) < o.split;
      const double delta = static_cast<double>(i - j);
      double v = 0.0;
      if (li == lj) {
        v = se_covariance(std::span<const double>(&delta, 1), li ? o.left : o.right);
      } else if (!o.zero_cross) {
        v = se_mixed_covariance(std::span<const double>(&delta, 1), o.left, o.right);
      }
      k(i, j) = k(j, i) = v;
    }
  }
  return k;
}

Dataset simulate_two_region_1d(const TwoRegionOptions& o, Rng& rng) {
  const auto y = sample_gaussian(two_region_covariance(o), o.sigma2, rng);
  Dataset d;
  d.dims = 1;
  for (std::size_t i = 0; i < o.n; ++i) {
    d.coords.push_back({static_cast<double>(i + 1)});
    d.y.push_back(y[i]);
    d.true_component.push_back(i < o.split ? 1 : 2);
  }
  return d;
}

Dataset simulate_st_cube(std::size_t nx, std::size_t ny, std::size_t nt, std::span<const NonSeparableSTParams> components,
                         std::span<const std::size_t> region, double sigma2, Rng& rng) {
  const std::size_t n = nx * ny * nt;
  if (n == 0) fail(ErrorKind::config, "st cube extents must be positive");
  if (region.size() != n) fail(ErrorKind::config, "st cube region map must cover every site");
  if (components.empty()) fail(ErrorKind::config, "st cube needs at least one component");
  std::vector<Theta> thetas;
  for (const auto& c : components) thetas.push_back(make_theta(c));
  const Lattice lattice({2 * nx, 2 * ny, 2 * nt});
  // Padding sites take component 0; they are discarded.
  std::vector<std::size_t> labels(lattice.size(), 0);
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      for (std::size_t t = 0; t < nt; ++t) {
        const std::size_t s = (i * ny + j) * nt + t;
        if (region[s] >= components.size()) fail(ErrorKind::config, "st cube region label out of range");
        const std::size_t idx[] = {i, j, t};
        labels[lattice.flatten(idx)] = region[s];
      }
    }
  }
  const auto field = simulate_field(lattice, thetas, labels, {}, sigma2, rng);
  Dataset d;
  d.dims = 3;
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      for (std::size_t t = 0; t < nt; ++t) {
        const std::size_t idx[] = {i, j, t};
        d.coords.push_back({static_cast<double>(i), static_cast<double>(j), static_cast<double>(t)});
        d.y.push_back(field[lattice.flatten(idx)]);
        d.true_component.push_back(static_cast<long>(region[(i * ny + j) * nt + t]) + 1);
      }
    }
  }
  return d;
}

}  // namespace msgp
