#include "msgp/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "msgp/error.hpp"

namespace msgp {

std::vector<double> LatticeMapping::to_lattice(const std::vector<double>& x) const {
  std::vector<double> out(x.size());
  for (std::size_t l = 0; l < x.size(); ++l) out[l] = (x[l] - offset[l]) * scale[l];
  return out;
}

std::size_t LatticeMapping::site(const Lattice& lattice, const std::vector<double>& x) const {
  if (x.size() != sizes.size()) fail(ErrorKind::data, "coordinate has the wrong dimension");
  std::vector<std::size_t> idx(x.size());
  const auto u = to_lattice(x);
  for (std::size_t l = 0; l < x.size(); ++l) {
    const double r = std::round(u[l]);
    if (!(r >= 0.0 && r <= static_cast<double>(sizes[l] - 1))) {
      std::ostringstream msg;
      msg << "coordinate " << x[l] << " in dimension " << l + 1 << " maps outside the lattice";
      fail(ErrorKind::data, msg.str());
    }
    idx[l] = static_cast<std::size_t>(r);
  }
  return lattice.flatten(idx);
}

LatticeMapping fit_mapping(const Dataset& data, std::vector<std::size_t> sizes, double padding) {
  if (data.size() == 0) fail(ErrorKind::data, "dataset is empty");
  if (!(padding >= 1.0)) fail(ErrorKind::config, "lattice padding must be at least 1");
  const std::size_t d = data.dims;
  LatticeMapping map;
  map.padding = padding;
  map.offset.resize(d);
  map.scale.resize(d);
  if (sizes.empty()) {
    sizes.resize(d);
    for (std::size_t l = 0; l < d; ++l) {
      std::set<double> distinct;
      for (const auto& row : data.coords) distinct.insert(row[l]);
      // Gridded data with gaps keep their spacing; scattered data fall back
      // to one site per distinct value.
      double points = static_cast<double>(distinct.size());
      if (distinct.size() > 1) {
        double gap = std::numeric_limits<double>::infinity();
        for (auto it = std::next(distinct.begin()); it != distinct.end(); ++it) gap = std::min(gap, *it - *std::prev(it));
        const double steps = std::round((*distinct.rbegin() - *distinct.begin()) / gap);
        if (steps + 1.0 <= 4.0 * points) points = steps + 1.0;
      }
      auto m = static_cast<std::size_t>(std::ceil(padding * points));
      m = std::max<std::size_t>(m + (m % 2), 2);
      sizes[l] = m;
    }
  }
  if (sizes.size() != d) fail(ErrorKind::config, "lattice sizes must match the data dimension");
  for (std::size_t l = 0; l < d; ++l) {
    double lo = data.coords[0][l];
    double hi = lo;
    for (const auto& row : data.coords) {
      lo = std::min(lo, row[l]);
      hi = std::max(hi, row[l]);
    }
    const double span = std::floor(static_cast<double>(sizes[l] - 1) / padding);
    map.offset[l] = lo;
    map.scale[l] = hi > lo ? span / (hi - lo) : 1.0;
  }
  map.sizes = std::move(sizes);
  return map;
}

ObservedData map_to_lattice(const Dataset& data, const LatticeMapping& mapping, const Lattice& lattice,
                            CollisionPolicy policy) {
  if (mapping.sizes != lattice.sizes()) fail(ErrorKind::config, "mapping and lattice disagree on sizes");
  ObservedData out;
  std::map<std::size_t, std::size_t> first_row;  // site -> output index
  std::map<std::size_t, std::size_t> row_of;     // output index -> source row
  std::vector<double> counts;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data.y[i])) continue;
    const std::size_t site = mapping.site(lattice, data.coords[i]);
    const auto it = first_row.find(site);
    if (it == first_row.end()) {
      first_row[site] = out.sites.size();
      row_of[out.sites.size()] = i;
      out.sites.push_back(site);
      out.y.push_back(data.y[i]);
      counts.push_back(1.0);
      continue;
    }
    if (policy == CollisionPolicy::error) {
      std::ostringstream msg;
      msg << "rows " << row_of[it->second] + 1 << " and " << i + 1
          << " map to the same lattice site; refine the lattice or use --collision=average";
      fail(ErrorKind::data, msg.str());
    }
    const std::size_t k = it->second;
    out.y[k] = (out.y[k] * counts[k] + data.y[i]) / (counts[k] + 1.0);
    counts[k] += 1.0;
  }
  if (out.size() == 0) fail(ErrorKind::data, "no observations with a finite outcome");
  return out;
}

double Trend::operator()(const std::vector<double>& x) const {
  if (beta.empty()) return 0.0;
  double v = beta[0];
  std::size_t j = 1;
  for (std::size_t l = 0; l < dims; ++l) {
    double pw = 1.0;
    for (std::size_t p = 1; p <= degree; ++p) {
      pw *= x[l];
      v += beta[j++] * pw;
    }
  }
  return v;
}

Eigen::MatrixXd trend_design(const std::vector<std::vector<double>>& x, std::size_t degree) {
  const std::size_t n = x.size();
  const std::size_t d = n ? x[0].size() : 0;
  Eigen::MatrixXd design(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(1 + d * degree));
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    design(r, 0) = 1.0;
    Eigen::Index j = 1;
    for (std::size_t l = 0; l < d; ++l) {
      double pw = 1.0;
      for (std::size_t p = 1; p <= degree; ++p) {
        pw *= x[i][l];
        design(r, j++) = pw;
      }
    }
  }
  return design;
}

TrendFit fit_trend(const std::vector<std::vector<double>>& x, const std::vector<double>& y, std::size_t degree) {
  if (x.size() != y.size() || x.empty()) fail(ErrorKind::data, "fit_trend: need matching, non-empty x and y");
  const Eigen::MatrixXd design = trend_design(x, degree);
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < design.cols()) {
    fail(ErrorKind::data, "trend design matrix is rank deficient (degree " + std::to_string(degree) +
                              " needs more distinct coordinates)");
  }
  const Eigen::VectorXd beta = qr.solve(yv);
  const Eigen::VectorXd resid = yv - design * beta;
  TrendFit fit;
  fit.trend.degree = degree;
  fit.trend.dims = x[0].size();
  fit.trend.beta.assign(beta.data(), beta.data() + beta.size());
  fit.residuals.assign(resid.data(), resid.data() + resid.size());
  return fit;
}

}  // namespace msgp
