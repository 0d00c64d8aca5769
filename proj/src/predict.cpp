#include "msgp/predict.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "msgp/error.hpp"
#include "msgp/spectral.hpp"

namespace msgp {

namespace {

struct Components {
  std::vector<std::size_t> active;  // component indices with p_k above the floor
  CrossCovarianceCache cache;
};

Components build_components(const Lattice& lattice, const ChainDraw& draw, double min_weight) {
  const std::size_t k0 = draw.thetas.size();
  if (draw.p.size() != k0) fail(ErrorKind::data, "kriging state: weights and thetas differ in length");
  if (!(draw.sigma2 > 0.0)) fail(ErrorKind::data, "kriging state: sigma2 must be positive");
  std::vector<SpectralDensityTable> tables;
  tables.reserve(k0);
  for (const auto& t : draw.thetas) tables.push_back(spectral_table(t, lattice, false));
  Components c{{}, CrossCovarianceCache(lattice, std::move(tables))};
  for (std::size_t k = 0; k < k0; ++k) {
    if (draw.p[k] > min_weight) c.active.push_back(k);
  }
  return c;
}

[[noreturn]] void factorization_error(const Eigen::MatrixXd& k) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  std::ostringstream msg;
  msg << "training covariance factorization failed (eigenvalues " << ev.minCoeff() << " .. " << ev.maxCoeff()
      << ", condition number " << ev.maxCoeff() / ev.minCoeff() << ")";
  fail(ErrorKind::numerical, msg.str());
}

double clamp_variance(double v, double scale) {
  if (v >= 0.0) return v;
  if (v < -1e-10 * std::max(1.0, scale)) {
    std::ostringstream msg;
    msg << "negative predictive variance " << v;
    fail(ErrorKind::numerical, msg.str());
  }
  warn("clamped predictive variance " + std::to_string(v) + " to 0");
  return 0.0;
}

// Shared core. `zero_cross` zeroes every covariance between different labels.
PredictionResult krige(const Lattice& lattice, std::span<const std::size_t> targets, const ObservedData& data,
                       const ChainDraw& draw, const KrigingOptions& options, bool zero_cross) {
  const std::size_t n = data.size();
  const std::size_t nt = targets.size();
  if (draw.z.size() != n) fail(ErrorKind::data, "kriging state: labels and observations differ in length");
  for (auto t : targets) {
    if (t >= lattice.size()) fail(ErrorKind::data, "target site outside the lattice");
  }
  const Components comp = build_components(lattice, draw, options.min_weight);
  const auto& cache = comp.cache;
  const auto& z = draw.z;

  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) y[static_cast<Eigen::Index>(i)] = data.y[i];

  // Training covariance and its factor, either dense or one block per label.
  Eigen::MatrixXd ktrain = assemble_covariance(cache, data.sites, z, draw.sigma2);
  if (zero_cross) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (z[i] != z[j]) ktrain(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 0.0;
      }
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt;
  if (n > 0 && !zero_cross) {
    llt.compute(ktrain);
    if (llt.info() != Eigen::Success) factorization_error(ktrain);
  }
  std::vector<std::vector<std::size_t>> blocks;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> block_llt;
  if (zero_cross && n > 0) {
    blocks.resize(draw.thetas.size());
    for (std::size_t i = 0; i < n; ++i) blocks[z[i]].push_back(i);
    block_llt.resize(blocks.size());
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      const auto& b = blocks[k];
      if (b.empty()) continue;
      Eigen::MatrixXd kb(b.size(), b.size());
      for (std::size_t r = 0; r < b.size(); ++r) {
        for (std::size_t c = 0; c < b.size(); ++c) {
          kb(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
              ktrain(static_cast<Eigen::Index>(b[r]), static_cast<Eigen::Index>(b[c]));
        }
      }
      block_llt[k].compute(kb);
      if (block_llt[k].info() != Eigen::Success) factorization_error(kb);
    }
  }

  PredictionResult out;
  out.mean.assign(nt, 0.0);
  out.variance.assign(nt, 0.0);
  std::vector<double> prior_var(nt, 0.0);
  // Whitened cross-covariances per active component (n x nt each), kept only
  // when the target covariance is requested.
  std::vector<Eigen::MatrixXd> whitened;
  for (std::size_t k : comp.active) {
    const double pk = draw.p[k];
    const double k00 = cache(k, k, 0, 0);
    Eigen::VectorXd kmean(static_cast<Eigen::Index>(nt));
    Eigen::VectorXd kred(static_cast<Eigen::Index>(nt));
    Eigen::MatrixXd w;
    if (!zero_cross) {
      Eigen::MatrixXd kx(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(nt));
      for (std::size_t t = 0; t < nt; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
          kx(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = cache(k, z[i], targets[t], data.sites[i]);
        }
      }
      if (n > 0) {
        w = llt.matrixL().solve(kx);
        const Eigen::VectorXd wy = llt.matrixL().solve(y);
        kmean = w.transpose() * wy;
        kred = w.colwise().squaredNorm().transpose();
      } else {
        kmean.setZero();
        kred.setZero();
      }
    } else {
      kmean.setZero();
      kred.setZero();
      if (n > 0 && !blocks[k].empty()) {
        const auto& b = blocks[k];
        Eigen::MatrixXd kx(static_cast<Eigen::Index>(b.size()), static_cast<Eigen::Index>(nt));
        Eigen::VectorXd yb(static_cast<Eigen::Index>(b.size()));
        for (std::size_t r = 0; r < b.size(); ++r) {
          yb[static_cast<Eigen::Index>(r)] = data.y[b[r]];
          for (std::size_t t = 0; t < nt; ++t) {
            kx(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t)) = cache(k, k, targets[t], data.sites[b[r]]);
          }
        }
        const auto& f = block_llt[k];
        const Eigen::MatrixXd wb = f.matrixL().solve(kx);
        const Eigen::VectorXd wy = f.matrixL().solve(yb);
        kmean = wb.transpose() * wy;
        kred = wb.colwise().squaredNorm().transpose();
        if (options.covariance) {
          w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(nt));
          for (std::size_t r = 0; r < b.size(); ++r) w.row(static_cast<Eigen::Index>(b[r])) = wb.row(static_cast<Eigen::Index>(r));
        }
      }
    }
    for (std::size_t t = 0; t < nt; ++t) {
      const auto ti = static_cast<Eigen::Index>(t);
      out.mean[t] += pk * kmean[ti];
      out.variance[t] += pk * (k00 + draw.sigma2 - kred[ti]);
      prior_var[t] += pk * (k00 + draw.sigma2);
    }
    if (options.covariance) {
      if (w.size() == 0) w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(nt));
      whitened.push_back(std::move(w));
    }
  }
  for (std::size_t t = 0; t < nt; ++t) out.variance[t] = clamp_variance(out.variance[t], prior_var[t]);

  if (options.covariance) {
    const auto ntt = static_cast<Eigen::Index>(nt);
    out.covariance = Eigen::MatrixXd::Zero(ntt, ntt);
    for (std::size_t a = 0; a < comp.active.size(); ++a) {
      for (std::size_t b = 0; b < comp.active.size(); ++b) {
        const std::size_t k1 = comp.active[a];
        const std::size_t k2 = comp.active[b];
        if (zero_cross && k1 != k2) continue;
        const double w12 = draw.p[k1] * draw.p[k2];
        const Eigen::MatrixXd red = whitened[a].transpose() * whitened[b];
        for (std::size_t i = 0; i < nt; ++i) {
          for (std::size_t j = 0; j < nt; ++j) {
            if (i == j) continue;
            out.covariance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
                w12 * (cache(k1, k2, targets[i], targets[j]) - red(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
          }
        }
      }
    }
    for (std::size_t i = 0; i < nt; ++i) out.covariance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = out.variance[i];
  }
  return out;
}

}  // namespace

PredictionResult krige_msgp(const Lattice& lattice, std::span<const std::size_t> targets, const ObservedData& data,
                            const ChainDraw& draw, const KrigingOptions& options) {
  return krige(lattice, targets, data, draw, options, false);
}

PredictionResult krige_igp(const Lattice& lattice, std::span<const std::size_t> targets, const ObservedData& data,
                           const ChainDraw& draw, const KrigingOptions& options) {
  return krige(lattice, targets, data, draw, options, true);
}

PredictionResult posterior_predict(const Lattice& lattice, std::span<const std::size_t> targets,
                                   const ObservedData& data, const PosteriorChain& chain, CoefficientMode mode,
                                   const KrigingOptions& options) {
  if (chain.draws.empty()) fail(ErrorKind::data, "posterior_predict: chain has no retained draws");
  const std::size_t stride = std::max<std::size_t>(1, options.thin);
  KrigingOptions per_draw = options;
  per_draw.covariance = false;
  const std::size_t nt = targets.size();
  std::vector<std::vector<double>> means;
  std::vector<std::vector<double>> vars;
  for (std::size_t d = 0; d < chain.draws.size(); d += stride) {
    auto r = mode == CoefficientMode::shared ? krige_msgp(lattice, targets, data, chain.draws[d], per_draw)
                                             : krige_igp(lattice, targets, data, chain.draws[d], per_draw);
    means.push_back(std::move(r.mean));
    vars.push_back(std::move(r.variance));
  }
  const double m = static_cast<double>(means.size());
  PredictionResult out;
  out.mean.assign(nt, 0.0);
  out.variance.assign(nt, 0.0);
  for (std::size_t t = 0; t < nt; ++t) {
    double mu = 0.0;
    double within = 0.0;
    for (std::size_t d = 0; d < means.size(); ++d) {
      mu += means[d][t];
      within += vars[d][t];
    }
    mu /= m;
    within /= m;
    double between = 0.0;
    for (const auto& md : means) between += (md[t] - mu) * (md[t] - mu);
    out.mean[t] = mu;
    out.variance[t] = within + between / m;
  }
  if (options.keep_draws) {
    out.draw_mean = std::move(means);
    out.draw_variance = std::move(vars);
  }
  return out;
}

std::vector<double> efficiency_gap(const Lattice& lattice, std::span<const std::size_t> targets,
                                   const ObservedData& data, const ChainDraw& draw) {
  const auto msgp = krige_msgp(lattice, targets, data, draw);
  const auto igp = krige_igp(lattice, targets, data, draw);
  std::vector<double> gap(targets.size());
  for (std::size_t t = 0; t < gap.size(); ++t) gap[t] = igp.variance[t] - msgp.variance[t];
  return gap;
}

Metrics metrics(std::span<const double> mean, std::span<const double> variance, std::span<const double> truth) {
  if (mean.size() != truth.size() || variance.size() != truth.size()) {
    fail(ErrorKind::data, "metrics: predictions and truth differ in length");
  }
  if (truth.empty()) fail(ErrorKind::data, "metrics: no targets");
  double se = 0.0;
  double v = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    se += (truth[i] - mean[i]) * (truth[i] - mean[i]);
    v += variance[i];
  }
  const double n = static_cast<double>(truth.size());
  return {std::sqrt(se / n), std::sqrt(v / n)};
}

}  // namespace msgp
