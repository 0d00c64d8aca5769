#include "msgp/workflow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <numeric>
#include <sstream>
#include <thread>

#include "binary_io.hpp"
#include "msgp/error.hpp"
#include "msgp/io.hpp"
#include "msgp/mixture.hpp"

namespace msgp {

namespace {

constexpr char kMagic[8] = {'M', 'S', 'G', 'P', 'C', 'K', 'P', 'T'};

std::size_t thread_cap() {
  std::size_t cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MSGP_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) fail(ErrorKind::config, "MSGP_THREADS must be a positive integer");
    cap = static_cast<std::size_t>(v);
  }
  return cap;
}

SamplerConfig chain_config(const FitSettings& settings, std::size_t c) {
  SamplerConfig cfg = settings.sampler;
  cfg.seed = chain_seed(settings.sampler.seed, c);
  return cfg;
}

const char* mode_name(CoefficientMode m) { return m == CoefficientMode::shared ? "msgp" : "igp"; }
const char* shape_name(SigmaShape s) { return s == SigmaShape::augmented ? "augmented" : "observations"; }

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

void FitSettings::validate(std::size_t dims) const {
  sampler.validate(dims);
  if (!lattice_sizes.empty() && lattice_sizes.size() != dims)
    fail(ErrorKind::config, "lattice sizes must have one entry per coordinate column");
  for (auto m : lattice_sizes) {
    if (m < 2 || m % 2 != 0) fail(ErrorKind::config, "lattice sizes must be even and at least 2");
  }
  if (!(padding >= 1.0)) fail(ErrorKind::config, "padding must be at least 1");
  if (trend_degree > 4) fail(ErrorKind::config, "trend degree must be at most 4");
  if (chains < 1) fail(ErrorKind::config, "chains must be at least 1");
  if (!(threshold >= 0.0 && threshold < 1.0)) fail(ErrorKind::config, "threshold must lie in [0, 1)");
}

nlohmann::json to_json(const FitSettings& s) {
  const auto& c = s.sampler;
  nlohmann::json j;
  j["family"] = c.family;
  j["k0"] = c.k0;
  j["alpha"] = c.alpha;
  j["iters"] = c.iters;
  j["seed"] = c.seed;
  j["prior_lo"] = c.prior.lo;
  j["prior_hi"] = c.prior.hi;
  j["adapt_window"] = c.adapt_window;
  j["target_accept"] = c.target_accept;
  j["adapt"] = c.adapt;
  j["initial_step"] = c.initial_step;
  j["model"] = mode_name(c.mode);
  j["sigma_shape"] = shape_name(c.sigma_shape);
  j["thin"] = c.thin;
  j["marginalize_empty"] = c.marginalize_empty;
  j["collapse_theta"] = c.collapse_theta;
  j["lattice"] = s.lattice_sizes;
  j["padding"] = s.padding;
  j["trend_degree"] = s.trend_degree;
  j["collision"] = s.collision == CollisionPolicy::error ? "error" : "average";
  j["chains"] = s.chains;
  j["threshold"] = s.threshold;
  return j;
}

FitSettings settings_from_json(const nlohmann::json& j) {
  try {
    FitSettings s;
    auto& c = s.sampler;
    c.family = j.at("family").get<std::string>();
    c.k0 = j.at("k0").get<std::size_t>();
    c.alpha = j.at("alpha").get<double>();
    c.iters = j.at("iters").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.prior.lo = j.at("prior_lo").get<std::vector<double>>();
    c.prior.hi = j.at("prior_hi").get<std::vector<double>>();
    c.adapt_window = j.at("adapt_window").get<std::size_t>();
    c.target_accept = j.at("target_accept").get<double>();
    c.adapt = j.at("adapt").get<bool>();
    c.initial_step = j.at("initial_step").get<double>();
    c.mode = j.at("model").get<std::string>() == "igp" ? CoefficientMode::independent : CoefficientMode::shared;
    c.sigma_shape = j.at("sigma_shape").get<std::string>() == "observations" ? SigmaShape::observations
                                                                              : SigmaShape::augmented;
    c.thin = j.at("thin").get<std::size_t>();
    c.marginalize_empty = j.at("marginalize_empty").get<bool>();
    c.collapse_theta = j.at("collapse_theta").get<bool>();
    s.lattice_sizes = j.at("lattice").get<std::vector<std::size_t>>();
    s.padding = j.at("padding").get<double>();
    s.trend_degree = j.at("trend_degree").get<std::size_t>();
    s.collision = j.at("collision").get<std::string>() == "average" ? CollisionPolicy::average : CollisionPolicy::error;
    s.chains = j.at("chains").get<std::size_t>();
    s.threshold = j.at("threshold").get<double>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::data, std::string("bad settings record: ") + e.what());
  }
}

std::uint64_t chain_seed(std::uint64_t seed, std::size_t chain) {
  return chain == 0 ? seed : Rng::derive_seed(seed, chain);
}

bool FitModel::finished() const {
  for (const auto& c : chains) {
    if (c.log_likelihood.size() < settings.sampler.iters) return false;
  }
  return !chains.empty();
}

FitModel prepare_fit(const Dataset& data, const FitSettings& settings) {
  settings.validate(data.dims);
  FitModel model;
  model.settings = settings;
  model.data.dims = data.dims;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data.y[i])) continue;
    model.data.coords.push_back(data.coords[i]);
    model.data.y.push_back(data.y[i]);
    if (!data.true_component.empty()) model.data.true_component.push_back(data.true_component[i]);
  }
  if (model.data.size() == 0) fail(ErrorKind::data, "no observations with finite outcomes");
  model.mapping = fit_mapping(model.data, settings.lattice_sizes, settings.padding);
  model.lattice = Lattice(model.mapping.sizes);
  auto tf = fit_trend(model.data.coords, model.data.y, settings.trend_degree);
  model.trend = tf.trend;
  Dataset residual = model.data;
  residual.y = std::move(tf.residuals);
  model.observed = map_to_lattice(residual, model.mapping, model.lattice, settings.collision);
  // Validate the sampler inputs before any sweep.
  Sampler probe(model.lattice, model.observed, chain_config(settings, 0));
  (void)probe;
  return model;
}

void run_chains(FitModel& model, std::size_t sweeps) {
  const std::size_t n = model.settings.chains;
  model.runner_states.resize(n);
  model.chains.resize(n);
  std::vector<std::exception_ptr> errors(n);
  auto work = [&](std::size_t c) {
    try {
      ChainRunner runner(model.lattice, model.observed, chain_config(model.settings, c));
      if (!model.runner_states[c].empty()) {
        std::istringstream in(model.runner_states[c]);
        runner.load(in);
      }
      runner.run(sweeps);
      std::ostringstream out;
      runner.save(out);
      model.runner_states[c] = out.str();
      model.chains[c] = runner.chain();
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };
  std::size_t threads = model.settings.threads == 0 ? thread_cap() : std::min(model.settings.threads, thread_cap());
  threads = std::clamp<std::size_t>(threads, 1, n);
  for (std::size_t start = 0; start < n; start += threads) {
    std::vector<std::thread> pool;
    const std::size_t stop = std::min(n, start + threads);
    if (stop - start == 1) {
      work(start);
    } else {
      for (std::size_t c = start; c < stop; ++c) pool.emplace_back(work, c);
      for (auto& t : pool) t.join();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

FitModel fit(const Dataset& data, const FitSettings& settings) {
  FitModel model = prepare_fit(data, settings);
  run_chains(model);
  return model;
}

ComponentOrder component_order(const PosteriorChain& chain, std::size_t k0) {
  std::vector<double> occ(k0, 0.0);
  for (const auto& d : chain.draws) {
    const auto counts = occupancy(d.z, k0);
    const double n = static_cast<double>(d.z.size());
    for (std::size_t k = 0; k < k0; ++k) occ[k] += static_cast<double>(counts[k]) / n;
  }
  if (!chain.draws.empty()) {
    for (auto& o : occ) o /= static_cast<double>(chain.draws.size());
  }
  ComponentOrder order;
  order.labels.resize(k0);
  std::iota(order.labels.begin(), order.labels.end(), 0);
  std::stable_sort(order.labels.begin(), order.labels.end(),
                   [&](std::size_t a, std::size_t b) { return occ[a] > occ[b]; });
  for (auto k : order.labels) order.occupancy.push_back(occ[k]);
  return order;
}

AssignmentSummary summarize_assignments(const FitModel& model) {
  const std::size_t k0 = model.settings.sampler.k0;
  const std::size_t n = model.observed.size();
  AssignmentSummary out;
  out.occupancy.assign(k0, 0.0);
  out.prob.assign(n, std::vector<double>(k0, 0.0));
  double total = 0.0;
  for (const auto& chain : model.chains) {
    const auto order = component_order(chain, k0);
    std::vector<std::size_t> rank(k0);
    for (std::size_t r = 0; r < k0; ++r) rank[order.labels[r]] = r;
    for (const auto& d : chain.draws) {
      for (std::size_t i = 0; i < n; ++i) out.prob[i][rank[d.z[i]]] += 1.0;
    }
    for (std::size_t r = 0; r < k0; ++r) out.occupancy[r] += order.occupancy[r] * static_cast<double>(chain.draws.size());
    total += static_cast<double>(chain.draws.size());
  }
  if (total > 0.0) {
    for (auto& o : out.occupancy) o /= total;
    for (auto& row : out.prob) {
      for (auto& v : row) v /= total;
    }
  }
  out.map.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.map[i] = static_cast<std::size_t>(std::max_element(out.prob[i].begin(), out.prob[i].end()) - out.prob[i].begin());
  }
  for (double o : out.occupancy) out.effective += o > model.settings.threshold ? 1 : 0;
  return out;
}

PosteriorChain pooled_chain(const FitModel& model) {
  PosteriorChain out;
  if (model.chains.empty()) return out;
  out.iters = model.chains[0].iters;
  out.burn_in = model.chains[0].burn_in;
  for (const auto& c : model.chains) out.draws.insert(out.draws.end(), c.draws.begin(), c.draws.end());
  return out;
}

nlohmann::json fit_summary(const FitModel& model) {
  const auto& cfg = model.settings.sampler;
  const std::size_t k0 = cfg.k0;
  const auto names = param_names(cfg.family, model.lattice.dims());
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["settings"] = to_json(model.settings);
  j["observations"] = model.observed.size();
  j["lattice"] = model.lattice.sizes();
  j["trend"] = {{"degree", model.trend.degree}, {"beta", model.trend.beta}};
  std::size_t retained = 0;
  for (const auto& c : model.chains) retained += c.draws.size();
  j["retained_draws"] = retained;
  j["warnings"] = nlohmann::json::array();
  if (retained < 100) j["warnings"].push_back("insufficient samples: " + std::to_string(retained) + " retained draws");

  const auto assign = summarize_assignments(model);
  j["effective_components"] = assign.effective;
  j["occupancy"] = assign.occupancy;

  // Parameter table per rank, over draws in which that component is occupied.
  std::vector<std::vector<std::vector<double>>> values(k0, std::vector<std::vector<double>>(names.size()));
  std::vector<std::vector<double>> sigma2(1);
  std::vector<double> accept(k0, 0.0);
  for (const auto& chain : model.chains) {
    const auto order = component_order(chain, k0);
    for (std::size_t r = 0; r < k0; ++r) accept[r] += chain.acceptance_rate.empty() ? 0.0 : chain.acceptance_rate[order.labels[r]];
    for (const auto& d : chain.draws) {
      const auto counts = occupancy(d.z, k0);
      for (std::size_t r = 0; r < k0; ++r) {
        const std::size_t k = order.labels[r];
        if (counts[k] == 0) continue;
        for (std::size_t p = 0; p < names.size(); ++p) values[r][p].push_back(d.thetas[k].values[p]);
      }
      sigma2[0].push_back(d.sigma2);
    }
  }
  auto comps = nlohmann::json::array();
  for (std::size_t r = 0; r < k0; ++r) {
    if (!(assign.occupancy[r] > model.settings.threshold)) continue;
    nlohmann::json c;
    c["rank"] = r + 1;
    c["occupancy"] = assign.occupancy[r];
    c["acceptance_rate"] = model.chains.empty() ? 0.0 : accept[r] / static_cast<double>(model.chains.size());
    nlohmann::json params;
    for (std::size_t p = 0; p < names.size(); ++p) {
      params[names[p]] = {{"mean", mean_of(values[r][p])}, {"sd", sd_of(values[r][p])}};
    }
    c["parameters"] = params;
    comps.push_back(c);
  }
  j["components"] = comps;
  j["sigma2"] = {{"mean", mean_of(sigma2[0])}, {"sd", sd_of(sigma2[0])}};

  auto chains = nlohmann::json::array();
  for (std::size_t c = 0; c < model.chains.size(); ++c) {
    const auto& ch = model.chains[c];
    nlohmann::json cj;
    cj["seed"] = chain_seed(cfg.seed, c);
    cj["sweeps"] = ch.log_likelihood.size();
    cj["retained"] = ch.draws.size();
    cj["acceptance_rate"] = ch.acceptance_rate;
    cj["final_effective"] = ch.effective.empty() ? 0 : ch.effective.back();
    cj["final_log_likelihood"] = ch.log_likelihood.empty() ? 0.0 : ch.log_likelihood.back();
    chains.push_back(cj);
  }
  j["chains"] = chains;
  return j;
}

PredictionResult predict(const FitModel& model, const std::vector<std::vector<double>>& coords,
                         const KrigingOptions& options) {
  std::vector<std::size_t> targets;
  targets.reserve(coords.size());
  for (const auto& x : coords) targets.push_back(model.mapping.site(model.lattice, x));
  auto r = posterior_predict(model.lattice, targets, model.observed, pooled_chain(model), model.settings.sampler.mode,
                             options);
  for (std::size_t t = 0; t < coords.size(); ++t) {
    const double mu = model.trend(coords[t]);
    r.mean[t] += mu;
    for (auto& dm : r.draw_mean) dm[t] += mu;
  }
  return r;
}

std::string save_checkpoint(const FitModel& model) {
  std::ostringstream out;
  out.write(kMagic, sizeof(kMagic));
  bin::put<std::uint32_t>(out, kFormatVersion);
  bin::put_string(out, to_json(model.settings).dump());
  bin::put_string(out, format_dataset_csv(model.data));
  bin::put_vec(out, model.mapping.sizes);
  bin::put_vec(out, model.mapping.offset);
  bin::put_vec(out, model.mapping.scale);
  bin::put(out, model.mapping.padding);
  bin::put_size(out, model.trend.degree);
  bin::put_vec(out, model.trend.beta);
  bin::put_size(out, model.runner_states.size());
  for (const auto& s : model.runner_states) bin::put_string(out, s);
  return out.str();
}

FitModel load_checkpoint(const std::string& bytes) {
  std::istringstream in(bytes);
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(magic, magic + sizeof(magic), kMagic)) fail(ErrorKind::data, "not a checkpoint file");
  const auto version = bin::get<std::uint32_t>(in);
  if (version != kFormatVersion) fail(ErrorKind::data, "unsupported checkpoint version " + std::to_string(version));
  nlohmann::json sj;
  try {
    sj = nlohmann::json::parse(bin::get_string(in));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::data, std::string("corrupt checkpoint settings: ") + e.what());
  }
  const FitSettings settings = settings_from_json(sj);
  const Dataset data = parse_dataset_csv(bin::get_string(in), false, "checkpoint");
  FitModel model = prepare_fit(data, settings);
  LatticeMapping mapping;
  mapping.sizes = bin::get_vec<std::size_t>(in);
  mapping.offset = bin::get_vec<double>(in);
  mapping.scale = bin::get_vec<double>(in);
  mapping.padding = bin::get<double>(in);
  Trend trend;
  trend.degree = bin::get_size(in);
  trend.dims = data.dims;
  trend.beta = bin::get_vec<double>(in);
  if (mapping.sizes != model.mapping.sizes || mapping.offset != model.mapping.offset ||
      mapping.scale != model.mapping.scale || trend.beta != model.trend.beta)
    fail(ErrorKind::data, "checkpoint mapping or trend does not match its data");
  const std::size_t nc = bin::get_size(in);
  if (nc != settings.chains) fail(ErrorKind::data, "checkpoint chain count does not match its settings");
  model.runner_states.resize(nc);
  model.chains.resize(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    model.runner_states[c] = bin::get_string(in);
    ChainRunner runner(model.lattice, model.observed, chain_config(settings, c));
    std::istringstream rs(model.runner_states[c]);
    runner.load(rs);
    model.chains[c] = runner.chain();
  }
  return model;
}

nlohmann::json checkpoint_sidecar(const FitModel& model, const std::string& checkpoint_bytes) {
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["settings"] = to_json(model.settings);
  j["seed"] = model.settings.sampler.seed;
  j["content_sha1"] = sha1_hex(checkpoint_bytes);
  j["data_sha1"] = sha1_hex(format_dataset_csv(model.data));
  nlohmann::json sweeps = nlohmann::json::array();
  for (const auto& c : model.chains) sweeps.push_back(c.log_likelihood.size());
  j["sweeps"] = sweeps;
  j["finished"] = model.finished();
  return j;
}

std::vector<RegionComparison> compare_models(const Dataset& data, const std::vector<Window>& windows,
                                             const FitSettings& settings, const KrigingOptions& options) {
  std::vector<RegionComparison> out;
  for (const auto& w : windows) {
    if (!(w.lo < w.hi)) fail(ErrorKind::config, "held-out window needs lo < hi");
    Dataset train;
    train.dims = data.dims;
    RegionComparison rc;
    rc.window = w;
    std::vector<std::vector<double>> test;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double x = data.coords[i][0];
      if (x > w.lo && x < w.hi) {
        test.push_back(data.coords[i]);
        rc.x.push_back(x);
        rc.truth.push_back(data.y[i]);
      } else {
        train.coords.push_back(data.coords[i]);
        train.y.push_back(data.y[i]);
      }
    }
    if (test.empty()) fail(ErrorKind::data, "held-out window contains no rows");
    FitSettings ms = settings;
    ms.sampler.mode = CoefficientMode::shared;
    FitSettings is = settings;
    is.sampler.mode = CoefficientMode::independent;
    // Both fits share one lattice so held-out sites map identically.
    const auto mapping = fit_mapping(data, settings.lattice_sizes, settings.padding);
    ms.lattice_sizes = is.lattice_sizes = mapping.sizes;
    FitModel m = fit(train, ms);
    FitModel g = fit(train, is);
    rc.msgp_prediction = predict(m, test, options);
    rc.igp_prediction = predict(g, test, options);
    rc.msgp = metrics(rc.msgp_prediction, rc.truth);
    rc.igp = metrics(rc.igp_prediction, rc.truth);
    out.push_back(std::move(rc));
  }
  return out;
}

nlohmann::json comparison_report(const std::vector<RegionComparison>& regions) {
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  auto rows = nlohmann::json::array();
  for (const auto& r : regions) {
    std::ostringstream name;
    name << "(" << r.window.lo << "," << r.window.hi << ")";
    rows.push_back({{"region", name.str()},
                    {"held_out", r.truth.size()},
                    {"msgp", {{"rmse", r.msgp.rmse}, {"avg_uncertainty", r.msgp.avg_uncertainty}}},
                    {"igp", {{"rmse", r.igp.rmse}, {"avg_uncertainty", r.igp.avg_uncertainty}}}});
  }
  j["regions"] = rows;
  return j;
}

std::string variance_curves_csv(const std::vector<RegionComparison>& regions) {
  std::string out = "region,x1,truth,msgp_mean,msgp_variance,igp_mean,igp_variance\n";
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const auto& rc = regions[r];
    for (std::size_t t = 0; t < rc.x.size(); ++t) {
      out += std::to_string(r + 1) + "," + format_double(rc.x[t]) + "," + format_double(rc.truth[t]) + "," +
             format_double(rc.msgp_prediction.mean[t]) + "," + format_double(rc.msgp_prediction.variance[t]) + "," +
             format_double(rc.igp_prediction.mean[t]) + "," + format_double(rc.igp_prediction.variance[t]) + "\n";
    }
  }
  return out;
}

}  // namespace msgp
