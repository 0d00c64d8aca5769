// msgp command-line tool: simulate, fit, predict, compare.

#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "msgp/error.hpp"
#include "msgp/io.hpp"
#include "msgp/simdata.hpp"
#include "msgp/workflow.hpp"

using namespace msgp;
using nlohmann::json;

namespace {

std::vector<double> parse_list(const std::string& text, char sep, const std::string& what) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string cell;
  while (std::getline(in, cell, sep)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      fail(ErrorKind::config, "bad " + what + " '" + text + "'");
    }
  }
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& text, const std::string& what) {
  std::vector<std::size_t> out;
  for (double v : parse_list(text, 'x', what)) {
    if (!(v >= 1.0) || v != std::floor(v)) fail(ErrorKind::config, "bad " + what + " '" + text + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::array<double, 2> parse_range(const std::string& text, const std::string& what) {
  const auto v = parse_list(text, ',', what);
  if (v.size() != 2 || !(v[0] > 0.0 && v[1] > v[0])) fail(ErrorKind::config, what + " must be 'lo,hi' with 0 < lo < hi");
  return {v[0], v[1]};
}

void write_json(const std::string& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

// Options shared by fit and compare.
struct FitOptions {
  std::string family = "se";
  std::size_t k0 = 20;
  double alpha = 0.5;
  std::size_t iters = 2000;
  std::uint64_t seed = 1;
  std::string lattice;
  double padding = 2.0;
  std::size_t trend_degree = 2;
  std::size_t thin = 1;
  std::size_t chains = 1;
  std::string collision = "error";
  std::string model = "msgp";
  std::string sigma_shape = "augmented";
  std::size_t adapt_window = 50;
  double target_accept = 0.234;
  std::string phi_range = "0.1,100";
  std::string rho_range = "0.1,100";
  std::string c_range = "1,1e5";
  bool marginalize_empty = true;
  bool collapse_theta = false;
  double threshold = 0.02;

  void add(CLI::App* app) {
    app->add_option("--family", family, "kernel family (se, st_nonseparable)")->capture_default_str();
    app->add_option("--k0", k0, "truncation level")->capture_default_str();
    app->add_option("--alpha", alpha, "Dirichlet concentration")->capture_default_str();
    app->add_option("--iters", iters, "sweeps; the first half is burn-in")->capture_default_str();
    app->add_option("--seed", seed)->capture_default_str();
    app->add_option("--lattice", lattice, "sites per dimension, e.g. 200 or 80x80 (default: from the data)");
    app->add_option("--padding", padding, "lattice extent over data extent")->capture_default_str();
    app->add_option("--trend-degree", trend_degree, "polynomial trend degree")->capture_default_str();
    app->add_option("--thin", thin, "keep every thin-th retained sweep")->capture_default_str();
    app->add_option("--chains", chains, "independent chains")->capture_default_str();
    app->add_option("--collision", collision, "error or average")->capture_default_str();
    app->add_option("--model", model, "msgp or igp")->capture_default_str();
    app->add_option("--sigma-shape", sigma_shape, "augmented or observations")->capture_default_str();
    app->add_option("--adapt-window", adapt_window)->capture_default_str();
    app->add_option("--target-accept", target_accept)->capture_default_str();
    app->add_option("--phi-range", phi_range, "log-uniform prior bounds for phi")->capture_default_str();
    app->add_option("--rho-range", rho_range, "log-uniform prior bounds for rho")->capture_default_str();
    app->add_option("--c-range", c_range, "log-uniform prior bounds for c1, c2")->capture_default_str();
    app->add_option("--marginalize-empty", marginalize_empty, "integrate out empty components")->capture_default_str();
    app->add_option("--collapse-theta", collapse_theta, "theta moves use observed sites only")->capture_default_str();
    app->add_option("--threshold", threshold, "dominating-component occupancy")->capture_default_str();
  }

  FitSettings settings(std::size_t dims) const {
    FitSettings s;
    auto& c = s.sampler;
    c.family = family;
    c.k0 = k0;
    c.alpha = alpha;
    c.iters = iters;
    c.seed = seed;
    c.thin = thin;
    c.adapt_window = adapt_window;
    c.target_accept = target_accept;
    c.marginalize_empty = marginalize_empty;
    c.collapse_theta = collapse_theta;
    if (model != "msgp" && model != "igp") fail(ErrorKind::config, "--model must be msgp or igp");
    c.mode = model == "igp" ? CoefficientMode::independent : CoefficientMode::shared;
    if (sigma_shape != "augmented" && sigma_shape != "observations")
      fail(ErrorKind::config, "--sigma-shape must be augmented or observations");
    c.sigma_shape = sigma_shape == "observations" ? SigmaShape::observations : SigmaShape::augmented;
    if (collision != "error" && collision != "average") fail(ErrorKind::config, "--collision must be error or average");
    s.collision = collision == "average" ? CollisionPolicy::average : CollisionPolicy::error;
    kernel_definition(family);
    const auto phi = parse_range(phi_range, "--phi-range");
    const auto rho = parse_range(rho_range, "--rho-range");
    const auto cc = parse_range(c_range, "--c-range");
    for (const auto& name : param_names(family, dims)) {
      const auto& r = name == "phi" ? phi : (name.front() == 'c' ? cc : rho);
      c.prior.lo.push_back(r[0]);
      c.prior.hi.push_back(r[1]);
    }
    if (!lattice.empty()) s.lattice_sizes = parse_sizes(lattice, "--lattice");
    s.padding = padding;
    s.trend_degree = trend_degree;
    s.chains = chains;
    s.threshold = threshold;
    s.validate(dims);
    return s;
  }
};

std::string assignment_csv(const FitModel& model) {
  const auto a = summarize_assignments(model);
  std::vector<std::size_t> ranks;
  for (std::size_t r = 0; r < a.occupancy.size(); ++r) {
    if (a.occupancy[r] > model.settings.threshold) ranks.push_back(r);
  }
  std::string out;
  for (std::size_t l = 0; l < model.data.dims; ++l) out += "x" + std::to_string(l + 1) + ",";
  out += "map_component";
  for (auto r : ranks) out += ",pr_" + std::to_string(r + 1);
  out += "\n";
  for (std::size_t i = 0; i < a.map.size(); ++i) {
    for (double x : model.data.coords[i]) out += format_double(x) + ",";
    out += std::to_string(a.map[i] + 1);
    for (auto r : ranks) out += "," + format_double(a.prob[i][r]);
    out += "\n";
  }
  return out;
}

void write_fit_outputs(const FitModel& model, const std::string& prefix) {
  const std::string ckpt = save_checkpoint(model);
  // Build everything before the first write so a failure leaves no outputs.
  const json sidecar = checkpoint_sidecar(model, ckpt);
  json summary = fit_summary(model);
  if (!model.finished()) summary["warnings"].push_back("chain stopped early; resume with --resume");
  const std::string assign = assignment_csv(model);
  write_file_atomic(prefix + ".ckpt", ckpt);
  write_json(prefix + ".ckpt.json", sidecar);
  write_json(prefix + ".summary.json", summary);
  write_file_atomic(prefix + ".assign.csv", assign);
}

// --- simulate --------------------------------------------------------------

struct SimulateOptions {
  std::string scenario;
  std::uint64_t seed = 1;
  std::string out;
  std::string grid;
  std::string dims = "16x16x8";
  double sigma2 = 0.25;
  double phi = NAN;
  std::size_t n = 100;
  std::size_t split = 50;
  double rho_left = 3.0;
  double rho_right = 12.0;
  bool zero_cross = false;
  std::string levels = "1.5,3,6";
};

int cmd_simulate(const SimulateOptions& o) {
  Rng rng(o.seed);
  Dataset data;
  json params;
  if (o.scenario == "two-region") {
    TwoRegionOptions t;
    t.n = o.n;
    t.split = o.split;
    const double phi = std::isnan(o.phi) ? 4.0 : o.phi;
    t.left = SEKernelParams{phi, {o.rho_left}};
    t.right = SEKernelParams{phi, {o.rho_right}};
    t.sigma2 = o.sigma2;
    t.zero_cross = o.zero_cross;
    data = simulate_two_region_1d(t, rng);
    params = {{"n", t.n}, {"split", t.split}, {"phi", phi}, {"rho_left", o.rho_left}, {"rho_right", o.rho_right},
              {"sigma2", t.sigma2}, {"zero_cross", t.zero_cross}};
  } else if (o.scenario == "pintore") {
    const auto g = parse_sizes(o.grid.empty() ? "50x50" : o.grid, "--grid");
    if (g.size() != 2) fail(ErrorKind::config, "--grid must be NxM");
    const double phi = std::isnan(o.phi) ? 1.0 : o.phi;
    data = simulate_pintore_dataset(g[0], g[1], PintoreField::paper(phi), o.sigma2, rng);
    params = {{"grid", g}, {"phi", phi}, {"sigma2", o.sigma2}, {"domain", {0, 100}}};
  } else if (o.scenario == "pintore-levels") {
    const auto g = parse_sizes(o.grid.empty() ? "40x40" : o.grid, "--grid");
    if (g.size() != 2 || g[0] != g[1]) fail(ErrorKind::config, "--grid must be NxN for pintore-levels");
    const auto lv = parse_list(o.levels, ',', "--levels");
    if (lv.size() != 3) fail(ErrorKind::config, "--levels needs three length-scales");
    const double phi = std::isnan(o.phi) ? 1.0 : o.phi;
    const double side = static_cast<double>(g[0]);
    data = simulate_pintore_dataset(g[0], g[1], pintore_levels({lv[0], lv[1], lv[2]}, side, phi), o.sigma2, rng,
                                    [side](double a, double b) { return pintore_level(a, b, side); });
    params = {{"grid", g}, {"phi", phi}, {"sigma2", o.sigma2}, {"levels", lv}};
  } else if (o.scenario == "st-cube") {
    const auto d = parse_sizes(o.dims, "--dims");
    if (d.size() != 3) fail(ErrorKind::config, "--dims must be NxMxT");
    // Two components split at the middle of x1, with the first two NARCCAP
    // estimates of phi and the length-scales. The interaction scales are set
    // to the prior's upper bound: the estimated c values give kernels whose
    // spectral density is negative on the lattice.
    const std::array<NonSeparableSTParams, 2> comps{NonSeparableSTParams{6.71, 12.17, 10.89, 16.43, 1e5, 1e5},
                                                    NonSeparableSTParams{3.30, 4.11, 4.87, 45.61, 1e5, 1e5}};
    std::vector<std::size_t> region(d[0] * d[1] * d[2]);
    for (std::size_t i = 0; i < d[0]; ++i) {
      for (std::size_t s = 0; s < d[1] * d[2]; ++s) region[i * d[1] * d[2] + s] = 2 * i < d[0] ? 0 : 1;
    }
    data = simulate_st_cube(d[0], d[1], d[2], comps, region, o.sigma2, rng);
    params = {{"dims", d}, {"sigma2", o.sigma2}, {"components", 2}};
  } else {
    fail(ErrorKind::config, "unknown scenario '" + o.scenario + "' (two-region, pintore, pintore-levels, st-cube)");
  }
  const std::string csv = format_dataset_csv(data);
  json prov = {{"format_version", kFormatVersion}, {"generator", o.scenario}, {"params", params},
               {"seed", o.seed},                   {"rows", data.size()},     {"sha1", sha1_hex(csv)}};
  write_file_atomic(o.out, csv);
  write_json(o.out + ".json", prov);
  std::cout << "wrote " << data.size() << " rows to " << o.out << "\n";
  return 0;
}

// --- fit -------------------------------------------------------------------

int cmd_fit(const FitOptions& f, const std::string& data_path, const std::string& resume, std::size_t stop_after,
            const std::string& prefix) {
  FitModel model;
  if (!resume.empty()) {
    model = load_checkpoint(read_file(resume));
  } else {
    const Dataset data = read_dataset_csv(data_path);
    model = prepare_fit(data, f.settings(data.dims));
  }
  run_chains(model, stop_after);
  write_fit_outputs(model, prefix);
  const auto a = summarize_assignments(model);
  std::cout << "effective components: " << a.effective << "\n";
  return 0;
}

// --- predict ---------------------------------------------------------------

int cmd_predict(const std::string& checkpoint, const std::string& targets_path, const std::string& prefix,
                std::size_t thin, double min_weight) {
  const FitModel model = load_checkpoint(read_file(checkpoint));
  const Dataset targets = read_dataset_csv(targets_path, true);
  if (targets.dims != model.data.dims) fail(ErrorKind::data, "target dimension does not match the fitted data");
  KrigingOptions opt;
  opt.thin = thin;
  opt.min_weight = min_weight;
  const auto r = predict(model, targets.coords, opt);
  std::string csv;
  for (std::size_t l = 0; l < targets.dims; ++l) csv += "x" + std::to_string(l + 1) + ",";
  csv += "mean,variance\n";
  bool all_y = true;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    for (double x : targets.coords[t]) csv += format_double(x) + ",";
    csv += format_double(r.mean[t]) + "," + format_double(r.variance[t]) + "\n";
    all_y = all_y && std::isfinite(targets.y[t]);
  }
  json m = {{"format_version", kFormatVersion}, {"targets", targets.size()}};
  double var = 0.0;
  for (double v : r.variance) var += v;
  m["avg_uncertainty"] = std::sqrt(var / static_cast<double>(targets.size()));
  m["rmse"] = nullptr;
  if (all_y) m["rmse"] = metrics(r, targets.y).rmse;
  write_file_atomic(prefix + ".csv", csv);
  write_json(prefix + ".metrics.json", m);
  return 0;
}

// --- compare ---------------------------------------------------------------

int cmd_compare(const FitOptions& f, const std::string& data_path, const std::string& windows_text,
                const std::string& prefix, std::size_t thin) {
  const Dataset data = read_dataset_csv(data_path);
  const FitSettings settings = f.settings(data.dims);
  std::vector<Window> windows;
  std::stringstream in(windows_text);
  std::string cell;
  while (std::getline(in, cell, ';')) {
    const auto v = parse_list(cell, ',', "--windows");
    if (v.size() != 2 || !(v[0] < v[1])) fail(ErrorKind::config, "--windows entries must be 'lo,hi'");
    windows.push_back({v[0], v[1]});
  }
  KrigingOptions opt;
  opt.thin = thin;
  const auto regions = compare_models(data, windows, settings, opt);
  const json report = comparison_report(regions);
  const std::string curves = variance_curves_csv(regions);
  write_json(prefix + ".report.json", report);
  write_file_atomic(prefix + ".curves.csv", curves);
  for (const auto& r : regions) {
    std::cout << "(" << r.window.lo << "," << r.window.hi << ")  msgp rmse " << r.msgp.rmse << " unc "
              << r.msgp.avg_uncertainty << "  igp rmse " << r.igp.rmse << " unc " << r.igp.avg_uncertainty << "\n";
  }
  return 0;
}

// Replaces "--config FILE" after the subcommand with the file's settings as
// "--key=value" arguments, placed before the remaining flags so those win.
// Keys may sit at top level or in a section named after the subcommand.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty()) return args;
  const std::string sub = args[0];
  std::vector<std::string> rest, from_file;
  for (std::size_t i = 1; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) fail(ErrorKind::config, "--config needs a file");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
      continue;
    }
    std::vector<CLI::ConfigItem> items;
    try {
      items = CLI::ConfigTOML().from_file(path);
    } catch (const CLI::Error& e) {
      fail(ErrorKind::config, "cannot read config " + path + ": " + e.what());
    }
    for (const auto& item : items) {
      if (item.name == "++" || item.name == "--") continue;  // section markers
      if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == sub)) continue;
      std::string key = item.name;
      std::replace(key.begin(), key.end(), '_', '-');
      std::string value;
      for (std::size_t k = 0; k < item.inputs.size(); ++k) value += (k ? "," : "") + item.inputs[k];
      from_file.push_back("--" + key + "=" + value);
    }
  }
  std::vector<std::string> out{sub};
  out.insert(out.end(), from_file.begin(), from_file.end());
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  set_warning_sink([](const std::string& m) { std::cerr << "warning: " << m << "\n"; });
  CLI::App app{"Mixed-stationary Gaussian process toolkit"};
  app.require_subcommand(1);
  std::string config_file;

  SimulateOptions so;
  auto* sim = app.add_subcommand("simulate", "write a synthetic dataset");
  sim->add_option("--config", config_file, "TOML file of option values; flags override it");
  sim->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  sim->add_option("--scenario", so.scenario, "two-region, pintore, pintore-levels or st-cube")->required();
  sim->add_option("--seed", so.seed)->capture_default_str();
  sim->add_option("--out", so.out, "dataset CSV; provenance goes to <out>.json")->required();
  sim->add_option("--grid", so.grid, "NxM grid (pintore 50x50, pintore-levels 40x40)");
  sim->add_option("--dims", so.dims, "st-cube extent NxMxT")->capture_default_str();
  sim->add_option("--sigma2", so.sigma2, "noise variance")->capture_default_str();
  sim->add_option("--phi", so.phi, "marginal variance (two-region 4, pintore 1)");
  sim->add_option("--n", so.n, "two-region length")->capture_default_str();
  sim->add_option("--split", so.split, "two-region boundary")->capture_default_str();
  sim->add_option("--rho-left", so.rho_left)->capture_default_str();
  sim->add_option("--rho-right", so.rho_right)->capture_default_str();
  sim->add_flag("--zero-cross", so.zero_cross, "independent regions");
  sim->add_option("--levels", so.levels, "pintore-levels length-scales")->capture_default_str();

  FitOptions fo;
  std::string fit_data, fit_out, resume;
  std::size_t stop_after = 0;
  auto* fitc = app.add_subcommand("fit", "run the sampler");
  fitc->add_option("--config", config_file, "TOML file of option values; flags override it");
  fitc->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  fitc->add_option("--data", fit_data, "dataset CSV");
  fitc->add_option("--out", fit_out, "output prefix")->required();
  fitc->add_option("--resume", resume, "continue from a checkpoint");
  fitc->add_option("--stop-after", stop_after, "stop once this many sweeps are done");
  fo.add(fitc);

  std::string ckpt, targets, pred_out;
  std::size_t pred_thin = 1;
  double min_weight = 0.0;
  auto* pred = app.add_subcommand("predict", "krige at target sites");
  pred->add_option("--config", config_file, "TOML file of option values; flags override it");
  pred->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  pred->add_option("--checkpoint", ckpt)->required();
  pred->add_option("--targets", targets, "CSV with x columns; y optional")->required();
  pred->add_option("--out", pred_out, "output prefix")->required();
  pred->add_option("--thin", pred_thin, "use every thin-th draw")->capture_default_str();
  pred->add_option("--min-weight", min_weight, "skip components with smaller weight")->capture_default_str();

  FitOptions co;
  std::string cmp_data, cmp_out, windows = "10,30;60,80;40,60";
  std::size_t cmp_thin = 1;
  auto* cmp = app.add_subcommand("compare", "held-out comparison of MSGP and IGP");
  cmp->add_option("--config", config_file, "TOML file of option values; flags override it");
  cmp->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  cmp->add_option("--data", cmp_data)->required();
  cmp->add_option("--out", cmp_out, "output prefix")->required();
  cmp->add_option("--windows", windows, "held-out x1 windows lo,hi;lo,hi")->capture_default_str();
  cmp->add_option("--predict-thin", cmp_thin, "use every thin-th draw for prediction")->capture_default_str();
  co.add(cmp);

  try {
    auto args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    if (*sim) return cmd_simulate(so);
    if (*fitc) {
      if (fit_data.empty() == resume.empty()) fail(ErrorKind::config, "fit needs exactly one of --data or --resume");
      return cmd_fit(fo, fit_data, resume, stop_after, fit_out);
    }
    if (*pred) return cmd_predict(ckpt, targets, pred_out, pred_thin, min_weight);
    if (*cmp) return cmd_compare(co, cmp_data, windows, cmp_out, cmp_thin);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
