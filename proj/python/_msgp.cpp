// Python bindings. Arrays cross as NumPy float64; settings and summaries
// cross as JSON text so the Python side handles them as dicts.

#include <pybind11/numpy.h>
#include <algorithm>
#include <cstdint>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "msgp/error.hpp"
#include "msgp/io.hpp"
#include "msgp/simdata.hpp"
#include "msgp/workflow.hpp"

namespace py = pybind11;
using namespace msgp;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

py::object g_config_error, g_data_error, g_numerical_error;

void python_warning(const std::string& message) {
  py::gil_scoped_acquire gil;
  PyErr_WarnEx(PyExc_RuntimeWarning, message.c_str(), 1);
}

std::vector<std::vector<double>> rows_of(const Array& x) {
  if (x.ndim() == 1) {
    std::vector<std::vector<double>> out;
    for (py::ssize_t i = 0; i < x.shape(0); ++i) out.push_back({x.at(i)});
    return out;
  }
  if (x.ndim() != 2) fail(ErrorKind::data, "coordinates must be a 1-d or 2-d array");
  std::vector<std::vector<double>> out(static_cast<std::size_t>(x.shape(0)));
  for (py::ssize_t i = 0; i < x.shape(0); ++i) {
    for (py::ssize_t l = 0; l < x.shape(1); ++l) out[static_cast<std::size_t>(i)].push_back(x.at(i, l));
  }
  return out;
}

Dataset make_dataset(const Array& x, const Array& y) {
  Dataset d;
  d.coords = rows_of(x);
  if (y.ndim() != 1 || static_cast<std::size_t>(y.shape(0)) != d.coords.size())
    fail(ErrorKind::data, "y must be a 1-d array with one entry per coordinate row");
  d.dims = d.coords.empty() ? 1 : d.coords.front().size();
  d.y.assign(y.data(), y.data() + y.shape(0));
  return d;
}

py::dict dataset_dict(const Dataset& d) {
  Array x({static_cast<py::ssize_t>(d.size()), static_cast<py::ssize_t>(d.dims)});
  auto xm = x.mutable_unchecked<2>();
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t l = 0; l < d.dims; ++l) xm(static_cast<py::ssize_t>(i), static_cast<py::ssize_t>(l)) = d.coords[i][l];
  }
  py::dict out;
  out["x"] = x;
  out["y"] = Array(static_cast<py::ssize_t>(d.y.size()), d.y.data());
  py::array_t<std::int64_t> labels(static_cast<py::ssize_t>(d.true_component.size()));
  std::copy(d.true_component.begin(), d.true_component.end(), labels.mutable_data());
  out["true_component"] = labels;
  return out;
}

py::tuple moments(const PredictionResult& r) {
  return py::make_tuple(Array(static_cast<py::ssize_t>(r.mean.size()), r.mean.data()),
                        Array(static_cast<py::ssize_t>(r.variance.size()), r.variance.data()));
}

}  // namespace

PYBIND11_MODULE(_msgp, m) {
  m.doc() = "Mixed-stationary Gaussian process core";

  auto base = py::register_exception<Error>(m, "MsgpError", PyExc_ValueError);
  g_config_error = py::reinterpret_steal<py::object>(
      PyErr_NewException("msgp._msgp.ConfigError", base.ptr(), nullptr));
  g_data_error = py::reinterpret_steal<py::object>(PyErr_NewException("msgp._msgp.DataError", base.ptr(), nullptr));
  g_numerical_error =
      py::reinterpret_steal<py::object>(PyErr_NewException("msgp._msgp.NumericalError", base.ptr(), nullptr));
  m.attr("ConfigError") = g_config_error;
  m.attr("DataError") = g_data_error;
  m.attr("NumericalError") = g_numerical_error;
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const auto& type = e.kind() == ErrorKind::config ? g_config_error
                         : e.kind() == ErrorKind::data ? g_data_error
                                                       : g_numerical_error;
      PyErr_SetString(type.ptr(), e.what());
    }
  });
  set_warning_sink(&python_warning);

  m.def("se_covariance", [](std::vector<double> delta, double phi, std::vector<double> rho) {
    return se_covariance(delta, SEKernelParams{phi, std::move(rho)});
  }, py::arg("delta"), py::arg("phi"), py::arg("rho"));
  m.def("se_spectral_density", [](std::vector<double> w, double phi, std::vector<double> rho) {
    return se_spectral_density(w, SEKernelParams{phi, std::move(rho)});
  }, py::arg("w"), py::arg("phi"), py::arg("rho"));
  m.def("sha1_hex", [](const py::bytes& b) { return sha1_hex(std::string(b)); });

  m.def("simulate_two_region", [](std::size_t n, std::size_t split, double phi, double rho_left, double rho_right,
                                  double sigma2, bool zero_cross, std::uint64_t seed) {
    TwoRegionOptions o;
    o.n = n;
    o.split = split;
    o.left = {phi, {rho_left}};
    o.right = {phi, {rho_right}};
    o.sigma2 = sigma2;
    o.zero_cross = zero_cross;
    Rng rng(seed);
    return dataset_dict(simulate_two_region_1d(o, rng));
  }, py::arg("n") = 100, py::arg("split") = 50, py::arg("phi") = 4.0, py::arg("rho_left") = 3.0,
     py::arg("rho_right") = 12.0, py::arg("sigma2") = 0.25, py::arg("zero_cross") = false, py::arg("seed") = 1);

  m.def("simulate_pintore_levels", [](std::size_t side, std::array<double, 3> levels, double phi, double sigma2,
                                      std::uint64_t seed) {
    Rng rng(seed);
    const double s = static_cast<double>(side);
    return dataset_dict(simulate_pintore_dataset(side, side, pintore_levels(levels, s, phi), sigma2, rng,
                                                 [s](double a, double b) { return pintore_level(a, b, s); }));
  }, py::arg("side") = 40, py::arg("levels") = std::array<double, 3>{1.5, 3.0, 6.0}, py::arg("phi") = 1.0,
     py::arg("sigma2") = 0.25, py::arg("seed") = 1);

  m.def("default_settings", [] { return to_json(FitSettings{}).dump(); });

  py::class_<FitModel>(m, "Model")
      .def("summary", [](const FitModel& f) { return fit_summary(f).dump(); })
      .def("predict", [](const FitModel& f, const Array& x, std::size_t thin, double min_weight) {
        KrigingOptions o;
        o.thin = thin;
        o.min_weight = min_weight;
        const auto coords = rows_of(x);
        PredictionResult r;
        {
          py::gil_scoped_release release;
          r = predict(f, coords, o);
        }
        return moments(r);
      }, py::arg("x"), py::arg("thin") = 1, py::arg("min_weight") = 0.0)
      .def("assignments", [](const FitModel& f) {
        const auto a = summarize_assignments(f);
        py::dict out;
        out["map"] = a.map;
        out["prob"] = a.prob;
        out["occupancy"] = a.occupancy;
        out["effective"] = a.effective;
        return out;
      })
      .def("checkpoint", [](const FitModel& f) { return py::bytes(save_checkpoint(f)); })
      .def_property_readonly("finished", &FitModel::finished)
      .def_property_readonly("lattice", [](const FitModel& f) { return f.lattice.sizes(); })
      .def("log_likelihood", [](const FitModel& f, std::size_t chain) {
        if (chain >= f.chains.size()) throw py::index_error("no such chain");
        return f.chains[chain].log_likelihood;
      }, py::arg("chain") = 0);

  m.def("fit", [](const Array& x, const Array& y, const std::string& settings) {
    const Dataset data = make_dataset(x, y);
    const FitSettings s = settings_from_json(nlohmann::json::parse(settings));
    py::gil_scoped_release release;
    return fit(data, s);
  }, py::arg("x"), py::arg("y"), py::arg("settings"));

  m.def("load_checkpoint", [](const py::bytes& b) { return load_checkpoint(std::string(b)); });

  m.def("compare", [](const Array& x, const Array& y, const std::vector<std::pair<double, double>>& windows,
                      const std::string& settings, std::size_t thin) {
    const Dataset data = make_dataset(x, y);
    const FitSettings s = settings_from_json(nlohmann::json::parse(settings));
    std::vector<Window> w;
    for (const auto& [lo, hi] : windows) w.push_back({lo, hi});
    KrigingOptions o;
    o.thin = thin;
    std::vector<RegionComparison> regions;
    {
      py::gil_scoped_release release;
      regions = compare_models(data, w, s, o);
    }
    return comparison_report(regions).dump();
  }, py::arg("x"), py::arg("y"), py::arg("windows"), py::arg("settings"), py::arg("thin") = 1);
}
