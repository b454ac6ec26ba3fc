#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qrfsj/dataset.hpp"
#include "qrfsj/errors.hpp"
#include "qrfsj/forest.hpp"
#include "qrfsj/kde.hpp"
#include "qrfsj/metrics.hpp"
#include "qrfsj/model_io.hpp"
#include "qrfsj/qrf.hpp"

namespace py = pybind11;
using namespace qrfsj;

namespace {

Dataset make_dataset(const std::vector<std::vector<double>>& features,
                     const std::vector<double>& targets,
                     std::vector<std::string> feature_names) {
  if (features.size() != targets.size()) {
    throw_validation("InvalidArgument", "features and targets must have the same length");
  }
  if (features.empty()) {
    throw_validation("InvalidArgument", "need at least one row");
  }
  const std::size_t m = features[0].size();
  if (m == 0) {
    throw_validation("InvalidArgument", "need at least one feature column");
  }
  if (feature_names.empty()) {
    for (std::size_t j = 0; j < m; ++j) feature_names.push_back("x" + std::to_string(j));
  }
  if (feature_names.size() != m) {
    throw_validation("InvalidArgument", "feature_names length does not match the feature count");
  }
  Dataset ds;
  ds.feature_names = std::move(feature_names);
  ds.target_name = "y";
  ds.features = Matrix(features.size(), m);
  ds.target = targets;
  for (std::size_t r = 0; r < features.size(); ++r) {
    if (features[r].size() != m) {
      throw_validation("InvalidArgument", "feature rows must all have the same length");
    }
    for (std::size_t j = 0; j < m; ++j) ds.features(r, j) = features[r][j];
    ds.years.push_back(static_cast<int>(r));
  }
  return ds;
}

std::vector<PredictionInterval> zip_intervals(const std::vector<double>& lowers,
                                              const std::vector<double>& uppers, double level) {
  if (lowers.size() != uppers.size()) {
    throw_validation("InvalidArgument", "lower and upper lists must have the same length");
  }
  std::vector<PredictionInterval> out;
  out.reserve(lowers.size());
  for (std::size_t i = 0; i < lowers.size(); ++i) {
    out.push_back({lowers[i], uppers[i], level});
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Quantile regression forest with kernel-smoothed density forecasts";

  py::register_exception<Error>(m, "QrfsjError", PyExc_RuntimeError);

  py::class_<ConditionalCDF>(m, "ConditionalCDF")
      .def_readonly("support", &ConditionalCDF::support)
      .def_readonly("cum_weights", &ConditionalCDF::cum_weights)
      .def("evaluate", &ConditionalCDF::evaluate, py::arg("y"));

  py::class_<PredictionInterval>(m, "PredictionInterval")
      .def_readonly("lower", &PredictionInterval::lower)
      .def_readonly("upper", &PredictionInterval::upper)
      .def_readonly("nominal_level", &PredictionInterval::nominal_level);

  py::class_<DensityCurve>(m, "DensityCurve")
      .def_readonly("grid", &DensityCurve::grid)
      .def_readonly("density", &DensityCurve::density)
      .def_readonly("sample_count", &DensityCurve::sample_count)
      .def_property_readonly("bandwidth",
                             [](const DensityCurve& c) { return c.bandwidth.value; })
      .def_property_readonly("bandwidth_method", [](const DensityCurve& c) {
        return std::string(to_string(c.bandwidth.method));
      });

  py::class_<Forest>(m, "Forest")
      .def_property_readonly("num_features", &Forest::num_features)
      .def_property_readonly("num_train", &Forest::num_train)
      .def_property_readonly("num_trees", [](const Forest& f) { return f.trees.size(); })
      .def_property_readonly("feature_names",
                             [](const Forest& f) { return f.feature_names; })
      .def(
          "weights",
          [](const Forest& f, const std::vector<double>& x) {
            return forest_weights(f, x).weights;
          },
          py::arg("x"))
      .def(
          "predict_mean",
          [](const Forest& f, const std::vector<double>& x) { return predict_mean(f, x); },
          py::arg("x"))
      .def(
          "predict_median",
          [](const Forest& f, const std::vector<double>& x) { return predict_median(f, x); },
          py::arg("x"))
      .def(
          "quantile",
          [](const Forest& f, const std::vector<double>& x, double tau) {
            return quantile(conditional_cdf(f, x), tau);
          },
          py::arg("x"), py::arg("tau"))
      .def(
          "quantile_curve",
          [](const Forest& f, const std::vector<double>& x, const std::vector<double>& taus) {
            return quantile_curve(f, x, taus);
          },
          py::arg("x"), py::arg("taus"))
      .def(
          "conditional_cdf",
          [](const Forest& f, const std::vector<double>& x) { return conditional_cdf(f, x); },
          py::arg("x"))
      .def(
          "prediction_interval",
          [](const Forest& f, const std::vector<double>& x, double level) {
            return prediction_interval(f, x, level);
          },
          py::arg("x"), py::arg("level") = 0.90)
      .def(
          "density_forecast",
          [](const Forest& f, const std::vector<double>& x, std::size_t tau_grid_size,
             std::size_t grid_points) {
            return density_forecast(f, x, default_tau_grid(tau_grid_size), grid_points);
          },
          py::arg("x"), py::arg("tau_grid_size") = 99, py::arg("grid_points") = 512)
      .def("to_json", [](const Forest& f) { return model_to_json(f); })
      .def_static("from_json",
                  [](const std::string& text) { return model_from_json(text); });

  m.def(
      "fit",
      [](const std::vector<std::vector<double>>& features, const std::vector<double>& targets,
         std::vector<std::string> feature_names, std::size_t ntree, std::size_t mtry,
         std::size_t min_node_size, bool bootstrap, std::uint64_t seed, unsigned n_threads) {
        ForestConfig config;
        config.ntree = ntree;
        config.mtry = mtry;
        config.min_node_size = min_node_size;
        config.bootstrap = bootstrap;
        config.seed = seed;
        return fit(make_dataset(features, targets, std::move(feature_names)), config, n_threads);
      },
      py::arg("features"), py::arg("targets"), py::arg("feature_names") = std::vector<std::string>{},
      py::arg("ntree") = 500, py::arg("mtry") = 0, py::arg("min_node_size") = 5,
      py::arg("bootstrap") = true, py::arg("seed") = 0, py::arg("n_threads") = 0);

  m.def(
      "sj_bandwidth",
      [](const std::vector<double>& samples) {
        const Bandwidth b = sj_bandwidth(samples);
        return py::make_tuple(b.value, std::string(to_string(b.method)));
      },
      py::arg("samples"));
  m.def(
      "kde_evaluate",
      [](const std::vector<double>& samples, double bandwidth, const std::vector<double>& grid) {
        return kde_evaluate(samples, Bandwidth{bandwidth, BandwidthMethod::fixed}, grid).density;
      },
      py::arg("samples"), py::arg("bandwidth"), py::arg("grid"));
  m.def("epanechnikov", &epanechnikov, py::arg("u"));
  m.def("default_tau_grid", &default_tau_grid, py::arg("grid_size") = 99);

  m.def(
      "rmse", [](const std::vector<double>& o, const std::vector<double>& p) { return rmse(o, p); },
      py::arg("observed"), py::arg("predicted"));
  m.def(
      "mape", [](const std::vector<double>& o, const std::vector<double>& p) { return mape(o, p); },
      py::arg("observed"), py::arg("predicted"));
  m.def(
      "r_squared",
      [](const std::vector<double>& o, const std::vector<double>& p) { return r_squared(o, p); },
      py::arg("observed"), py::arg("predicted"));
  m.def(
      "bias", [](const std::vector<double>& o, const std::vector<double>& p) { return bias(o, p); },
      py::arg("observed"), py::arg("predicted"));
  m.def(
      "pinball_loss",
      [](const std::vector<double>& o, const std::vector<double>& p, double tau) {
        return pinball_loss(o, p, tau);
      },
      py::arg("observed"), py::arg("predicted"), py::arg("tau"));
  m.def(
      "picp",
      [](const std::vector<double>& observed, const std::vector<double>& lowers,
         const std::vector<double>& uppers) {
        return picp(observed, zip_intervals(lowers, uppers, 0.0));
      },
      py::arg("observed"), py::arg("lower"), py::arg("upper"));
  m.def(
      "pinaw",
      [](const std::vector<double>& lowers, const std::vector<double>& uppers,
         double target_range) {
        return pinaw(zip_intervals(lowers, uppers, 0.0), target_range);
      },
      py::arg("lower"), py::arg("upper"), py::arg("target_range"));
}
