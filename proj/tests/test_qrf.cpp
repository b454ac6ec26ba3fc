#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "qrfsj/dataset.hpp"
#include "qrfsj/errors.hpp"
#include "qrfsj/forest.hpp"
#include "qrfsj/kde.hpp"
#include "qrfsj/qrf.hpp"
#include "qrfsj/rng.hpp"

using namespace qrfsj;

namespace {

Dataset make_data(std::size_t n, std::size_t m, std::uint64_t seed, double noise = 0.1) {
  Rng rng(seed);
  Dataset ds;
  for (std::size_t j = 0; j < m; ++j) ds.feature_names.push_back("x" + std::to_string(j));
  ds.target_name = "y";
  ds.features = Matrix(n, m);
  for (std::size_t r = 0; r < n; ++r) {
    double y = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      ds.features(r, j) = rng.uniform01();
      y += (j + 1.0) * ds.features(r, j);
    }
    ds.target.push_back(y + noise * rng.normal());
    ds.years.push_back(2000 + static_cast<int>(r));
  }
  return ds;
}

std::string check_tag(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.tag();
  }
  return "";
}

// The estimator written out longhand: F(y|x) = sum_i w_i * 1{Y_i <= y},
// accumulated over every training row in storage order.
double brute_cdf(const WeightVector& w, const std::vector<double>& targets, double y) {
  double total = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] <= y) total += w.weights[i];
  }
  return total;
}

// Smallest y in the support with F(y) >= tau, found by linear scan.
double brute_quantile(const ConditionalCDF& cdf, double tau) {
  for (std::size_t i = 0; i < cdf.support.size(); ++i) {
    if (cdf.cum_weights[i] >= tau) return cdf.support[i];
  }
  return cdf.support.back();
}

}  // namespace

TEST_CASE("conditional cdf equals the longhand weighted-indicator sum") {
  const Dataset ds = make_data(12, 2, 31);
  ForestConfig cfg;
  cfg.ntree = 25;
  cfg.seed = 7;
  const Forest forest = fit(ds, cfg, 1);
  Rng rng(5);
  for (int rep = 0; rep < 25; ++rep) {
    std::vector<double> x = {rng.uniform01(), rng.uniform01()};
    const ConditionalCDF cdf = conditional_cdf(forest, x);
    const WeightVector w = forest_weights(forest, x);

    REQUIRE(!cdf.support.empty());
    CHECK(std::is_sorted(cdf.support.begin(), cdf.support.end()));
    for (std::size_t i = 0; i + 1 < cdf.support.size(); ++i) {
      CHECK(cdf.support[i] < cdf.support[i + 1]);
    }
    for (std::size_t i = 0; i < cdf.support.size(); ++i) {
      // Bitwise equality: both sides accumulate the same rows in the same order.
      CHECK(cdf.cum_weights[i] == brute_cdf(w, ds.target, cdf.support[i]));
    }
  }
}

TEST_CASE("quantile is the smallest support value whose cdf reaches tau") {
  const Dataset ds = make_data(12, 2, 47);
  ForestConfig cfg;
  cfg.ntree = 25;
  cfg.seed = 3;
  const Forest forest = fit(ds, cfg, 1);
  Rng rng(9);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<double> x = {rng.uniform01(), rng.uniform01()};
    const ConditionalCDF cdf = conditional_cdf(forest, x);
    for (int t = 1; t <= 99; ++t) {
      const double tau = t / 100.0;
      CHECK(quantile(cdf, tau) == brute_quantile(cdf, tau));
    }
  }
}

TEST_CASE("cdf is a valid step function") {
  const Dataset ds = make_data(80, 3, 13);
  ForestConfig cfg;
  cfg.ntree = 40;
  cfg.seed = 11;
  const Forest forest = fit(ds, cfg);
  Rng rng(21);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> x = {rng.uniform01(), rng.uniform01(), rng.uniform01()};
    const ConditionalCDF cdf = conditional_cdf(forest, x);
    CHECK(std::abs(cdf.cum_weights.back() - 1.0) <= 1e-9);
    for (std::size_t i = 0; i + 1 < cdf.cum_weights.size(); ++i) {
      CHECK(cdf.cum_weights[i] <= cdf.cum_weights[i + 1]);
      CHECK(cdf.cum_weights[i] > 0.0);
    }
    CHECK(cdf.evaluate(cdf.support.front() - 1.0) == 0.0);
    CHECK(cdf.evaluate(cdf.support.back() + 1.0) == cdf.cum_weights.back());
    for (std::size_t i = 0; i < cdf.support.size(); ++i) {
      CHECK(cdf.evaluate(cdf.support[i]) == cdf.cum_weights[i]);
    }
    const double below = std::nextafter(cdf.support[0], -1e300);
    CHECK(cdf.evaluate(below) == 0.0);
  }
}

TEST_CASE("quantiles are monotone in tau and intervals nest") {
  const Dataset ds = make_data(150, 3, 91);
  ForestConfig cfg;
  cfg.ntree = 50;
  cfg.seed = 17;
  const Forest forest = fit(ds, cfg);
  Rng rng(33);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> x = {rng.uniform01(), rng.uniform01(), rng.uniform01()};
    const ConditionalCDF cdf = conditional_cdf(forest, x);
    double t1 = rng.uniform(0.01, 0.99), t2 = rng.uniform(0.01, 0.99);
    if (t1 > t2) std::swap(t1, t2);
    CHECK(quantile(cdf, t1) <= quantile(cdf, t2));

    const PredictionInterval narrow = interval_from_cdf(cdf, 0.5);
    const PredictionInterval mid = interval_from_cdf(cdf, 0.9);
    const PredictionInterval wide = interval_from_cdf(cdf, 0.99);
    CHECK(wide.lower <= mid.lower);
    CHECK(mid.lower <= narrow.lower);
    CHECK(narrow.lower <= narrow.upper);
    CHECK(narrow.upper <= mid.upper);
    CHECK(mid.upper <= wide.upper);
    CHECK(mid.nominal_level == 0.9);
  }
}

TEST_CASE("median point forecast is the 0.5 quantile") {
  const Dataset ds = make_data(60, 2, 3);
  ForestConfig cfg;
  cfg.ntree = 30;
  cfg.seed = 2;
  const Forest forest = fit(ds, cfg, 1);
  Rng rng(8);
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<double> x = {rng.uniform01(), rng.uniform01()};
    CHECK(predict_median(forest, x) == quantile(conditional_cdf(forest, x), 0.5));
  }
}

TEST_CASE("memorizing forest yields point-mass cdfs at training rows") {
  const Dataset ds = make_data(25, 2, 57, 0.0);
  ForestConfig cfg;
  cfg.ntree = 1;
  cfg.bootstrap = false;
  cfg.min_node_size = 1;
  cfg.mtry = 2;
  const Forest forest = fit(ds, cfg, 1);
  for (std::size_t r = 0; r < ds.n(); ++r) {
    const ConditionalCDF cdf = conditional_cdf(forest, ds.features.row(r));
    REQUIRE(cdf.support.size() == 1);
    CHECK(cdf.support[0] == ds.target[r]);
    CHECK(quantile(cdf, 0.01) == ds.target[r]);
    CHECK(quantile(cdf, 0.99) == ds.target[r]);
    const PredictionInterval pi = prediction_interval(forest, ds.features.row(r), 0.9);
    CHECK(pi.lower == pi.upper);
  }
}

TEST_CASE("quantile curve equals per-tau quantile calls") {
  const Dataset ds = make_data(70, 2, 101);
  ForestConfig cfg;
  cfg.ntree = 20;
  cfg.seed = 29;
  const Forest forest = fit(ds, cfg, 1);
  const std::vector<double> taus = default_tau_grid(99);
  REQUIRE(taus.size() == 99);
  CHECK(taus.front() == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(taus.back() == doctest::Approx(0.99).epsilon(1e-12));

  std::vector<double> x = {0.4, 0.6};
  const auto curve = quantile_curve(forest, x, taus);
  const ConditionalCDF cdf = conditional_cdf(forest, x);
  REQUIRE(curve.size() == taus.size());
  for (std::size_t i = 0; i < taus.size(); ++i) {
    CHECK(curve[i].first == taus[i]);
    CHECK(curve[i].second == quantile(cdf, taus[i]));
  }
}

TEST_CASE("level and tau validation") {
  const Dataset ds = make_data(20, 2, 1);
  ForestConfig cfg;
  cfg.ntree = 5;
  const Forest forest = fit(ds, cfg, 1);
  std::vector<double> x = {0.5, 0.5};
  const ConditionalCDF cdf = conditional_cdf(forest, x);
  CHECK(check_tag([&] { quantile(cdf, 0.0); }) == "InvalidArgument");
  CHECK(check_tag([&] { quantile(cdf, 1.0); }) == "InvalidArgument");
  CHECK(check_tag([&] { interval_from_cdf(cdf, 0.0); }) == "InvalidArgument");
  CHECK(check_tag([&] { interval_from_cdf(cdf, 1.0); }) == "InvalidArgument");
  const std::vector<double> decreasing = {0.5, 0.4};
  const std::vector<double> at_zero = {0.0, 0.5};
  CHECK(check_tag([&] { quantile_curve(forest, x, decreasing); }) == "InvalidArgument");
  CHECK(check_tag([&] { quantile_curve(forest, x, at_zero); }) == "InvalidArgument");
  std::vector<double> wrong = {0.5};
  CHECK(check_tag([&] { conditional_cdf(forest, wrong); }) == "InvalidArgument");
}

TEST_CASE("interval quantile levels follow the nominal level") {
  const Dataset ds = make_data(100, 2, 67);
  ForestConfig cfg;
  cfg.ntree = 40;
  cfg.seed = 23;
  const Forest forest = fit(ds, cfg, 1);
  std::vector<double> x = {0.3, 0.7};
  const ConditionalCDF cdf = conditional_cdf(forest, x);
  const PredictionInterval pi = interval_from_cdf(cdf, 0.90);
  CHECK(pi.lower == quantile(cdf, 0.05));
  CHECK(pi.upper == quantile(cdf, 0.95));
  const PredictionInterval pi2 = interval_from_cdf(cdf, 0.80);
  CHECK(pi2.lower == quantile(cdf, 0.10));
  CHECK(pi2.upper == quantile(cdf, 0.90));
}
