#include "qrfsj/qrf.hpp"

#include <algorithm>

#include "qrfsj/errors.hpp"

namespace qrfsj {

double ConditionalCDF::evaluate(double y) const {
  const auto it = std::upper_bound(support.begin(), support.end(), y);
  if (it == support.begin()) return 0.0;
  return cum_weights[static_cast<std::size_t>(it - support.begin()) - 1];
}

ConditionalCDF conditional_cdf(const Forest& forest, std::span<const double> x) {
  const WeightVector w = forest_weights(forest, x);
  const std::vector<double>& targets = forest.train_targets;
  const std::size_t n = targets.size();

  // Rows carrying weight, kept in row order. Zero-weight rows are skipped:
  // adding 0.0 to a partial sum cannot change it, so the sums below stay bit
  // for bit equal to a scan over every row.
  std::vector<std::pair<double, double>> carriers;  // (target, weight)
  for (std::size_t i = 0; i < n; ++i) {
    if (w.weights[i] != 0.0) carriers.emplace_back(targets[i], w.weights[i]);
  }

  std::vector<double> support;
  support.reserve(carriers.size());
  for (const auto& [y, wt] : carriers) support.push_back(y);
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());

  // Each cumulative value is its own row-order pass, so it agrees with a
  // direct evaluation of the step function at that support point.
  ConditionalCDF cdf;
  for (double s : support) {
    double cum = 0.0;
    for (const auto& [y, wt] : carriers) {
      if (y <= s) cum += wt;
    }
    if (!cdf.cum_weights.empty() && cum == cdf.cum_weights.back()) continue;
    cdf.support.push_back(s);
    cdf.cum_weights.push_back(cum);
  }
  return cdf;
}

double quantile(const ConditionalCDF& cdf, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw_validation("InvalidArgument", "quantile level must lie in (0,1)");
  }
  const auto it = std::lower_bound(cdf.cum_weights.begin(), cdf.cum_weights.end(), tau);
  if (it == cdf.cum_weights.end()) return cdf.support.back();
  return cdf.support[static_cast<std::size_t>(it - cdf.cum_weights.begin())];
}

double predict_median(const Forest& forest, std::span<const double> x) {
  return quantile(conditional_cdf(forest, x), 0.5);
}

PredictionInterval interval_from_cdf(const ConditionalCDF& cdf, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw_validation("InvalidArgument", "confidence level must lie in (0,1)");
  }
  const double tail = (1.0 - level) / 2.0;
  PredictionInterval pi;
  pi.lower = quantile(cdf, tail);
  pi.upper = quantile(cdf, 1.0 - tail);
  pi.nominal_level = level;
  return pi;
}

PredictionInterval prediction_interval(const Forest& forest, std::span<const double> x,
                                       double level) {
  return interval_from_cdf(conditional_cdf(forest, x), level);
}

std::vector<std::pair<double, double>> quantile_curve(const Forest& forest,
                                                      std::span<const double> x,
                                                      std::span<const double> taus) {
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const bool in_range = taus[i] > 0.0 && taus[i] < 1.0;
    if (!in_range || (i > 0 && !(taus[i - 1] < taus[i]))) {
      throw_validation("InvalidArgument", "tau grid must be strictly increasing within (0,1)");
    }
  }
  const ConditionalCDF cdf = conditional_cdf(forest, x);
  std::vector<std::pair<double, double>> curve;
  curve.reserve(taus.size());
  for (double tau : taus) {
    curve.emplace_back(tau, quantile(cdf, tau));
  }
  return curve;
}

}  // namespace qrfsj
