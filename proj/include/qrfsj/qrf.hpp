#pragma once

#include <span>
#include <utility>
#include <vector>

#include "qrfsj/forest.hpp"

namespace qrfsj {

// Empirical conditional distribution of the target at a query point: a right-
// continuous step function over the distinct target values carrying weight.
struct ConditionalCDF {
  std::vector<double> support;      // strictly increasing target values
  std::vector<double> cum_weights;  // nondecreasing, final entry ~1

  double evaluate(double y) const;  // P(Y <= y | x), ties at y included
};

struct PredictionInterval {
  double lower = 0.0;
  double upper = 0.0;
  double nominal_level = 0.0;  // e.g. 0.90
};

// Accumulates forest weights at x over the sorted training targets; duplicate
// targets merge and zero-weight values drop out.
ConditionalCDF conditional_cdf(const Forest& forest, std::span<const double> x);

// Smallest support value whose cumulative weight reaches tau (tau in (0,1)).
double quantile(const ConditionalCDF& cdf, double tau);

// quantile at 0.5; at an even mass split this lands on the lower point.
double predict_median(const Forest& forest, std::span<const double> x);

// Central interval [q_{(1-level)/2}, q_{1-(1-level)/2}].
PredictionInterval prediction_interval(const Forest& forest, std::span<const double> x,
                                       double level);
PredictionInterval interval_from_cdf(const ConditionalCDF& cdf, double level);

// (tau, quantile) pairs from one CDF evaluation; taus strictly increasing,
// all in (0,1).
std::vector<std::pair<double, double>> quantile_curve(const Forest& forest,
                                                      std::span<const double> x,
                                                      std::span<const double> taus);

}  // namespace qrfsj
