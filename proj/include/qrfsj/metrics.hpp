#pragma once

#include <optional>
#include <span>
#include <string>

#include "qrfsj/qrf.hpp"

namespace qrfsj {

double rmse(std::span<const double> observed, std::span<const double> predicted);

// Mean absolute percentage error, in percent. Observed values must be nonzero.
double mape(std::span<const double> observed, std::span<const double> predicted);

// 1 - SS_res/SS_tot about the observed mean; observed must not be constant.
double r_squared(std::span<const double> observed, std::span<const double> predicted);

// mean(observed - predicted)
double bias(std::span<const double> observed, std::span<const double> predicted);

// mean of tau*(y - yhat)+ + (1 - tau)*(yhat - y)+
double pinball_loss(std::span<const double> observed, std::span<const double> predicted,
                    double tau);

// Percent of observations inside their interval, endpoints inclusive.
double picp(std::span<const double> observed, std::span<const PredictionInterval> intervals);

// 100 * mean interval width / target_range.
double pinaw(std::span<const PredictionInterval> intervals, double target_range);

struct EvaluationReport {
  double rmse = 0.0;       // t/ha
  double mape = 0.0;       // percent
  double r_squared = 0.0;
  double bias = 0.0;       // t/ha
  std::optional<double> picp;              // percent
  std::optional<double> pinaw;             // percent
  std::optional<double> confidence_level;  // e.g. 0.90

  std::string to_table() const;
  std::string to_key_values() const;
};

}  // namespace qrfsj
