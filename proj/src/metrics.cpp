#include "qrfsj/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "qrfsj/errors.hpp"

namespace qrfsj {

namespace {

void check_pair(std::span<const double> observed, std::span<const double> predicted,
                const char* what) {
  if (observed.empty()) {
    throw_validation("InvalidArgument", std::string(what) + " needs at least one observation");
  }
  if (observed.size() != predicted.size()) {
    throw_validation("InvalidArgument", std::string(what) + ": observed has " +
                                            std::to_string(observed.size()) +
                                            " entries but predicted has " +
                                            std::to_string(predicted.size()));
  }
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

}  // namespace

double rmse(std::span<const double> observed, std::span<const double> predicted) {
  check_pair(observed, predicted, "rmse");
  double ss = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double d = observed[i] - predicted[i];
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(observed.size()));
}

double mape(std::span<const double> observed, std::span<const double> predicted) {
  check_pair(observed, predicted, "mape");
  double sum = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (observed[i] == 0.0) {
      throw_numeric("ZeroDenominator",
                    "mape undefined: observed value at position " + std::to_string(i) + " is 0");
    }
    sum += std::abs(observed[i] - predicted[i]) / std::abs(observed[i]);
  }
  return 100.0 * sum / static_cast<double>(observed.size());
}

double r_squared(std::span<const double> observed, std::span<const double> predicted) {
  check_pair(observed, predicted, "r_squared");
  if (observed.size() < 2) {
    throw_validation("InvalidArgument", "r_squared needs at least 2 observations");
  }
  double mean = 0.0;
  for (double y : observed) mean += y;
  mean /= static_cast<double>(observed.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    ss_res += (observed[i] - predicted[i]) * (observed[i] - predicted[i]);
    ss_tot += (observed[i] - mean) * (observed[i] - mean);
  }
  if (ss_tot == 0.0) {
    throw_numeric("ZeroVariance", "r_squared undefined: observed values are constant");
  }
  return 1.0 - ss_res / ss_tot;
}

double bias(std::span<const double> observed, std::span<const double> predicted) {
  check_pair(observed, predicted, "bias");
  double sum = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    sum += observed[i] - predicted[i];
  }
  return sum / static_cast<double>(observed.size());
}

double pinball_loss(std::span<const double> observed, std::span<const double> predicted,
                    double tau) {
  check_pair(observed, predicted, "pinball_loss");
  if (!(tau > 0.0 && tau < 1.0)) {
    throw_validation("InvalidArgument", "pinball_loss requires tau in (0,1)");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double diff = observed[i] - predicted[i];
    sum += diff >= 0.0 ? tau * diff : (tau - 1.0) * diff;
  }
  return sum / static_cast<double>(observed.size());
}

double picp(std::span<const double> observed, std::span<const PredictionInterval> intervals) {
  if (observed.empty() || observed.size() != intervals.size()) {
    throw_validation("InvalidArgument", "picp needs matching nonempty observations and intervals");
  }
  std::size_t covered = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (observed[i] >= intervals[i].lower && observed[i] <= intervals[i].upper) ++covered;
  }
  return 100.0 * static_cast<double>(covered) / static_cast<double>(observed.size());
}

double pinaw(std::span<const PredictionInterval> intervals, double target_range) {
  if (intervals.empty()) {
    throw_validation("InvalidArgument", "pinaw needs at least one interval");
  }
  if (!(target_range > 0.0)) {
    throw_validation("InvalidArgument", "pinaw needs a positive target range");
  }
  double widths = 0.0;
  for (const PredictionInterval& pi : intervals) {
    widths += pi.upper - pi.lower;
  }
  return 100.0 * widths / (static_cast<double>(intervals.size()) * target_range);
}

std::string EvaluationReport::to_table() const {
  std::string out;
  out += "Metric                     Value\n";
  out += "RMSE (t/ha)           " + fmt("%10.4f", rmse) + "\n";
  out += "MAPE (%)              " + fmt("%10.4f", mape) + "\n";
  out += "R-squared             " + fmt("%10.4f", r_squared) + "\n";
  out += "Bias (t/ha)           " + fmt("%10.4f", bias) + "\n";
  if (confidence_level) {
    out += "Confidence level (%)  " + fmt("%10.4f", *confidence_level * 100.0) + "\n";
  }
  if (picp) out += "PICP (%)              " + fmt("%10.4f", *picp) + "\n";
  if (pinaw) out += "PINAW (%)             " + fmt("%10.4f", *pinaw) + "\n";
  return out;
}

std::string EvaluationReport::to_key_values() const {
  std::string out;
  out += "rmse=" + fmt("%.10g", rmse) + "\n";
  out += "mape_pct=" + fmt("%.10g", mape) + "\n";
  out += "r_squared=" + fmt("%.10g", r_squared) + "\n";
  out += "bias=" + fmt("%.10g", bias) + "\n";
  if (confidence_level) {
    out += "confidence_level_pct=" + fmt("%.10g", *confidence_level * 100.0) + "\n";
  }
  if (picp) out += "picp_pct=" + fmt("%.10g", *picp) + "\n";
  if (pinaw) out += "pinaw_pct=" + fmt("%.10g", *pinaw) + "\n";
  return out;
}

}  // namespace qrfsj
