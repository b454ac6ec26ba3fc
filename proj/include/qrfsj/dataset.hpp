#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qrfsj/matrix.hpp"

namespace qrfsj {

// One observation year as read from disk; cells may be missing.
struct RawRow {
  int year = 0;
  std::vector<std::optional<double>> features;
  std::optional<double> target;
};

// Tabular data before imputation/normalization. Rows are sorted by year and
// years are unique; every row has exactly feature_names.size() feature slots.
struct RawTable {
  std::vector<std::string> feature_names;
  std::string target_name;
  std::vector<RawRow> rows;

  std::size_t num_features() const { return feature_names.size(); }
  bool complete() const;
};

// Clean modeling data: features normalized per column to [0,1], target kept in
// its original units (t/ha).
struct Dataset {
  Matrix features;  // n x M
  std::vector<double> target;
  std::vector<std::string> feature_names;
  std::string target_name;
  std::vector<int> years;

  std::size_t n() const { return target.size(); }
  std::size_t num_features() const { return feature_names.size(); }
};

// Per-feature affine map fitted by min_max_normalize; lets query points be
// scaled exactly like the training data.
struct NormalizationParams {
  struct Range {
    double min = 0.0;
    double max = 0.0;
  };
  std::vector<Range> features;

  double normalize(std::size_t feature, double raw) const {
    const auto& r = features[feature];
    return (raw - r.min) / (r.max - r.min);
  }
  double denormalize(std::size_t feature, double scaled) const {
    const auto& r = features[feature];
    return scaled * (r.max - r.min) + r.min;
  }
};

struct ColumnStats {
  std::string name;
  double mean = 0.0;
  double std_dev = 0.0;  // sample standard deviation, divisor n-1
  double min = 0.0;
  double max = 0.0;
  double skewness = 0.0;  // adjusted Fisher-Pearson; 0 for zero-variance columns
};

// One entry per feature column followed by the target column.
struct SummaryStats {
  std::vector<ColumnStats> columns;
};

// CSV contents before any modeling interpretation: column names plus per-row
// year and numeric-or-missing cells. Rows come back sorted by year, years
// unique. Lets callers accept tables with or without a target column.
struct CsvTable {
  std::vector<std::string> header;  // leading year column included
  std::vector<int> years;
  std::vector<std::vector<std::optional<double>>> cells;  // header.size()-1 per row
};

CsvTable read_csv(const std::string& path);

// Reads a UTF-8 comma-separated file: header row, first column `year`
// (integer), last column the target, intermediate columns features. Empty
// cells denote missing values. Rows are returned sorted by year.
RawTable load_csv(const std::string& path);

// Fills every missing cell with the unweighted mean of that column over the k
// nearest rows. Distances are Euclidean over the coordinates observed in both
// rows, each coordinate rescaled by its column range; only rows where the
// imputed column is observed are candidates.
RawTable knn_impute(const RawTable& table, std::size_t k);

// Maps every feature column affinely onto [0,1]; the target passes through
// unchanged.
std::pair<Dataset, NormalizationParams> min_max_normalize(const RawTable& table);

// First ceil(n * train_fraction) rows (by year) become the training set, the
// remainder the test set. Both partitions must be nonempty.
std::pair<Dataset, Dataset> chronological_split(const Dataset& ds, double train_fraction);

SummaryStats summary_stats(const Dataset& ds);

}  // namespace qrfsj
