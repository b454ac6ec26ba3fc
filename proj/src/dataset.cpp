#include "qrfsj/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "qrfsj/errors.hpp"

namespace qrfsj {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_number(const std::string& raw, std::size_t line_no, const std::string& column) {
  const std::string text = trim(raw);
  const char* begin = text.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  if (end != begin + text.size() || text.empty() || !std::isfinite(value)) {
    throw_validation("NonNumericCell", "line " + std::to_string(line_no) + ", column '" +
                                           column + "': cannot parse '" + text + "' as a number");
  }
  return value;
}

int parse_year(const std::string& raw, std::size_t line_no) {
  const std::string text = trim(raw);
  const char* begin = text.c_str();
  char* end = nullptr;
  const long value = std::strtol(begin, &end, 10);
  if (end != begin + text.size() || text.empty()) {
    throw_validation("NonNumericCell", "line " + std::to_string(line_no) +
                                           ": cannot parse year '" + text + "' as an integer");
  }
  return static_cast<int>(value);
}

}  // namespace

bool RawTable::complete() const {
  for (const RawRow& row : rows) {
    if (!row.target.has_value()) return false;
    for (const auto& cell : row.features) {
      if (!cell.has_value()) return false;
    }
  }
  return true;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw_io("IoError", "cannot open '" + path + "' for reading");
  }
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  // (row, original line) pairs so error messages can reference the file.
  std::vector<std::size_t> row_lines;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split_fields(line);
    if (table.header.empty()) {
      for (std::string& name : fields) {
        name = trim(name);
        if (name.empty()) {
          throw_validation("MalformedCsv", "line " + std::to_string(line_no) +
                                               ": empty column name in header");
        }
      }
      if (fields.size() < 2) {
        throw_validation("MalformedCsv", "header must name a year column and at least one value column");
      }
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw_validation("MalformedCsv", "line " + std::to_string(line_no) + ": expected " +
                                           std::to_string(table.header.size()) + " fields, found " +
                                           std::to_string(fields.size()));
    }
    table.years.push_back(parse_year(fields[0], line_no));
    std::vector<std::optional<double>> cells;
    cells.reserve(fields.size() - 1);
    for (std::size_t c = 1; c < fields.size(); ++c) {
      if (trim(fields[c]).empty()) {
        cells.emplace_back(std::nullopt);
      } else {
        cells.emplace_back(parse_number(fields[c], line_no, table.header[c]));
      }
    }
    table.cells.push_back(std::move(cells));
    row_lines.push_back(line_no);
  }
  if (table.header.empty()) {
    throw_validation("MalformedCsv", "'" + path + "' has no header row");
  }

  std::vector<std::size_t> order(table.years.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return table.years[a] < table.years[b]; });
  std::vector<int> years;
  std::vector<std::vector<std::optional<double>>> cells;
  years.reserve(order.size());
  cells.reserve(order.size());
  for (std::size_t idx : order) {
    if (!years.empty() && years.back() == table.years[idx]) {
      throw_validation("DuplicateYear", "year " + std::to_string(years.back()) + " appears twice");
    }
    years.push_back(table.years[idx]);
    cells.push_back(std::move(table.cells[idx]));
  }
  table.years = std::move(years);
  table.cells = std::move(cells);
  return table;
}

RawTable load_csv(const std::string& path) {
  CsvTable csv = read_csv(path);
  if (csv.header.size() < 3) {
    throw_validation("MalformedCsv",
                     "'" + path + "' needs year, at least one feature column, and a target column");
  }
  if (csv.years.size() < 2) {
    throw_validation("TooFewRows", "'" + path + "' has " + std::to_string(csv.years.size()) +
                                       " data rows; at least 2 required");
  }
  RawTable table;
  table.feature_names.assign(csv.header.begin() + 1, csv.header.end() - 1);
  table.target_name = csv.header.back();
  table.rows.reserve(csv.years.size());
  const std::size_t m = table.feature_names.size();
  for (std::size_t i = 0; i < csv.years.size(); ++i) {
    RawRow row;
    row.year = csv.years[i];
    row.features.assign(csv.cells[i].begin(), csv.cells[i].begin() + static_cast<long>(m));
    row.target = csv.cells[i][m];
    table.rows.push_back(std::move(row));
  }
  return table;
}

namespace {

// Column access treating the table as features + trailing target column.
std::optional<double> coordinate(const RawRow& row, std::size_t c) {
  return c < row.features.size() ? row.features[c] : row.target;
}

}  // namespace

RawTable knn_impute(const RawTable& table, std::size_t k) {
  if (k < 1) {
    throw_validation("InvalidArgument", "knn_impute requires k >= 1");
  }
  const std::size_t n = table.rows.size();
  const std::size_t m = table.num_features();
  const std::size_t n_cols = m + 1;  // features plus target

  // Per-column spread used to put coordinates on comparable scales.
  std::vector<double> scale(n_cols, 1.0);
  for (std::size_t c = 0; c < n_cols; ++c) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    bool seen = false;
    for (const RawRow& row : table.rows) {
      if (auto v = coordinate(row, c)) {
        lo = std::min(lo, *v);
        hi = std::max(hi, *v);
        seen = true;
      }
    }
    if (!seen) {
      const std::string name = c < m ? table.feature_names[c] : table.target_name;
      throw_validation("UnimputableColumn", "column '" + name + "' has no observed values");
    }
    if (hi > lo) scale[c] = hi - lo;
  }

  RawTable result = table;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n_cols; ++c) {
      if (coordinate(table.rows[r], c).has_value()) continue;

      // Candidates: rows with this column observed and at least one
      // coordinate in common with row r; distances use original values only.
      std::vector<std::pair<double, std::size_t>> candidates;
      for (std::size_t s = 0; s < n; ++s) {
        if (s == r || !coordinate(table.rows[s], c).has_value()) continue;
        double dist2 = 0.0;
        bool any = false;
        for (std::size_t d = 0; d < n_cols; ++d) {
          const auto a = coordinate(table.rows[r], d);
          const auto b = coordinate(table.rows[s], d);
          if (a && b) {
            const double diff = (*a - *b) / scale[d];
            dist2 += diff * diff;
            any = true;
          }
        }
        if (any) candidates.emplace_back(std::sqrt(dist2), s);
      }
      if (candidates.size() < k) {
        const std::string name = c < m ? table.feature_names[c] : table.target_name;
        throw_validation("NotEnoughNeighbors",
                         "column '" + name + "', year " + std::to_string(table.rows[r].year) +
                             ": " + std::to_string(candidates.size()) +
                             " eligible neighbors, need k=" + std::to_string(k));
      }
      std::sort(candidates.begin(), candidates.end(),
                [](const auto& a, const auto& b) {
                  return a.first != b.first ? a.first < b.first : a.second < b.second;
                });
      double sum = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        sum += *coordinate(table.rows[candidates[i].second], c);
      }
      const double imputed = sum / static_cast<double>(k);
      if (c < m) {
        result.rows[r].features[c] = imputed;
      } else {
        result.rows[r].target = imputed;
      }
    }
  }
  return result;
}

std::pair<Dataset, NormalizationParams> min_max_normalize(const RawTable& table) {
  if (!table.complete()) {
    throw_validation("InvalidArgument",
                     "table still has missing cells; run knn_impute before normalizing");
  }
  const std::size_t n = table.rows.size();
  const std::size_t m = table.num_features();
  if (n < 2) {
    throw_validation("TooFewRows", "need at least 2 rows to normalize");
  }

  NormalizationParams params;
  params.features.resize(m);
  for (std::size_t c = 0; c < m; ++c) {
    double lo = *table.rows[0].features[c];
    double hi = lo;
    for (const RawRow& row : table.rows) {
      lo = std::min(lo, *row.features[c]);
      hi = std::max(hi, *row.features[c]);
    }
    if (hi == lo) {
      throw_validation("DegenerateFeature",
                       "feature '" + table.feature_names[c] + "' is constant (" +
                           std::to_string(lo) + "); min-max scaling is undefined");
    }
    params.features[c] = {lo, hi};
  }

  Dataset ds;
  ds.features = Matrix(n, m);
  ds.target.reserve(n);
  ds.years.reserve(n);
  ds.feature_names = table.feature_names;
  ds.target_name = table.target_name;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      ds.features(r, c) = params.normalize(c, *table.rows[r].features[c]);
    }
    ds.target.push_back(*table.rows[r].target);
    ds.years.push_back(table.rows[r].year);
  }
  return {std::move(ds), std::move(params)};
}

std::pair<Dataset, Dataset> chronological_split(const Dataset& ds, double train_fraction) {
  if (ds.n() < 3) {
    throw_validation("TooFewRows", "chronological_split needs at least 3 rows");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw_validation("InvalidArgument", "train_fraction must lie in (0,1)");
  }
  const std::size_t n = ds.n();
  // Small backoff so products like 5*0.8 that land a hair above an integer
  // do not get ceiled one row too far.
  const auto train_n =
      static_cast<std::size_t>(std::ceil(static_cast<double>(n) * train_fraction - 1e-9));
  if (train_n == 0 || train_n >= n) {
    throw_validation("EmptyPartition", "train_fraction " + std::to_string(train_fraction) +
                                           " leaves an empty partition for n=" + std::to_string(n));
  }

  auto take = [&](std::size_t begin, std::size_t end) {
    Dataset part;
    part.feature_names = ds.feature_names;
    part.target_name = ds.target_name;
    part.features = Matrix(end - begin, ds.num_features());
    part.target.reserve(end - begin);
    part.years.reserve(end - begin);
    for (std::size_t r = begin; r < end; ++r) {
      for (std::size_t c = 0; c < ds.num_features(); ++c) {
        part.features(r - begin, c) = ds.features(r, c);
      }
      part.target.push_back(ds.target[r]);
      part.years.push_back(ds.years[r]);
    }
    return part;
  };
  return {take(0, train_n), take(train_n, n)};
}

namespace {

ColumnStats column_stats(const std::string& name, const std::vector<double>& values) {
  const auto n = static_cast<double>(values.size());
  ColumnStats st;
  st.name = name;
  double sum = 0.0;
  st.min = values[0];
  st.max = values[0];
  for (double v : values) {
    sum += v;
    st.min = std::min(st.min, v);
    st.max = std::max(st.max, v);
  }
  st.mean = sum / n;
  double m2 = 0.0, m3 = 0.0;
  for (double v : values) {
    const double d = v - st.mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  st.std_dev = std::sqrt(m2 / (n - 1.0));
  m2 /= n;
  m3 /= n;
  if (m2 > 0.0 && values.size() >= 3) {
    const double g1 = m3 / std::pow(m2, 1.5);
    st.skewness = g1 * std::sqrt(n * (n - 1.0)) / (n - 2.0);
  }
  return st;
}

}  // namespace

SummaryStats summary_stats(const Dataset& ds) {
  if (ds.n() < 2) {
    throw_validation("TooFewRows", "summary_stats needs at least 2 rows");
  }
  SummaryStats stats;
  std::vector<double> column(ds.n());
  for (std::size_t c = 0; c < ds.num_features(); ++c) {
    for (std::size_t r = 0; r < ds.n(); ++r) column[r] = ds.features(r, c);
    stats.columns.push_back(column_stats(ds.feature_names[c], column));
  }
  stats.columns.push_back(column_stats(ds.target_name, ds.target));
  return stats;
}

}  // namespace qrfsj
