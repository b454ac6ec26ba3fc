#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <unistd.h>

#include "qrfsj/dataset.hpp"
#include "qrfsj/errors.hpp"
#include "qrfsj/rng.hpp"

using namespace qrfsj;
namespace fs = std::filesystem;

namespace {

struct TempCsv {
  fs::path path;
  explicit TempCsv(const std::string& content) {
    static int counter = 0;
    path = fs::temp_directory_path() / ("qrfsj_ds_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter++) + ".csv");
    std::ofstream out(path, std::ios::binary);
    out << content;
  }
  ~TempCsv() {
    std::error_code ec;
    fs::remove(path, ec);
  }
};

std::string check_tag(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.tag();
  }
  return "";
}

double oracle_skewness(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  if (x.size() < 3) return 0.0;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  if (ss == 0.0) return 0.0;
  const double s = std::sqrt(ss / (n - 1.0));
  double cubes = 0.0;
  for (double v : x) cubes += std::pow((v - mean) / s, 3.0);
  return n / ((n - 1.0) * (n - 2.0)) * cubes;
}

}  // namespace

TEST_CASE("load_csv parses and sorts rows by year") {
  TempCsv csv(
      "year,a,b,yield\n"
      "2003,3,30,0.3\n"
      "2001,1,10,0.1\n"
      "2002,2,,0.2\n");
  const RawTable t = load_csv(csv.path.string());
  CHECK(t.feature_names == std::vector<std::string>{"a", "b"});
  CHECK(t.target_name == "yield");
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[0].year == 2001);
  CHECK(t.rows[1].year == 2002);
  CHECK(t.rows[2].year == 2003);
  CHECK(*t.rows[0].features[0] == 1.0);
  CHECK(!t.rows[1].features[1].has_value());
  CHECK(*t.rows[2].target == 0.3);
  CHECK_FALSE(t.complete());
}

TEST_CASE("load_csv tolerates CRLF line endings and blank lines") {
  TempCsv csv("year,a,y\r\n2001,1,2\r\n\r\n2002,3,4\r\n");
  const RawTable t = load_csv(csv.path.string());
  CHECK(t.rows.size() == 2);
  CHECK(*t.rows[1].features[0] == 3.0);
}

TEST_CASE("load_csv error taxonomy") {
  CHECK(check_tag([] { load_csv("/nonexistent/definitely_missing.csv"); }) == "IoError");

  TempCsv dup("year,a,y\n2001,1,2\n2001,3,4\n");
  CHECK(check_tag([&] { load_csv(dup.path.string()); }) == "DuplicateYear");

  TempCsv short_row("year,a,y\n2001,1\n");
  CHECK(check_tag([&] { load_csv(short_row.path.string()); }) == "MalformedCsv");

  TempCsv two_cols("year,y\n2001,1\n2002,2\n");
  CHECK(check_tag([&] { load_csv(two_cols.path.string()); }) == "MalformedCsv");

  TempCsv bad_cell("year,a,y\n2001,abc,2\n2002,1,2\n");
  CHECK(check_tag([&] { load_csv(bad_cell.path.string()); }) == "NonNumericCell");

  TempCsv bad_year("year,a,y\n20x1,1,2\n2002,1,2\n");
  CHECK(check_tag([&] { load_csv(bad_year.path.string()); }) == "NonNumericCell");

  TempCsv one_row("year,a,y\n2001,1,2\n");
  CHECK(check_tag([&] { load_csv(one_row.path.string()); }) == "TooFewRows");

  TempCsv inf_cell("year,a,y\n2001,inf,2\n2002,1,2\n");
  CHECK(check_tag([&] { load_csv(inf_cell.path.string()); }) == "NonNumericCell");
}

TEST_CASE("knn imputation matches a hand-worked example") {
  // Columns scaled by their observed range; distances over mutually observed
  // coordinates (features + target); candidates must have the target column
  // of the gap observed. Hand-computed with k = 2.
  TempCsv csv(
      "year,f1,f2,y\n"
      "2001,0,10,0\n"
      "2002,1,20,1\n"
      "2003,2,,2\n"
      "2004,3,40,3\n"
      "2005,10,,10\n"
      "2006,11,110,11\n");
  const RawTable t = load_csv(csv.path.string());
  const RawTable imputed = knn_impute(t, 2);
  CHECK(imputed.complete());
  // 2003: nearest by (f1, y) are 2002 and 2004 -> mean(20, 40).
  CHECK(*imputed.rows[2].features[1] == doctest::Approx(30.0).epsilon(1e-12));
  // 2005: nearest are 2006 then 2004 -> mean(110, 40); the 2003 gap may not
  // act as a candidate because its f2 was not observed originally.
  CHECK(*imputed.rows[4].features[1] == doctest::Approx(75.0).epsilon(1e-12));
  // Observed cells never change.
  CHECK(*imputed.rows[0].features[1] == 10.0);
  CHECK(*imputed.rows[5].features[1] == 110.0);
}

TEST_CASE("knn imputation is independent of which gap is processed first") {
  // Both gaps sit in the same column; each must be filled from originally
  // observed values only, so their imputations cannot feed each other.
  TempCsv csv(
      "year,f1,f2,y\n"
      "2001,0,100,0\n"
      "2002,1,,1\n"
      "2003,2,200,2\n"
      "2004,3,,3\n"
      "2005,4,300,4\n");
  const RawTable imputed = knn_impute(load_csv(csv.path.string()), 2);
  CHECK(*imputed.rows[1].features[1] == doctest::Approx(150.0).epsilon(1e-12));
  CHECK(*imputed.rows[3].features[1] == doctest::Approx(250.0).epsilon(1e-12));
}

TEST_CASE("knn imputation with a constant column does not divide by zero") {
  TempCsv csv(
      "year,f1,f2,y\n"
      "2001,5,10,0\n"
      "2002,5,,1\n"
      "2003,5,30,2\n");
  const RawTable imputed = knn_impute(load_csv(csv.path.string()), 1);
  CHECK(std::isfinite(*imputed.rows[1].features[1]));
}

TEST_CASE("knn imputation errors") {
  TempCsv all_missing(
      "year,f1,f2,y\n"
      "2001,0,,0\n"
      "2002,1,,1\n");
  CHECK(check_tag([&] { knn_impute(load_csv(all_missing.path.string()), 1); }) ==
        "UnimputableColumn");

  TempCsv few(
      "year,f1,f2,y\n"
      "2001,0,10,0\n"
      "2002,1,,1\n"
      "2003,2,30,2\n");
  CHECK(check_tag([&] { knn_impute(load_csv(few.path.string()), 5); }) == "NotEnoughNeighbors");
  CHECK(check_tag([&] { knn_impute(load_csv(few.path.string()), 0); }) == "InvalidArgument");

  // A complete table passes through untouched.
  TempCsv complete("year,f1,y\n2001,1,2\n2002,3,4\n");
  const RawTable t = load_csv(complete.path.string());
  const RawTable imputed = knn_impute(t, 3);
  CHECK(imputed.rows.size() == t.rows.size());
  CHECK(*imputed.rows[0].features[0] == 1.0);
}

TEST_CASE("min-max normalization maps features to [0,1] and leaves the target raw") {
  TempCsv csv(
      "year,f1,f2,y\n"
      "2001,10,5,100\n"
      "2002,20,9,200\n"
      "2003,30,7,300\n");
  auto [ds, params] = min_max_normalize(load_csv(csv.path.string()));
  CHECK(ds.n() == 3);
  CHECK(ds.features(0, 0) == 0.0);
  CHECK(ds.features(2, 0) == 1.0);
  CHECK(ds.features(1, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(ds.features(1, 1) == 1.0);
  CHECK(ds.target == std::vector<double>{100.0, 200.0, 300.0});
  CHECK(params.features[0].min == 10.0);
  CHECK(params.features[0].max == 30.0);
}

TEST_CASE("normalizing an already-normalized table is the identity") {
  Rng rng(99);
  RawTable t;
  t.feature_names = {"a", "b", "c"};
  t.target_name = "y";
  for (int r = 0; r < 20; ++r) {
    RawRow row;
    row.year = 2000 + r;
    for (int j = 0; j < 3; ++j) row.features.push_back(rng.uniform(-5.0, 5.0));
    row.target = rng.uniform01();
    t.rows.push_back(row);
  }
  auto [ds1, params1] = min_max_normalize(t);

  RawTable renorm = t;
  for (std::size_t r = 0; r < renorm.rows.size(); ++r) {
    for (std::size_t j = 0; j < 3; ++j) renorm.rows[r].features[j] = ds1.features(r, j);
  }
  auto [ds2, params2] = min_max_normalize(renorm);
  for (std::size_t r = 0; r < ds1.n(); ++r) {
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(ds2.features(r, j) == doctest::Approx(ds1.features(r, j)).epsilon(1e-12));
    }
  }
  CHECK(params2.features[0].min == doctest::Approx(0.0));
  CHECK(params2.features[0].max == doctest::Approx(1.0));
}

TEST_CASE("normalization round-trips raw values") {
  Rng rng(123);
  RawTable t;
  t.feature_names = {"a", "b"};
  t.target_name = "y";
  for (int r = 0; r < 15; ++r) {
    RawRow row;
    row.year = 2000 + r;
    row.features = {rng.uniform(3.0, 900.0), rng.uniform(-40.0, -5.0)};
    row.target = rng.uniform01();
    t.rows.push_back(row);
  }
  auto [ds, params] = min_max_normalize(t);
  for (int rep = 0; rep < 100; ++rep) {
    for (std::size_t j = 0; j < 2; ++j) {
      const double lo = params.features[j].min, hi = params.features[j].max;
      const double v = rng.uniform(lo, hi);
      const double back = params.denormalize(j, params.normalize(j, v));
      CHECK(back == doctest::Approx(v).epsilon(1e-9));
    }
  }
}

TEST_CASE("normalization errors") {
  TempCsv missing("year,f1,y\n2001,,1\n2002,2,2\n");
  CHECK(check_tag([&] { min_max_normalize(load_csv(missing.path.string())); }) ==
        "InvalidArgument");

  TempCsv constant("year,f1,y\n2001,7,1\n2002,7,2\n");
  CHECK(check_tag([&] { min_max_normalize(load_csv(constant.path.string())); }) ==
        "DegenerateFeature");
}

TEST_CASE("chronological split sizes") {
  auto make = [](std::size_t n) {
    Dataset ds;
    ds.feature_names = {"a"};
    ds.target_name = "y";
    ds.features = Matrix(n, 1);
    for (std::size_t r = 0; r < n; ++r) {
      ds.features(r, 0) = static_cast<double>(r) / n;
      ds.target.push_back(static_cast<double>(r));
      ds.years.push_back(2000 + static_cast<int>(r));
    }
    return ds;
  };

  auto [tr17, te17] = chronological_split(make(17), 0.8);
  CHECK(tr17.n() == 14);
  CHECK(te17.n() == 3);
  CHECK(tr17.years.front() == 2000);
  CHECK(tr17.years.back() == 2013);
  CHECK(te17.years.front() == 2014);

  auto [tr5, te5] = chronological_split(make(5), 0.8);
  CHECK(tr5.n() == 4);
  CHECK(te5.n() == 1);

  auto [tr10, te10] = chronological_split(make(10), 0.8);
  CHECK(tr10.n() == 8);

  // ceil(5 * 0.2) = 1 even with floating-point representation error.
  auto [tr52, te52] = chronological_split(make(5), 0.2);
  CHECK(tr52.n() == 1);

  CHECK(check_tag([&] { chronological_split(make(3), 0.99); }) == "EmptyPartition");
  CHECK(check_tag([&] { chronological_split(make(2), 0.5); }) == "TooFewRows");
  CHECK(check_tag([&] { chronological_split(make(5), 0.0); }) == "InvalidArgument");
  CHECK(check_tag([&] { chronological_split(make(5), 1.0); }) == "InvalidArgument");
}

TEST_CASE("summary stats match an independent implementation") {
  TempCsv csv(
      "year,f1,f2,y\n"
      "2001,1,5,0.50\n"
      "2002,2,6,0.90\n"
      "2003,3,4,1.22\n"
      "2004,4,8,1.90\n"
      "2005,10,2,1.10\n");
  auto [ds, params] = min_max_normalize(load_csv(csv.path.string()));
  const SummaryStats stats = summary_stats(ds);
  REQUIRE(stats.columns.size() == 3);
  CHECK(stats.columns[0].name == "f1");
  CHECK(stats.columns[2].name == "y");

  // Feature columns are described after scaling, the target in raw units.
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(stats.columns[j].min == 0.0);
    CHECK(stats.columns[j].max == 1.0);
  }
  std::vector<double> raw_target = {0.50, 0.90, 1.22, 1.90, 1.10};
  double mean = 0.0;
  for (double v : raw_target) mean += v;
  mean /= raw_target.size();
  CHECK(stats.columns[2].mean == doctest::Approx(mean).epsilon(1e-12));
  CHECK(stats.columns[2].min == 0.50);
  CHECK(stats.columns[2].max == 1.90);
  CHECK(stats.columns[2].skewness ==
        doctest::Approx(oracle_skewness(raw_target)).epsilon(1e-12));

  std::vector<double> f1_scaled;
  for (std::size_t r = 0; r < ds.n(); ++r) f1_scaled.push_back(ds.features(r, 0));
  CHECK(stats.columns[0].skewness ==
        doctest::Approx(oracle_skewness(f1_scaled)).epsilon(1e-12));
  double f1_mean = 0.0;
  for (double v : f1_scaled) f1_mean += v;
  f1_mean /= f1_scaled.size();
  double ss = 0.0;
  for (double v : f1_scaled) ss += (v - f1_mean) * (v - f1_mean);
  CHECK(stats.columns[0].std_dev ==
        doctest::Approx(std::sqrt(ss / (f1_scaled.size() - 1))).epsilon(1e-12));
}

TEST_CASE("summary stats degenerate columns report zero skewness") {
  Dataset ds;
  ds.feature_names = {"a"};
  ds.target_name = "y";
  ds.features = Matrix(4, 1);
  for (std::size_t r = 0; r < 4; ++r) {
    ds.features(r, 0) = static_cast<double>(r);
    ds.target.push_back(2.5);
    ds.years.push_back(2000 + static_cast<int>(r));
  }
  const SummaryStats stats = summary_stats(ds);
  CHECK(stats.columns[1].std_dev == 0.0);
  CHECK(stats.columns[1].skewness == 0.0);
}
