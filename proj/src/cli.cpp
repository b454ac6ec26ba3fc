#include "qrfsj/cli.hpp"

#include <algorithm>
#include <clocale>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "qrfsj/dataset.hpp"
#include "qrfsj/errors.hpp"
#include "qrfsj/kde.hpp"
#include "qrfsj/metrics.hpp"
#include "qrfsj/model_io.hpp"
#include "qrfsj/qrf.hpp"

namespace fs = std::filesystem;

namespace qrfsj {

namespace {

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw_io("IoError", "cannot open '" + path.string() + "' for writing");
  }
  out << text;
  out.flush();
  if (!out) {
    throw_io("IoError", "failed while writing '" + path.string() + "'");
  }
}

fs::path ensure_dir(const std::string& dir) {
  fs::path path(dir);
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec) {
    throw_io("IoError", "cannot create output directory '" + dir + "': " + ec.message());
  }
  return path;
}

std::string sanitize(const std::string& name) {
  std::string out;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_';
    out.push_back(ok ? c : '_');
  }
  return out;
}

// Imputed rows in their original units; the files a later forecast/evaluate/
// explain call can consume directly.
std::string rows_to_csv(const RawTable& table, std::size_t begin, std::size_t end) {
  std::string out = "year";
  for (const std::string& name : table.feature_names) out += "," + name;
  out += "," + table.target_name + "\n";
  for (std::size_t r = begin; r < end; ++r) {
    out += std::to_string(table.rows[r].year);
    for (const auto& cell : table.rows[r].features) out += "," + fmt("%.10g", *cell);
    out += "," + fmt("%.10g", *table.rows[r].target) + "\n";
  }
  return out;
}

std::string stats_to_csv(const SummaryStats& stats) {
  std::string out = "column,mean,std,min,max,skewness\n";
  for (const ColumnStats& c : stats.columns) {
    out += c.name + "," + fmt("%.4f", c.mean) + "," + fmt("%.4f", c.std_dev) + "," +
           fmt("%.4f", c.min) + "," + fmt("%.4f", c.max) + "," + fmt("%.4f", c.skewness) + "\n";
  }
  return out;
}

std::string stats_to_text(const SummaryStats& stats) {
  std::string out = "Column            Mean       Std       Min       Max  Skewness\n";
  for (const ColumnStats& c : stats.columns) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-12s%10.4f%10.4f%10.4f%10.4f%10.4f\n", c.name.c_str(),
                  c.mean, c.std_dev, c.min, c.max, c.skewness);
    out += buf;
  }
  return out;
}

StoredNormalization load_sibling_normalization(const std::string& model_path,
                                               const std::string& explicit_path) {
  if (!explicit_path.empty()) return load_normalization(explicit_path);
  const fs::path sibling = fs::path(model_path).parent_path() / "normalization.json";
  return load_normalization(sibling.string());
}

void check_model_matches(const Forest& forest, const StoredNormalization& norm) {
  if (norm.feature_names != forest.feature_names) {
    throw_validation("SchemaMismatch",
                     "normalization file does not describe this model's features");
  }
}

std::string expected_columns(const StoredNormalization& norm, bool with_target) {
  std::string out = "year";
  for (const std::string& name : norm.feature_names) out += "," + name;
  if (with_target) out += "," + norm.target_name;
  return out;
}

// Query rows: year + features, optionally followed by the target column.
struct QueryData {
  std::vector<int> years;
  Matrix features;  // normalized with the training parameters
  std::vector<std::optional<double>> observed;
  bool has_target = false;
};

QueryData load_query(const std::string& path, const StoredNormalization& norm,
                     bool require_target) {
  const CsvTable csv = read_csv(path);
  const std::size_t m = norm.feature_names.size();

  bool has_target = false;
  if (csv.header.size() == m + 2 && csv.header.back() == norm.target_name) {
    has_target = true;
  } else if (csv.header.size() != m + 1) {
    throw_validation("SchemaMismatch", "'" + path + "' columns do not match the model; expected " +
                                           expected_columns(norm, true) + " (target optional)");
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (csv.header[j + 1] != norm.feature_names[j]) {
      throw_validation("SchemaMismatch", "'" + path + "' column " + std::to_string(j + 2) +
                                             " is '" + csv.header[j + 1] + "', expected '" +
                                             norm.feature_names[j] + "'");
    }
  }
  if (require_target && !has_target) {
    throw_validation("SchemaMismatch",
                     "'" + path + "' lacks the target column '" + norm.target_name + "'");
  }
  if (csv.years.empty()) {
    throw_validation("TooFewRows", "'" + path + "' has no data rows");
  }

  QueryData q;
  q.has_target = has_target;
  q.years = csv.years;
  q.features = Matrix(csv.years.size(), m);
  q.observed.resize(csv.years.size());
  for (std::size_t r = 0; r < csv.years.size(); ++r) {
    for (std::size_t j = 0; j < m; ++j) {
      const auto& cell = csv.cells[r][j];
      if (!cell) {
        throw_validation("MalformedCsv", "year " + std::to_string(csv.years[r]) +
                                             ": missing value for feature '" +
                                             norm.feature_names[j] + "'");
      }
      q.features(r, j) = norm.params.normalize(j, *cell);
    }
    if (has_target) {
      q.observed[r] = csv.cells[r][m];
      if (require_target && !q.observed[r]) {
        throw_validation("MalformedCsv", "year " + std::to_string(csv.years[r]) +
                                             ": missing value for target '" + norm.target_name +
                                             "'");
      }
    }
  }
  return q;
}

void check_positive(int value, const char* name) {
  if (value < 1) {
    throw_validation("InvalidArgument", std::string(name) + " must be at least 1");
  }
}

int cmd_train(const RunConfig& config) {
  check_positive(config.knn_k, "knn_k");
  const RawTable raw = load_csv(config.input_csv);
  const RawTable imputed = knn_impute(raw, static_cast<std::size_t>(config.knn_k));
  auto [ds, params] = min_max_normalize(imputed);
  auto [train, test] = chronological_split(ds, config.train_fraction);
  const SummaryStats stats = summary_stats(ds);

  ForestConfig forest_config = config.forest;
  const Forest forest = fit(train, forest_config);

  double target_min = ds.target[0], target_max = ds.target[0];
  for (double y : ds.target) {
    target_min = std::min(target_min, y);
    target_max = std::max(target_max, y);
  }
  StoredNormalization norm{ds.feature_names, params, ds.target_name, target_min, target_max};

  const fs::path dir = ensure_dir(config.output_dir);
  save_model(forest, (dir / "model.json").string());
  save_normalization(norm, (dir / "normalization.json").string());
  write_text(dir / "summary_stats.csv", stats_to_csv(stats));
  write_text(dir / "train_rows.csv", rows_to_csv(imputed, 0, train.n()));
  write_text(dir / "test_rows.csv", rows_to_csv(imputed, train.n(), ds.n()));

  std::printf("trained %zu trees (mtry=%zu, min_node_size=%zu, bootstrap=%s, seed=%llu) on %zu rows (years %d-%d)\n",
              forest.config.ntree, forest.config.mtry, forest.config.min_node_size,
              forest.config.bootstrap ? "on" : "off",
              static_cast<unsigned long long>(forest.config.seed), train.n(), train.years.front(),
              train.years.back());
  std::printf("test partition: %zu rows (years %d-%d)\n", test.n(), test.years.front(),
              test.years.back());
  std::printf("wrote model.json, normalization.json, summary_stats.csv, train_rows.csv, test_rows.csv\n");
  return kExitOk;
}

int cmd_stats(const std::string& input_csv, int knn_k, const std::string& output_dir) {
  check_positive(knn_k, "knn_k");
  const RawTable raw = load_csv(input_csv);
  const RawTable imputed = knn_impute(raw, static_cast<std::size_t>(knn_k));
  auto [ds, params] = min_max_normalize(imputed);
  (void)params;
  const SummaryStats stats = summary_stats(ds);
  const fs::path dir = ensure_dir(output_dir);
  write_text(dir / "summary_stats.csv", stats_to_csv(stats));
  std::fputs(stats_to_text(stats).c_str(), stdout);
  std::printf("wrote summary_stats.csv\n");
  return kExitOk;
}

int cmd_forecast(const std::string& model_path, const std::string& input_csv,
                 const std::string& normalization_path, double level, bool emit_density,
                 int tau_grid_size, int grid_points, const std::string& output_dir) {
  check_positive(tau_grid_size, "tau_grid_size");
  check_positive(grid_points, "grid_points");
  const Forest forest = load_model(model_path);
  const StoredNormalization norm = load_sibling_normalization(model_path, normalization_path);
  check_model_matches(forest, norm);
  const QueryData q = load_query(input_csv, norm, false);
  const fs::path dir = ensure_dir(output_dir);

  std::string csv = "year,lower,observed,predicted,upper\n";
  for (std::size_t r = 0; r < q.years.size(); ++r) {
    const ConditionalCDF cdf = conditional_cdf(forest, q.features.row(r));
    const double median = quantile(cdf, 0.5);
    const PredictionInterval pi = interval_from_cdf(cdf, level);
    csv += std::to_string(q.years[r]) + "," + fmt("%.4f", pi.lower) + ",";
    if (q.observed[r]) csv += fmt("%.4f", *q.observed[r]);
    csv += "," + fmt("%.4f", median) + "," + fmt("%.4f", pi.upper) + "\n";
  }
  write_text(dir / "forecast.csv", csv);
  std::printf("wrote forecast.csv (%zu rows)\n", q.years.size());

  if (emit_density) {
    const std::vector<double> taus = default_tau_grid(static_cast<std::size_t>(tau_grid_size));
    for (std::size_t r = 0; r < q.years.size(); ++r) {
      try {
        const DensityCurve curve =
            density_forecast(forest, q.features.row(r), taus, static_cast<std::size_t>(grid_points));
        std::string body = "# bandwidth=" + fmt("%.10g", curve.bandwidth.value) +
                           " method=" + to_string(curve.bandwidth.method) +
                           " samples=" + std::to_string(curve.sample_count) + "\n";
        body += "y,density\n";
        for (std::size_t k = 0; k < curve.grid.size(); ++k) {
          body += fmt("%.10g", curve.grid[k]) + "," + fmt("%.10g", curve.density[k]) + "\n";
        }
        const std::string name = "density_" + std::to_string(q.years[r]) + ".csv";
        write_text(dir / name, body);
        std::printf("wrote %s\n", name.c_str());
      } catch (const Error& e) {
        if (e.tag() != "DegenerateSample") throw;
        const double point = predict_median(forest, q.features.row(r));
        std::printf("year %d: degenerate density (all forecast mass at %s); no curve written\n",
                    q.years[r], fmt("%.4f", point).c_str());
      }
    }
  }
  return kExitOk;
}

int cmd_evaluate(const std::string& model_path, const std::string& input_csv,
                 const std::string& normalization_path, double level,
                 const std::string& output_dir) {
  const Forest forest = load_model(model_path);
  const StoredNormalization norm = load_sibling_normalization(model_path, normalization_path);
  check_model_matches(forest, norm);
  const QueryData q = load_query(input_csv, norm, true);

  std::vector<double> observed, predicted;
  std::vector<PredictionInterval> intervals;
  observed.reserve(q.years.size());
  for (std::size_t r = 0; r < q.years.size(); ++r) {
    const ConditionalCDF cdf = conditional_cdf(forest, q.features.row(r));
    observed.push_back(*q.observed[r]);
    predicted.push_back(quantile(cdf, 0.5));
    intervals.push_back(interval_from_cdf(cdf, level));
  }

  EvaluationReport report;
  report.rmse = rmse(observed, predicted);
  report.mape = mape(observed, predicted);
  report.r_squared = r_squared(observed, predicted);
  report.bias = bias(observed, predicted);
  report.picp = picp(observed, intervals);
  report.pinaw = pinaw(intervals, norm.target_max - norm.target_min);
  report.confidence_level = level;

  const fs::path dir = ensure_dir(output_dir);
  write_text(dir / "evaluation.txt", report.to_table());
  write_text(dir / "evaluation.kv", report.to_key_values());
  std::fputs(report.to_table().c_str(), stdout);
  std::printf("wrote evaluation.txt, evaluation.kv\n");
  return kExitOk;
}

int cmd_explain(const std::string& model_path, const std::string& input_csv,
                const std::string& normalization_path, int top_k,
                const std::string& output_dir) {
  if (top_k < 1) {
    throw_validation("InvalidArgument", "top_k must be at least 1");
  }
  const Forest forest = load_model(model_path);
  if (!forest.config.bootstrap) {
    throw_validation("NoOobSamples",
                     "model was trained without bootstrap; no out-of-bag rows exist");
  }
  const StoredNormalization norm = load_sibling_normalization(model_path, normalization_path);
  check_model_matches(forest, norm);

  const RawTable table = load_csv(input_csv);
  if (table.feature_names != forest.feature_names) {
    throw_validation("SchemaMismatch", "'" + input_csv + "' columns do not match the model");
  }
  if (!table.complete()) {
    throw_validation("MalformedCsv", "explain input must have no missing cells");
  }
  if (table.rows.size() != forest.num_train()) {
    throw_validation("SchemaMismatch",
                     "explain needs the model's training rows: model was fitted on " +
                         std::to_string(forest.num_train()) + " rows, file has " +
                         std::to_string(table.rows.size()));
  }

  Dataset train;
  train.feature_names = table.feature_names;
  train.target_name = table.target_name;
  train.features = Matrix(table.rows.size(), table.num_features());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t j = 0; j < table.num_features(); ++j) {
      train.features(r, j) = norm.params.normalize(j, *table.rows[r].features[j]);
    }
    train.target.push_back(*table.rows[r].target);
    train.years.push_back(table.rows[r].year);
    if (std::abs(train.target[r] - forest.train_targets[r]) > 1e-9) {
      throw_validation("SchemaMismatch", "year " + std::to_string(train.years[r]) +
                                             ": target differs from the stored training target; "
                                             "pass the train_rows.csv written at training time");
    }
  }

  const ImportanceReport report = permutation_importance(forest, train);
  const fs::path dir = ensure_dir(output_dir);

  std::string csv = "feature,rank,pct_inc_mse\n";
  for (const FeatureImportance& f : report.features) {
    csv += f.name + "," + std::to_string(f.rank) + "," + fmt("%.4f", f.pct_inc_mse) + "\n";
  }
  write_text(dir / "importance.csv", csv);

  std::printf("Feature       Rank   %%IncMSE\n");
  for (const FeatureImportance& f : report.features) {
    std::printf("%-12s%6zu%10.4f\n", f.name.c_str(), f.rank, f.pct_inc_mse);
  }
  std::printf("wrote importance.csv\n");

  const std::size_t m = forest.num_features();
  std::vector<std::size_t> by_rank(m);
  for (std::size_t j = 0; j < m; ++j) by_rank[report.features[j].rank - 1] = j;

  const auto k = std::min<std::size_t>(static_cast<std::size_t>(top_k), m);
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t j = by_rank[r];
    const std::vector<double> grid = default_grid(train, j, 25);
    const auto curve = partial_dependence(forest, train, j, grid);
    std::string body = train.feature_names[j] + ",prediction\n";
    for (const auto& [g, mean] : curve) {
      body += fmt("%.10g", norm.params.denormalize(j, g)) + "," + fmt("%.10g", mean) + "\n";
    }
    const std::string name = "pdp_" + sanitize(train.feature_names[j]) + ".csv";
    write_text(dir / name, body);
    std::printf("wrote %s\n", name.c_str());
  }

  if (m >= 2) {
    const std::size_t a = by_rank[0], b = by_rank[1];
    const std::vector<double> grid_a = default_grid(train, a, 25);
    const std::vector<double> grid_b = default_grid(train, b, 25);
    const Matrix surface = partial_dependence_2d(forest, train, a, b, grid_a, grid_b);
    std::string body = train.feature_names[a] + "," + train.feature_names[b] + ",prediction\n";
    for (std::size_t i = 0; i < grid_a.size(); ++i) {
      for (std::size_t j2 = 0; j2 < grid_b.size(); ++j2) {
        body += fmt("%.10g", norm.params.denormalize(a, grid_a[i])) + "," +
                fmt("%.10g", norm.params.denormalize(b, grid_b[j2])) + "," +
                fmt("%.10g", surface(i, j2)) + "\n";
      }
    }
    const std::string name = "pdp2d_" + sanitize(train.feature_names[a]) + "_" +
                             sanitize(train.feature_names[b]) + ".csv";
    write_text(dir / name, body);
    std::printf("wrote %s\n", name.c_str());
  }
  return kExitOk;
}

// CLI11 only feeds config files to options of the app that owns the config
// option, so a flat key=value file can never reach per-subcommand flags
// through set_config. Expand the file by hand instead: every key the active
// subcommand understands and that was not given on the command line becomes a
// --key=value token. Keys for other subcommands are skipped so one file can
// serve a whole pipeline; explicit flags always win.
void expand_config_args(const CLI::App& app, std::vector<std::string>& args) {
  if (args.empty()) return;
  const CLI::App* sub = app.get_subcommand_no_throw(args[0]);
  if (sub == nullptr) return;

  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    }
  }
  if (path.empty()) return;

  std::ifstream in(path);
  if (!in) throw_io("IoError", "cannot read config file '" + path + "'");

  auto trim = [](const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return std::string();
    return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
  };

  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const auto eq = text.find('=');
    const std::string key = eq == std::string::npos ? std::string() : trim(text.substr(0, eq));
    if (key.empty()) {
      throw_validation("InvalidArgument", "config file " + path + " line " +
                                              std::to_string(lineno) +
                                              ": expected key=value, got '" + text + "'");
    }
    const std::string value = trim(text.substr(eq + 1));
    bool replaced = false;  // last duplicate wins, like repeated flags would
    for (auto& entry : entries) {
      if (entry.first == key) {
        entry.second = value;
        replaced = true;
      }
    }
    if (!replaced) entries.emplace_back(key, value);
  }

  for (const auto& [key, value] : entries) {
    const std::string flag = "--" + key;
    if (key == "config" || sub->get_option_no_throw(flag) == nullptr) continue;
    const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (!given) args.push_back(flag + "=" + value);
  }
}

int report_error(const Error& e) {
  std::fprintf(stderr, "error: %s: %s\n", e.tag().c_str(), e.what());
  switch (e.kind()) {
    case ErrorKind::Io: return kExitIo;
    case ErrorKind::Validation: return kExitValidation;
    case ErrorKind::Numeric: return kExitNumeric;
  }
  return 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  std::setlocale(LC_ALL, "C");

  CLI::App app{"Quantile-forest yield forecasting: point, interval, and density forecasts"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string model_path, normalization_path;
  bool emit_density = false;
  int grid_points = 512;
  int top_k = 3;

  auto add_output_dir = [](CLI::App* cmd, std::string& target) {
    cmd->add_option("--output_dir", target, "Directory for result files (default .)")
        ->envname("QRFSJ_OUTPUT_DIR")
        ->capture_default_str();
  };
  auto add_input = [](CLI::App* cmd, std::string& target, const char* what) {
    cmd->add_option("--input_csv", target, what)->required();
  };
  auto add_model = [&](CLI::App* cmd) {
    cmd->add_option("--model", model_path, "Path to a model.json written by train")->required();
    cmd->add_option("--normalization", normalization_path,
                    "Normalization file (default: normalization.json next to the model)");
  };
  auto add_level = [&](CLI::App* cmd) {
    cmd->add_option("--confidence_level", cfg.confidence_level,
                    "Nominal prediction-interval level in (0,1)")
        ->capture_default_str();
  };

  std::string config_path;
  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path,
                    "Flat key=value config file (# comments allowed); explicit flags win");
  };

  CLI::App* train = app.add_subcommand("train", "Fit a forest and write model + reports");
  add_config(train);
  add_input(train, cfg.input_csv, "Training CSV: year, features..., target");
  train->add_option("--train_fraction", cfg.train_fraction, "Chronological train share in (0,1)")
      ->capture_default_str();
  train->add_option("--knn_k", cfg.knn_k, "Neighbors for missing-value imputation")
      ->capture_default_str();
  train->add_option("--ntree", cfg.forest.ntree, "Number of trees")->capture_default_str();
  train->add_option("--mtry", cfg.forest.mtry,
                    "Candidate features per split (0 = max(floor(M/3),1))")
      ->capture_default_str();
  train->add_option("--min_node_size", cfg.forest.min_node_size, "Minimal node size")
      ->capture_default_str();
  train->add_option("--bootstrap", cfg.forest.bootstrap,
                    "Draw a bootstrap sample per tree (true/false)")
      ->capture_default_str();
  train->add_option("--seed", cfg.forest.seed, "Random seed")->capture_default_str();
  add_output_dir(train, cfg.output_dir);

  std::string fc_input, ev_input, ex_input, st_input;
  CLI::App* forecast =
      app.add_subcommand("forecast", "Median + interval (and density) forecasts for query rows");
  add_config(forecast);
  add_model(forecast);
  add_input(forecast, fc_input, "Query CSV: year, features... (target column optional)");
  add_level(forecast);
  forecast->add_flag("--emit_density", emit_density, "Write density_<year>.csv per query row");
  forecast->add_option("--tau_grid_size", cfg.tau_grid_size,
                       "Quantile levels feeding the density forecast")
      ->capture_default_str();
  forecast->add_option("--grid_points", grid_points, "Points on each density output grid")
      ->capture_default_str();
  add_output_dir(forecast, cfg.output_dir);

  CLI::App* evaluate = app.add_subcommand("evaluate", "Score forecasts against observed targets");
  add_config(evaluate);
  add_model(evaluate);
  add_input(evaluate, ev_input, "Test CSV: year, features..., target");
  add_level(evaluate);
  add_output_dir(evaluate, cfg.output_dir);

  CLI::App* explain =
      app.add_subcommand("explain", "Permutation importance and partial-dependence grids");
  add_config(explain);
  add_model(explain);
  add_input(explain, ex_input, "The train_rows.csv written at training time");
  explain->add_option("--top_k", top_k, "Features to emit 1-D dependence grids for")
      ->capture_default_str();
  add_output_dir(explain, cfg.output_dir);

  CLI::App* stats = app.add_subcommand("stats", "Summary statistics report for a dataset");
  add_config(stats);
  add_input(stats, st_input, "CSV: year, features..., target");
  stats->add_option("--knn_k", cfg.knn_k, "Neighbors for missing-value imputation")
      ->capture_default_str();
  add_output_dir(stats, cfg.output_dir);

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    expand_config_args(app, args);
  } catch (const Error& e) {
    return report_error(e);
  }

  try {
    std::reverse(args.begin(), args.end());  // parse(vector) consumes back to front
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (app.got_subcommand(train)) return cmd_train(cfg);
    if (app.got_subcommand(forecast)) {
      return cmd_forecast(model_path, fc_input, normalization_path, cfg.confidence_level,
                          emit_density, cfg.tau_grid_size, grid_points, cfg.output_dir);
    }
    if (app.got_subcommand(evaluate)) {
      return cmd_evaluate(model_path, ev_input, normalization_path, cfg.confidence_level,
                          cfg.output_dir);
    }
    if (app.got_subcommand(explain)) {
      return cmd_explain(model_path, ex_input, normalization_path, top_k, cfg.output_dir);
    }
    if (app.got_subcommand(stats)) return cmd_stats(st_input, cfg.knn_k, cfg.output_dir);
  } catch (const Error& e) {
    return report_error(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: Internal: %s\n", e.what());
    return 1;
  }
  return kExitOk;
}

}  // namespace qrfsj
