#include "qrfsj/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "qrfsj/errors.hpp"
#include "qrfsj/rng.hpp"

namespace qrfsj {

namespace {

constexpr std::uint64_t kImportanceSalt = 0x8c6e1d2b90a3f47bULL;

struct TreeBuilder {
  const Dataset& data;
  const ForestConfig& config;
  Rng rng;
  std::vector<std::uint32_t> rows;  // drawn sample, partitioned in place
  std::vector<TreeNode> nodes;
  std::vector<std::pair<double, double>> scratch;  // (feature value, target)

  TreeBuilder(const Dataset& d, const ForestConfig& c, std::uint64_t seed)
      : data(d), config(c), rng(seed) {}

  Tree build(std::uint64_t tree_seed) {
    const std::size_t n = data.n();
    rows.resize(n);
    if (config.bootstrap) {
      for (std::size_t i = 0; i < n; ++i) {
        rows[i] = static_cast<std::uint32_t>(rng.bounded(n));
      }
      std::sort(rows.begin(), rows.end());
    } else {
      std::iota(rows.begin(), rows.end(), 0u);
    }
    nodes.clear();
    grow(0, n);
    Tree tree;
    tree.nodes = std::move(nodes);
    tree.tree_seed = tree_seed;
    return tree;
  }

  // Grows the subtree over rows[begin, end); returns its node id.
  std::uint32_t grow(std::size_t begin, std::size_t end) {
    const auto id = static_cast<std::uint32_t>(nodes.size());
    nodes.emplace_back();

    const std::size_t size = end - begin;
    bool constant_target = true;
    for (std::size_t i = begin + 1; i < end && constant_target; ++i) {
      constant_target = data.target[rows[i]] == data.target[rows[begin]];
    }
    if (size < 2 * config.min_node_size || constant_target) {
      make_leaf(id, begin, end);
      return id;
    }

    std::int32_t best_feature = -1;
    double best_threshold = 0.0;
    double best_sse = std::numeric_limits<double>::infinity();
    for (std::uint32_t f : draw_features()) {
      evaluate_feature(f, begin, end, best_feature, best_threshold, best_sse);
    }
    if (best_feature < 0) {  // all candidate features constant in this node
      make_leaf(id, begin, end);
      return id;
    }

    const auto mid = std::stable_partition(
        rows.begin() + static_cast<long>(begin), rows.begin() + static_cast<long>(end),
        [&](std::uint32_t r) {
          return data.features(r, static_cast<std::size_t>(best_feature)) <= best_threshold;
        });
    const std::size_t split = static_cast<std::size_t>(mid - rows.begin());

    nodes[id].feature = best_feature;
    nodes[id].threshold = best_threshold;
    const std::uint32_t left = grow(begin, split);
    nodes[id].left = left;
    const std::uint32_t right = grow(split, end);
    nodes[id].right = right;
    return id;
  }

  void make_leaf(std::uint32_t id, std::size_t begin, std::size_t end) {
    nodes[id].feature = -1;
    nodes[id].indices.assign(rows.begin() + static_cast<long>(begin),
                             rows.begin() + static_cast<long>(end));
  }

  // mtry distinct feature indices, evaluated in ascending order so that
  // equal-gain ties resolve to the lowest feature index.
  std::vector<std::uint32_t> draw_features() {
    const std::size_t m = data.num_features();
    std::vector<std::uint32_t> all(m);
    std::iota(all.begin(), all.end(), 0u);
    for (std::size_t i = 0; i < config.mtry; ++i) {
      std::swap(all[i], all[i + rng.bounded(m - i)]);
    }
    all.resize(config.mtry);
    std::sort(all.begin(), all.end());
    return all;
  }

  void evaluate_feature(std::uint32_t f, std::size_t begin, std::size_t end,
                        std::int32_t& best_feature, double& best_threshold, double& best_sse) {
    const std::size_t size = end - begin;
    scratch.clear();
    scratch.reserve(size);
    for (std::size_t i = begin; i < end; ++i) {
      scratch.emplace_back(data.features(rows[i], f), data.target[rows[i]]);
    }
    // Value-then-target order makes the prefix sums below independent of the
    // incoming row order, which keeps tree growth fully deterministic.
    std::sort(scratch.begin(), scratch.end());
    if (scratch.front().first == scratch.back().first) return;

    double total_sum = 0.0, total_ssq = 0.0;
    for (const auto& [v, y] : scratch) {
      total_sum += y;
      total_ssq += y * y;
    }
    double left_sum = 0.0, left_ssq = 0.0;
    for (std::size_t i = 0; i + 1 < size; ++i) {
      const double y = scratch[i].second;
      left_sum += y;
      left_ssq += y * y;
      const double lo = scratch[i].first;
      const double hi = scratch[i + 1].first;
      if (lo == hi) continue;
      const auto n_left = static_cast<double>(i + 1);
      const auto n_right = static_cast<double>(size - i - 1);
      const double right_sum = total_sum - left_sum;
      const double right_ssq = total_ssq - left_ssq;
      const double sse = (left_ssq - left_sum * left_sum / n_left) +
                         (right_ssq - right_sum * right_sum / n_right);
      if (sse < best_sse) {
        double threshold = lo + (hi - lo) / 2.0;
        if (!(threshold < hi)) threshold = lo;  // keep the right child nonempty
        best_sse = sse;
        best_feature = static_cast<std::int32_t>(f);
        best_threshold = threshold;
      }
    }
  }
};

Tree build_tree(const Dataset& train, const ForestConfig& config, std::size_t index) {
  const std::uint64_t tree_seed = substream_seed(config.seed, index);
  TreeBuilder builder(train, config, tree_seed);
  return builder.build(tree_seed);
}

}  // namespace

const TreeNode& Tree::leaf_for(std::span<const double> x) const {
  const TreeNode* node = &nodes[0];
  while (!node->is_leaf()) {
    const double v = x[static_cast<std::size_t>(node->feature)];
    node = &nodes[v <= node->threshold ? node->left : node->right];
  }
  return *node;
}

double Tree::predict(std::span<const double> x, std::span<const double> targets) const {
  const TreeNode& leaf = leaf_for(x);
  double sum = 0.0;
  for (std::uint32_t idx : leaf.indices) sum += targets[idx];
  return sum / static_cast<double>(leaf.indices.size());
}

Forest fit(const Dataset& train, ForestConfig config, unsigned n_threads) {
  const std::size_t n = train.n();
  const std::size_t m = train.num_features();
  if (n == 0) {
    throw_validation("InvalidArgument", "cannot fit a forest on an empty training set");
  }
  if (m == 0) {
    throw_validation("InvalidArgument", "training data has no feature columns");
  }
  if (config.mtry == 0) {
    config.mtry = std::max<std::size_t>(m / 3, 1);
  }
  if (config.mtry > m) {
    throw_validation("InvalidArgument", "mtry " + std::to_string(config.mtry) + " exceeds " +
                                            std::to_string(m) + " features");
  }
  if (config.ntree < 1 || config.min_node_size < 1) {
    throw_validation("InvalidArgument", "ntree and min_node_size must be at least 1");
  }

  Forest forest;
  forest.config = config;
  forest.feature_names = train.feature_names;
  forest.train_targets = train.target;
  forest.trees.resize(config.ntree);

  unsigned threads = n_threads ? n_threads : std::thread::hardware_concurrency();
  if (threads == 0) threads = 1;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, config.ntree));

  if (threads == 1) {
    for (std::size_t t = 0; t < config.ntree; ++t) {
      forest.trees[t] = build_tree(train, config, t);
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t t = next.fetch_add(1); t < config.ntree; t = next.fetch_add(1)) {
        forest.trees[t] = build_tree(train, config, t);
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return forest;
}

WeightVector tree_weights(const Tree& tree, std::span<const double> x, std::size_t n_train) {
  WeightVector w;
  w.weights.assign(n_train, 0.0);
  const TreeNode& leaf = tree.leaf_for(x);
  const double inv = 1.0 / static_cast<double>(leaf.indices.size());
  for (std::uint32_t idx : leaf.indices) w.weights[idx] += inv;
  return w;
}

WeightVector forest_weights(const Forest& forest, std::span<const double> x) {
  if (x.size() != forest.num_features()) {
    throw_validation("InvalidArgument", "query point has " + std::to_string(x.size()) +
                                            " coordinates, expected " +
                                            std::to_string(forest.num_features()));
  }
  WeightVector w;
  w.weights.assign(forest.num_train(), 0.0);
  for (const Tree& tree : forest.trees) {
    const TreeNode& leaf = tree.leaf_for(x);
    const double inv = 1.0 / static_cast<double>(leaf.indices.size());
    for (std::uint32_t idx : leaf.indices) w.weights[idx] += inv;
  }
  const auto k = static_cast<double>(forest.trees.size());
  for (double& v : w.weights) v /= k;
  return w;
}

double predict_mean(const Forest& forest, std::span<const double> x) {
  const WeightVector w = forest_weights(forest, x);
  double sum = 0.0;
  for (std::size_t i = 0; i < w.weights.size(); ++i) {
    sum += w.weights[i] * forest.train_targets[i];
  }
  return sum;
}

ImportanceReport permutation_importance(const Forest& forest, const Dataset& train) {
  const std::size_t n = forest.num_train();
  const std::size_t m = forest.num_features();
  if (train.n() != n || train.feature_names != forest.feature_names) {
    throw_validation("SchemaMismatch",
                     "training data does not match the data this forest was fitted on");
  }

  std::vector<double> ratio_sums(m, 0.0);
  std::size_t valid_trees = 0;
  bool any_oob = false;

  std::vector<char> inbag(n);
  std::vector<std::uint32_t> oob;
  std::vector<double> xbuf(m);
  for (std::size_t t = 0; t < forest.trees.size(); ++t) {
    const Tree& tree = forest.trees[t];
    std::fill(inbag.begin(), inbag.end(), 0);
    for (const TreeNode& node : tree.nodes) {
      for (std::uint32_t idx : node.indices) inbag[idx] = 1;
    }
    oob.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (!inbag[i]) oob.push_back(static_cast<std::uint32_t>(i));
    }
    if (oob.empty()) continue;
    any_oob = true;

    double mse_oob = 0.0;
    for (std::uint32_t i : oob) {
      const double err = train.target[i] - tree.predict(train.features.row(i), forest.train_targets);
      mse_oob += err * err;
    }
    mse_oob /= static_cast<double>(oob.size());
    if (mse_oob == 0.0) continue;  // no reference error to measure an increase against
    ++valid_trees;

    for (std::size_t j = 0; j < m; ++j) {
      std::vector<double> permuted(oob.size());
      for (std::size_t p = 0; p < oob.size(); ++p) permuted[p] = train.features(oob[p], j);
      Rng rng(substream_seed(substream_seed(forest.config.seed ^ kImportanceSalt, t), j));
      rng.shuffle(permuted);

      double mse_perm = 0.0;
      for (std::size_t p = 0; p < oob.size(); ++p) {
        const auto row = train.features.row(oob[p]);
        std::copy(row.begin(), row.end(), xbuf.begin());
        xbuf[j] = permuted[p];
        const double err = train.target[oob[p]] - tree.predict(xbuf, forest.train_targets);
        mse_perm += err * err;
      }
      mse_perm /= static_cast<double>(oob.size());
      ratio_sums[j] += (mse_perm - mse_oob) / mse_oob;
    }
  }

  if (!any_oob) {
    throw_validation("NoOobSamples",
                     "no tree has out-of-bag rows; fit with bootstrap to measure importance");
  }

  ImportanceReport report;
  report.features.resize(m);
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0u);
  for (std::size_t j = 0; j < m; ++j) {
    report.features[j].name = forest.feature_names[j];
    report.features[j].pct_inc_mse =
        valid_trees ? ratio_sums[j] / static_cast<double>(valid_trees) : 0.0;
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double va = report.features[a].pct_inc_mse;
    const double vb = report.features[b].pct_inc_mse;
    return va != vb ? va > vb : a < b;
  });
  for (std::size_t r = 0; r < m; ++r) {
    report.features[order[r]].rank = r + 1;
  }
  return report;
}

std::vector<std::pair<double, double>> partial_dependence(const Forest& forest,
                                                          const Dataset& data,
                                                          std::size_t feature,
                                                          std::span<const double> grid) {
  if (grid.empty()) {
    throw_validation("InvalidArgument", "partial dependence needs a nonempty grid");
  }
  if (feature >= forest.num_features() || data.num_features() != forest.num_features()) {
    throw_validation("InvalidArgument", "feature index out of range for this forest");
  }
  std::vector<std::pair<double, double>> curve;
  curve.reserve(grid.size());
  std::vector<double> xbuf(data.num_features());
  for (double g : grid) {
    double sum = 0.0;
    for (std::size_t r = 0; r < data.n(); ++r) {
      const auto row = data.features.row(r);
      std::copy(row.begin(), row.end(), xbuf.begin());
      xbuf[feature] = g;
      sum += predict_mean(forest, xbuf);
    }
    curve.emplace_back(g, sum / static_cast<double>(data.n()));
  }
  return curve;
}

Matrix partial_dependence_2d(const Forest& forest, const Dataset& data, std::size_t feature_a,
                             std::size_t feature_b, std::span<const double> grid_a,
                             std::span<const double> grid_b) {
  if (grid_a.empty() || grid_b.empty()) {
    throw_validation("InvalidArgument", "partial dependence needs nonempty grids");
  }
  Matrix result(grid_a.size(), grid_b.size());
  Dataset pinned = data;
  for (std::size_t i = 0; i < grid_a.size(); ++i) {
    for (std::size_t r = 0; r < pinned.n(); ++r) {
      pinned.features(r, feature_a) = grid_a[i];
    }
    const auto row = partial_dependence(forest, pinned, feature_b, grid_b);
    for (std::size_t j = 0; j < grid_b.size(); ++j) {
      result(i, j) = row[j].second;
    }
  }
  return result;
}

std::vector<double> default_grid(const Dataset& data, std::size_t feature, std::size_t count) {
  if (count < 1 || feature >= data.num_features() || data.n() == 0) {
    throw_validation("InvalidArgument", "default_grid needs a valid feature and count >= 1");
  }
  double lo = data.features(0, feature);
  double hi = lo;
  for (std::size_t r = 0; r < data.n(); ++r) {
    lo = std::min(lo, data.features(r, feature));
    hi = std::max(hi, data.features(r, feature));
  }
  std::vector<double> grid(count);
  if (count == 1) {
    grid[0] = lo;
    return grid;
  }
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t k = 0; k < count; ++k) {
    grid[k] = std::min(lo + step * static_cast<double>(k), hi);
  }
  grid.back() = hi;
  return grid;
}

}  // namespace qrfsj
