#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qrfsj/dataset.hpp"
#include "qrfsj/matrix.hpp"

namespace qrfsj {

struct ForestConfig {
  std::size_t ntree = 500;
  std::size_t mtry = 0;  // 0 resolves to max(floor(M/3), 1) at fit time
  std::size_t min_node_size = 5;
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

// Flat binary-tree node. feature < 0 marks a leaf; split nodes send
// x[feature] <= threshold to the left child.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  std::vector<std::uint32_t> indices;  // leaf only: drawn training rows, multiplicity kept

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // pre-order, nodes[0] is the root
  std::uint64_t tree_seed = 0;

  const TreeNode& leaf_for(std::span<const double> x) const;
  // Leaf mean of the given targets (Eq.-style single-tree prediction).
  double predict(std::span<const double> x, std::span<const double> targets) const;
};

// Trained ensemble. Leaves retain the training rows they contain, which is
// what allows conditional-distribution queries downstream.
struct Forest {
  std::vector<Tree> trees;
  std::vector<double> train_targets;
  ForestConfig config;  // mtry resolved
  std::vector<std::string> feature_names;

  std::size_t num_features() const { return feature_names.size(); }
  std::size_t num_train() const { return train_targets.size(); }
};

// Per-training-observation weights; non-negative and summing to 1.
struct WeightVector {
  std::vector<double> weights;
};

struct FeatureImportance {
  std::string name;
  std::size_t rank = 0;  // 1 = most important
  double pct_inc_mse = 0.0;
};

// One entry per feature, in feature order; ranks form a permutation of 1..M.
struct ImportanceReport {
  std::vector<FeatureImportance> features;
};

// Grows `config.ntree` trees on `train`. Each tree is built on a bootstrap
// sample (or on all rows when bootstrap is off) with `mtry` candidate features
// per split; the best split minimizes the summed child SSE. Trees may be built
// in parallel; per-tree seeding makes the result independent of scheduling.
// n_threads = 0 picks the hardware concurrency.
Forest fit(const Dataset& train, ForestConfig config, unsigned n_threads = 0);

// Weight 1/|leaf(x)| on every drawn training row in the leaf x falls into.
WeightVector tree_weights(const Tree& tree, std::span<const double> x, std::size_t n_train);

// Arithmetic mean of the per-tree weight vectors.
WeightVector forest_weights(const Forest& forest, std::span<const double> x);

// Dot product of forest_weights(x) with the stored training targets.
double predict_mean(const Forest& forest, std::span<const double> x);

// Out-of-bag permutation importance: mean over trees of the relative OOB MSE
// increase when a feature's out-of-bag values are shuffled.
ImportanceReport permutation_importance(const Forest& forest, const Dataset& train);

// Mean prediction over `data` with feature `j` overwritten by each grid value.
std::vector<std::pair<double, double>> partial_dependence(const Forest& forest,
                                                          const Dataset& data,
                                                          std::size_t feature,
                                                          std::span<const double> grid);

// Joint grid version; entry (i, j) fixes feature_a = grid_a[i] and
// feature_b = grid_b[j] in every row.
Matrix partial_dependence_2d(const Forest& forest, const Dataset& data, std::size_t feature_a,
                             std::size_t feature_b, std::span<const double> grid_a,
                             std::span<const double> grid_b);

// `count` equally spaced points between the observed min and max of a column.
std::vector<double> default_grid(const Dataset& data, std::size_t feature,
                                 std::size_t count = 25);

}  // namespace qrfsj
