#pragma once

#include <string>

#include "qrfsj/dataset.hpp"
#include "qrfsj/forest.hpp"

namespace qrfsj {

// Versioned JSON model document: format_version, config, feature_names,
// train_targets, and per-tree pre-order node lists with explicit ids.
// Loading rejects unknown format_version.
std::string model_to_json(const Forest& forest);
Forest model_from_json(const std::string& text);
void save_model(const Forest& forest, const std::string& path);
Forest load_model(const std::string& path);

// Normalization parameters plus the full-dataset target range, persisted next
// to the model so query rows can be scaled the way training rows were.
struct StoredNormalization {
  std::vector<std::string> feature_names;
  NormalizationParams params;
  std::string target_name;
  double target_min = 0.0;
  double target_max = 0.0;
};

void save_normalization(const StoredNormalization& norm, const std::string& path);
StoredNormalization load_normalization(const std::string& path);

}  // namespace qrfsj
