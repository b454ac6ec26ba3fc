#include "qrfsj/model_io.hpp"

#include <fstream>

#include <json.hpp>

#include "qrfsj/errors.hpp"

namespace qrfsj {

namespace {

constexpr int kFormatVersion = 1;

using ordered_json = nlohmann::ordered_json;

[[noreturn]] void bad_schema(const std::string& detail) {
  throw_validation("SchemaMismatch", "model document: " + detail);
}

ordered_json parse_document(const std::string& text, const char* what) {
  ordered_json doc = ordered_json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw_validation("SchemaMismatch", std::string(what) + " is not a valid JSON object");
  }
  return doc;
}

void check_version(const ordered_json& doc, const char* what) {
  if (!doc.contains("format_version") || !doc["format_version"].is_number_integer()) {
    throw_validation("SchemaMismatch", std::string(what) + " lacks a format_version field");
  }
  const auto version = doc["format_version"].get<int>();
  if (version != kFormatVersion) {
    throw_validation("UnsupportedModelVersion",
                     std::string(what) + " has format_version " + std::to_string(version) +
                         "; this build reads version " + std::to_string(kFormatVersion));
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw_io("IoError", "cannot open '" + path + "' for reading");
  }
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw_io("IoError", "failed while reading '" + path + "'");
  }
  return text;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw_io("IoError", "cannot open '" + path + "' for writing");
  }
  out << text;
  out.flush();
  if (!out) {
    throw_io("IoError", "failed while writing '" + path + "'");
  }
}

}  // namespace

std::string model_to_json(const Forest& forest) {
  ordered_json doc;
  doc["format_version"] = kFormatVersion;
  doc["config"] = {{"ntree", forest.config.ntree},
                   {"mtry", forest.config.mtry},
                   {"min_node_size", forest.config.min_node_size},
                   {"bootstrap", forest.config.bootstrap},
                   {"seed", forest.config.seed}};
  doc["feature_names"] = forest.feature_names;
  doc["train_targets"] = forest.train_targets;
  ordered_json trees = ordered_json::array();
  for (const Tree& tree : forest.trees) {
    ordered_json nodes = ordered_json::array();
    for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
      const TreeNode& node = tree.nodes[id];
      ordered_json j{{"id", id}, {"feature", node.feature}};
      if (node.is_leaf()) {
        j["indices"] = node.indices;
      } else {
        j["threshold"] = node.threshold;
        j["left"] = node.left;
        j["right"] = node.right;
      }
      nodes.push_back(std::move(j));
    }
    trees.push_back(ordered_json{{"tree_seed", tree.tree_seed}, {"nodes", std::move(nodes)}});
  }
  doc["trees"] = std::move(trees);
  return doc.dump(1);
}

Forest model_from_json(const std::string& text) {
  const ordered_json doc = parse_document(text, "model");
  check_version(doc, "model");
  Forest forest;
  try {
    const auto& cfg = doc.at("config");
    forest.config.ntree = cfg.at("ntree").get<std::size_t>();
    forest.config.mtry = cfg.at("mtry").get<std::size_t>();
    forest.config.min_node_size = cfg.at("min_node_size").get<std::size_t>();
    forest.config.bootstrap = cfg.at("bootstrap").get<bool>();
    forest.config.seed = cfg.at("seed").get<std::uint64_t>();
    forest.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    forest.train_targets = doc.at("train_targets").get<std::vector<double>>();
    for (const auto& jtree : doc.at("trees")) {
      Tree tree;
      tree.tree_seed = jtree.at("tree_seed").get<std::uint64_t>();
      for (const auto& jnode : jtree.at("nodes")) {
        TreeNode node;
        node.feature = jnode.at("feature").get<std::int32_t>();
        if (node.feature >= 0) {
          node.threshold = jnode.at("threshold").get<double>();
          node.left = jnode.at("left").get<std::uint32_t>();
          node.right = jnode.at("right").get<std::uint32_t>();
        } else {
          node.indices = jnode.at("indices").get<std::vector<std::uint32_t>>();
        }
        tree.nodes.push_back(std::move(node));
      }
      forest.trees.push_back(std::move(tree));
    }
  } catch (const nlohmann::json::exception& e) {
    bad_schema(e.what());
  }

  // Structural sanity so queries cannot walk out of bounds.
  if (forest.trees.empty()) bad_schema("no trees");
  if (forest.train_targets.empty()) bad_schema("no training targets");
  if (forest.feature_names.empty()) bad_schema("no feature names");
  const std::size_t n = forest.train_targets.size();
  const auto m = static_cast<std::int32_t>(forest.feature_names.size());
  for (const Tree& tree : forest.trees) {
    if (tree.nodes.empty()) bad_schema("tree without nodes");
    for (const TreeNode& node : tree.nodes) {
      if (node.is_leaf()) {
        if (node.indices.empty()) bad_schema("leaf without training indices");
        for (std::uint32_t idx : node.indices) {
          if (idx >= n) bad_schema("leaf index out of range");
        }
      } else {
        if (node.feature >= m) bad_schema("split feature out of range");
        if (node.left >= tree.nodes.size() || node.right >= tree.nodes.size()) {
          bad_schema("node child out of range");
        }
      }
    }
  }
  return forest;
}

void save_model(const Forest& forest, const std::string& path) {
  write_file(path, model_to_json(forest));
}

Forest load_model(const std::string& path) {
  return model_from_json(read_file(path));
}

void save_normalization(const StoredNormalization& norm, const std::string& path) {
  ordered_json features = ordered_json::array();
  for (std::size_t i = 0; i < norm.feature_names.size(); ++i) {
    features.push_back(ordered_json{{"name", norm.feature_names[i]},
                                    {"min", norm.params.features[i].min},
                                    {"max", norm.params.features[i].max}});
  }
  ordered_json doc;
  doc["format_version"] = kFormatVersion;
  doc["features"] = std::move(features);
  doc["target_name"] = norm.target_name;
  doc["target_min"] = norm.target_min;
  doc["target_max"] = norm.target_max;
  write_file(path, doc.dump(1));
}

StoredNormalization load_normalization(const std::string& path) {
  const ordered_json doc = parse_document(read_file(path), "normalization");
  check_version(doc, "normalization");
  StoredNormalization norm;
  try {
    for (const auto& jf : doc.at("features")) {
      norm.feature_names.push_back(jf.at("name").get<std::string>());
      norm.params.features.push_back(
          {jf.at("min").get<double>(), jf.at("max").get<double>()});
    }
    norm.target_name = doc.at("target_name").get<std::string>();
    norm.target_min = doc.at("target_min").get<double>();
    norm.target_max = doc.at("target_max").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw_validation("SchemaMismatch", std::string("normalization document: ") + e.what());
  }
  if (norm.feature_names.empty()) {
    throw_validation("SchemaMismatch", "normalization document lists no features");
  }
  return norm;
}

}  // namespace qrfsj
