#pragma once

// Axis-aligned decision trees learned by CART without any stopping
// criterion, so the tree represents its training data exactly (up to
// majority votes among identical feature vectors).

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "go123/dataset.hpp"

namespace go123 {

enum class Impurity { Gini, Entropy };

struct DtNode {
  bool leaf = true;
  // Inner: predicate `columns[var] > threshold`; false goes left.
  int var = -1;
  std::int64_t threshold = 0;
  int left = -1;
  int right = -1;
  // Leaf
  std::string label;
  std::map<std::string, std::size_t> support;
};

struct DecisionTree {
  std::vector<std::string> columns;
  std::vector<DtNode> nodes;  // nodes[0] is the root

  bool operator==(const DecisionTree&) const;
};

DecisionTree learn(const Dataset& d, Impurity impurity = Impurity::Gini);

// Impurity of a label histogram.
double gini(const std::map<std::string, std::size_t>& counts);
double entropy(const std::map<std::string, std::size_t>& counts);

// Maps the tree's columns onto positions of a state vector; extra state
// variables are ignored.
std::vector<int> bind_columns(const DecisionTree& t, const std::vector<std::string>& state_vars);

const std::string& predict(const DecisionTree& t, std::span<const std::int64_t> state, const std::vector<int>& binding);
const std::string& predict(const DecisionTree& t, const std::map<std::string, std::int64_t>& valuation);

std::size_t tree_size(const DecisionTree& t);
std::size_t tree_depth(const DecisionTree& t);
std::size_t leaf_count(const DecisionTree& t);

nlohmann::ordered_json serialize(const DecisionTree& t);
DecisionTree deserialize(const nlohmann::json& j);
std::string to_dot(const DecisionTree& t);

void save_tree(const DecisionTree& t, const std::string& path);
DecisionTree load_tree(const std::string& path);

}  // namespace go123
