#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "netdiag/dataset.hpp"

namespace netdiag {

struct TreeNode {
  // set only on internal nodes; rows with value <= threshold go left
  std::optional<std::size_t> attribute;
  double threshold = 0.0;
  double gini = 0.0;
  std::vector<std::size_t> class_counts;  // canonical class order
  std::size_t predicted_class = 0;        // argmax, lowest index on ties
  std::unique_ptr<TreeNode> left;
  std::unique_ptr<TreeNode> right;

  bool is_leaf() const { return !attribute.has_value(); }
  std::size_t total() const;
};

struct DecisionTree {
  std::unique_ptr<TreeNode> root;
  std::vector<std::string> class_order;
  std::vector<std::string> feature_columns;
  std::size_t max_depth = 0;

  // features ordered as feature_columns
  std::size_t predict_row(std::span<const double> features) const;
  // by-name lookup; throws MissingAttribute
  std::size_t predict(const std::map<std::string, double>& sample) const;
};

struct RuleCondition {
  std::string attribute;
  bool greater = false;  // false: <=, true: >
  double threshold = 0.0;
};

struct Rule {
  std::size_t node_index = 0;  // preorder position, stable rule id
  std::vector<RuleCondition> conditions;
  std::string label;
  double probability = 0.0;  // majority count / node total
  std::size_t support = 0;
  bool leaf = false;
};

struct RuleSet {
  std::vector<Rule> rules;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct Metrics {
  std::vector<std::string> class_order;
  std::vector<std::vector<std::size_t>> confusion;  // rows = truth
  double accuracy = 0.0;
  std::vector<ClassMetrics> per_class;
  ClassMetrics macro;
};

struct TreeParams {
  std::optional<std::size_t> max_depth;  // absent: default_depth(n)
  std::size_t min_leaf = 5;
};

struct SplitChoice {
  std::size_t attribute = 0;
  double threshold = 0.0;
  double weighted_gini = 0.0;
};

struct DepthScore {
  std::size_t depth = 0;
  double mean_accuracy = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

// 1 - sum((count/total)^2), summed in class order. Throws AllZero.
double gini(std::span<const std::size_t> class_counts);

// max(1, floor(log2(n) / 2)); throws TooFewSamples for n < 2.
std::size_t default_depth(std::size_t n);

// Scans every attribute and every midpoint between consecutive distinct
// sorted values; candidate threshold t = a/2 + b/2, discarded if floating
// rounding pushes it outside [a, b). Keeps the strictly lowest weighted
// child Gini; ties resolve to the lowest attribute index, then lowest
// threshold. Absent when no attribute has two distinct values.
std::optional<SplitChoice> best_split(const FeatureMatrix& X,
                                      std::span<const std::size_t> y,
                                      std::span<const std::size_t> rows,
                                      std::size_t n_classes);

// Greedy growth; stops at max_depth, pure nodes, absent splits, or when the
// chosen split would leave a child below min_leaf.
DecisionTree fit_tree(const FeatureMatrix& X,
                      const std::vector<std::size_t>& y,
                      const std::vector<std::string>& class_order,
                      const TreeParams& params);

// Same, restricted to a row subset (cross-validation folds).
DecisionTree fit_tree(const FeatureMatrix& X,
                      const std::vector<std::size_t>& y,
                      const std::vector<std::string>& class_order,
                      const TreeParams& params,
                      std::span<const std::size_t> rows);

// One rule per node, preorder; condition chain is the path from the root.
RuleSet extract_rules(const DecisionTree& tree);

// "If a <= x and b > y"; the empty chain renders as "(always)".
std::string rule_text(const std::vector<RuleCondition>& conditions);

Metrics evaluate(std::span<const std::size_t> y_true,
                 std::span<const std::size_t> y_pred,
                 const std::vector<std::string>& class_order);

// Repeated shuffled k-fold sweep over candidate depths. Fold assignment is
// shared across depths within a repeat; the interval is a 95% normal
// approximation over per-repeat accuracies.
std::vector<DepthScore> cross_validate(const FeatureMatrix& X,
                                       const std::vector<std::size_t>& y,
                                       const std::vector<std::size_t>& depths,
                                       std::size_t min_leaf, std::size_t folds,
                                       std::size_t repeats, std::uint64_t seed,
                                       std::size_t n_classes);

// JSON with stable field names (attribute, threshold, gini, counts, class,
// children); reload re-predicts bit-identically.
std::string serialize_tree(const DecisionTree& tree);
DecisionTree deserialize_tree(const std::string& text);

}  // namespace netdiag
