#include "netdiag/cart.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "netdiag/csv.hpp"
#include "netdiag/errors.hpp"
#include "netdiag/rng.hpp"

namespace netdiag {

namespace {

std::size_t argmax_lowest(std::span<const std::size_t> counts) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < counts.size(); ++i) {
    if (counts[i] > counts[best]) best = i;
  }
  return best;
}

std::vector<std::size_t> tally(std::span<const std::size_t> y,
                               std::span<const std::size_t> rows,
                               std::size_t n_classes) {
  std::vector<std::size_t> counts(n_classes, 0);
  for (const std::size_t r : rows) ++counts[y[r]];
  return counts;
}

}  // namespace

std::size_t TreeNode::total() const {
  return std::accumulate(class_counts.begin(), class_counts.end(),
                         std::size_t{0});
}

double gini(std::span<const std::size_t> class_counts) {
  std::size_t total = 0;
  for (const std::size_t c : class_counts) total += c;
  if (total == 0) fail(Errc::AllZero, "impurity of an empty count vector");
  double sum_sq = 0.0;
  for (const std::size_t c : class_counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

std::size_t default_depth(std::size_t n) {
  if (n < 2)
    fail(Errc::TooFewSamples,
         "depth rule needs at least 2 samples, got " + std::to_string(n));
  // floor(log2(n)) == bit_width(n) - 1, halved
  const std::size_t depth = (std::bit_width(n) - 1) / 2;
  return depth < 1 ? 1 : depth;
}

std::optional<SplitChoice> best_split(const FeatureMatrix& X,
                                      std::span<const std::size_t> y,
                                      std::span<const std::size_t> rows,
                                      std::size_t n_classes) {
  const std::size_t n = rows.size();
  if (n < 2) return std::nullopt;

  std::optional<SplitChoice> best;
  std::vector<std::pair<double, std::size_t>> order(n);  // (value, class)
  std::vector<std::size_t> left_counts(n_classes);
  std::vector<std::size_t> right_counts(n_classes);

  for (std::size_t a = 0; a < X.n_cols(); ++a) {
    for (std::size_t i = 0; i < n; ++i) {
      order[i] = {X.at(rows[i], a), y[rows[i]]};
    }
    std::sort(order.begin(), order.end(),
              [](const auto& lhs, const auto& rhs) {
                return lhs.first < rhs.first;
              });

    std::fill(left_counts.begin(), left_counts.end(), 0);
    std::fill(right_counts.begin(), right_counts.end(), 0);
    for (const auto& [value, cls] : order) ++right_counts[cls];

    for (std::size_t i = 0; i + 1 < n; ++i) {
      ++left_counts[order[i].second];
      --right_counts[order[i].second];
      const double a_val = order[i].first;
      const double b_val = order[i + 1].first;
      if (a_val == b_val) continue;
      const double t = a_val / 2 + b_val / 2;
      if (!(a_val <= t && t < b_val)) continue;  // rounding pushed t onto b

      const double n_left = static_cast<double>(i + 1);
      const double n_right = static_cast<double>(n - i - 1);
      const double weighted = (n_left * gini(left_counts) +
                               n_right * gini(right_counts)) /
                              static_cast<double>(n);
      if (!best || weighted < best->weighted_gini) {
        best = SplitChoice{a, t, weighted};
      }
    }
  }
  return best;
}

namespace {

struct TreeBuilder {
  const FeatureMatrix& X;
  std::span<const std::size_t> y;
  std::size_t n_classes;
  std::size_t max_depth;
  std::size_t min_leaf;

  std::unique_ptr<TreeNode> build(std::vector<std::size_t>& rows,
                                  std::size_t depth) {
    auto node = std::make_unique<TreeNode>();
    node->class_counts = tally(y, rows, n_classes);
    node->gini = gini(node->class_counts);
    node->predicted_class = argmax_lowest(node->class_counts);

    const bool pure = node->class_counts[node->predicted_class] == rows.size();
    if (depth >= max_depth || pure) return node;

    const auto split = best_split(X, y, rows, n_classes);
    if (!split) return node;

    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    for (const std::size_t r : rows) {
      if (X.at(r, split->attribute) <= split->threshold) {
        left_rows.push_back(r);
      } else {
        right_rows.push_back(r);
      }
    }
    if (left_rows.size() < min_leaf || right_rows.size() < min_leaf)
      return node;
    if (split->weighted_gini > node->gini + 1e-12)
      throw std::logic_error("split increased impurity");

    node->attribute = split->attribute;
    node->threshold = split->threshold;
    rows.clear();
    rows.shrink_to_fit();
    node->left = build(left_rows, depth + 1);
    node->right = build(right_rows, depth + 1);
    return node;
  }
};

}  // namespace

DecisionTree fit_tree(const FeatureMatrix& X,
                      const std::vector<std::size_t>& y,
                      const std::vector<std::string>& class_order,
                      const TreeParams& params,
                      std::span<const std::size_t> rows) {
  if (X.n_rows() != y.size())
    fail(Errc::ShapeMismatch,
         "matrix has " + std::to_string(X.n_rows()) + " rows but " +
             std::to_string(y.size()) + " labels");
  if (rows.empty()) fail(Errc::EmptyInput, "no rows to fit on");
  for (const std::size_t cls : y) {
    if (cls >= class_order.size())
      fail(Errc::UnknownLabel, "label index " + std::to_string(cls) +
                                   " outside the declared class order");
  }

  DecisionTree tree;
  tree.class_order = class_order;
  tree.feature_columns = X.columns;
  tree.max_depth = params.max_depth
                       ? *params.max_depth
                       : (rows.size() >= 2 ? default_depth(rows.size()) : 1);

  TreeBuilder builder{X, y, class_order.size(), tree.max_depth,
                      std::max<std::size_t>(params.min_leaf, 1)};
  std::vector<std::size_t> all(rows.begin(), rows.end());
  tree.root = builder.build(all, 0);
  return tree;
}

DecisionTree fit_tree(const FeatureMatrix& X,
                      const std::vector<std::size_t>& y,
                      const std::vector<std::string>& class_order,
                      const TreeParams& params) {
  std::vector<std::size_t> rows(X.n_rows());
  std::iota(rows.begin(), rows.end(), 0);
  return fit_tree(X, y, class_order, params, rows);
}

std::size_t DecisionTree::predict_row(std::span<const double> features) const {
  const TreeNode* node = root.get();
  while (!node->is_leaf()) {
    node = features[*node->attribute] <= node->threshold ? node->left.get()
                                                         : node->right.get();
  }
  return node->predicted_class;
}

std::size_t DecisionTree::predict(
    const std::map<std::string, double>& sample) const {
  std::vector<double> features;
  features.reserve(feature_columns.size());
  for (const auto& name : feature_columns) {
    const auto it = sample.find(name);
    if (it == sample.end())
      fail(Errc::MissingAttribute, "sample lacks feature '" + name + "'");
    features.push_back(it->second);
  }
  return predict_row(features);
}

namespace {

void collect_rules(const TreeNode* node, const DecisionTree& tree,
                   std::vector<RuleCondition>& path, RuleSet& out) {
  Rule rule;
  rule.node_index = out.rules.size();
  rule.conditions = path;
  rule.label = tree.class_order[node->predicted_class];
  rule.support = node->total();
  rule.probability = static_cast<double>(node->class_counts[node->predicted_class]) /
                     static_cast<double>(rule.support);
  rule.leaf = node->is_leaf();
  out.rules.push_back(std::move(rule));

  if (node->is_leaf()) return;
  const std::string& attribute = tree.feature_columns[*node->attribute];
  path.push_back({attribute, false, node->threshold});
  collect_rules(node->left.get(), tree, path, out);
  path.back().greater = true;
  collect_rules(node->right.get(), tree, path, out);
  path.pop_back();
}

}  // namespace

RuleSet extract_rules(const DecisionTree& tree) {
  RuleSet out;
  std::vector<RuleCondition> path;
  collect_rules(tree.root.get(), tree, path, out);
  return out;
}

std::string rule_text(const std::vector<RuleCondition>& conditions) {
  if (conditions.empty()) return "(always)";
  std::string text = "If ";
  for (std::size_t i = 0; i < conditions.size(); ++i) {
    if (i) text += " and ";
    text += conditions[i].attribute;
    text += conditions[i].greater ? " > " : " <= ";
    text += csv::format_double(conditions[i].threshold);
  }
  return text;
}

Metrics evaluate(std::span<const std::size_t> y_true,
                 std::span<const std::size_t> y_pred,
                 const std::vector<std::string>& class_order) {
  if (y_true.size() != y_pred.size())
    fail(Errc::LengthMismatch,
         "truth and prediction vectors differ in length");
  if (y_true.empty()) fail(Errc::EmptyInput, "nothing to evaluate");

  const std::size_t k = class_order.size();
  Metrics m;
  m.class_order = class_order;
  m.confusion.assign(k, std::vector<std::size_t>(k, 0));
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] >= k || y_pred[i] >= k)
      fail(Errc::UnknownLabel,
           "label index outside the declared class order at position " +
               std::to_string(i));
    ++m.confusion[y_true[i]][y_pred[i]];
  }

  std::size_t trace = 0;
  for (std::size_t c = 0; c < k; ++c) trace += m.confusion[c][c];
  m.accuracy = static_cast<double>(trace) / static_cast<double>(y_true.size());

  m.per_class.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t row_sum = 0;
    std::size_t col_sum = 0;
    for (std::size_t i = 0; i < k; ++i) {
      row_sum += m.confusion[c][i];
      col_sum += m.confusion[i][c];
    }
    const double hit = static_cast<double>(m.confusion[c][c]);
    ClassMetrics& cm = m.per_class[c];
    cm.precision = col_sum ? hit / static_cast<double>(col_sum) : 0.0;
    cm.recall = row_sum ? hit / static_cast<double>(row_sum) : 0.0;
    cm.f1 = (cm.precision + cm.recall) > 0.0
                ? 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall)
                : 0.0;
    m.macro.precision += cm.precision;
    m.macro.recall += cm.recall;
    m.macro.f1 += cm.f1;
  }
  m.macro.precision /= static_cast<double>(k);
  m.macro.recall /= static_cast<double>(k);
  m.macro.f1 /= static_cast<double>(k);
  return m;
}

std::vector<DepthScore> cross_validate(const FeatureMatrix& X,
                                       const std::vector<std::size_t>& y,
                                       const std::vector<std::size_t>& depths,
                                       std::size_t min_leaf, std::size_t folds,
                                       std::size_t repeats, std::uint64_t seed,
                                       std::size_t n_classes) {
  const std::size_t n = X.n_rows();
  if (folds < 2 || folds > n)
    fail(Errc::InvalidConfig,
         "fold count must lie in [2, sample count], got " +
             std::to_string(folds));
  if (repeats < 1) fail(Errc::InvalidConfig, "need at least one repeat");
  if (depths.empty()) fail(Errc::InvalidConfig, "no depths to sweep");

  // per depth, one pooled accuracy per repeat
  std::vector<std::vector<double>> accuracies(depths.size());

  std::vector<std::size_t> perm(n);
  for (std::size_t rep = 0; rep < repeats; ++rep) {
    Rng rng(Rng::mix(seed, rep));
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);

    // fold f covers perm[start..start+size); first n%folds folds get the
    // extra sample
    std::vector<std::size_t> fold_start(folds + 1, 0);
    for (std::size_t f = 0; f < folds; ++f) {
      fold_start[f + 1] =
          fold_start[f] + n / folds + (f < n % folds ? 1 : 0);
    }

    std::vector<std::vector<std::size_t>> train_sets(folds);
    std::vector<std::vector<std::size_t>> test_sets(folds);
    for (std::size_t f = 0; f < folds; ++f) {
      for (std::size_t i = 0; i < n; ++i) {
        const bool in_fold = i >= fold_start[f] && i < fold_start[f + 1];
        (in_fold ? test_sets[f] : train_sets[f]).push_back(perm[i]);
      }
      std::vector<bool> present(n_classes, false);
      for (const std::size_t r : train_sets[f]) present[y[r]] = true;
      for (std::size_t c = 0; c < n_classes; ++c) {
        if (!present[c])
          fail(Errc::InsufficientSamples,
               "class " + std::to_string(c) +
                   " absent from a training fold; use fewer folds or more "
                   "data");
      }
    }

    std::vector<std::string> classes(n_classes);
    for (std::size_t c = 0; c < n_classes; ++c) classes[c] = std::to_string(c);

    for (std::size_t d = 0; d < depths.size(); ++d) {
      std::size_t correct = 0;
      for (std::size_t f = 0; f < folds; ++f) {
        TreeParams params;
        params.max_depth = depths[d];
        params.min_leaf = min_leaf;
        const DecisionTree tree =
            fit_tree(X, y, classes, params, train_sets[f]);
        for (const std::size_t r : test_sets[f]) {
          if (tree.predict_row(X.row(r)) == y[r]) ++correct;
        }
      }
      accuracies[d].push_back(static_cast<double>(correct) /
                              static_cast<double>(n));
    }
  }

  constexpr double z95 = 1.959963984540054;
  std::vector<DepthScore> out;
  for (std::size_t d = 0; d < depths.size(); ++d) {
    const auto& samples = accuracies[d];
    const double m = static_cast<double>(samples.size());
    double mean = 0.0;
    for (const double a : samples) mean += a;
    mean /= m;
    double half = 0.0;
    if (samples.size() > 1) {
      double ss = 0.0;
      for (const double a : samples) ss += (a - mean) * (a - mean);
      const double sd = std::sqrt(ss / (m - 1.0));
      half = z95 * sd / std::sqrt(m);
    }
    out.push_back({depths[d], mean, mean - half, mean + half});
  }
  return out;
}

namespace {

nlohmann::ordered_json node_to_json(const TreeNode& node,
                                    const DecisionTree& tree) {
  nlohmann::ordered_json j;
  j["counts"] = node.class_counts;
  j["gini"] = node.gini;
  j["class"] = tree.class_order[node.predicted_class];
  if (!node.is_leaf()) {
    j["attribute"] = tree.feature_columns[*node.attribute];
    j["threshold"] = node.threshold;
    j["children"] = nlohmann::ordered_json::array(
        {node_to_json(*node.left, tree), node_to_json(*node.right, tree)});
  }
  return j;
}

std::unique_ptr<TreeNode> node_from_json(const nlohmann::json& j,
                                         const DecisionTree& tree) {
  auto node = std::make_unique<TreeNode>();
  node->class_counts = j.at("counts").get<std::vector<std::size_t>>();
  node->gini = j.at("gini").get<double>();
  const std::string cls = j.at("class").get<std::string>();
  const auto it = std::find(tree.class_order.begin(), tree.class_order.end(),
                            cls);
  if (it == tree.class_order.end())
    fail(Errc::UnknownLabel, "serialized node predicts unknown class '" + cls +
                                 "'");
  node->predicted_class =
      static_cast<std::size_t>(it - tree.class_order.begin());
  if (j.contains("attribute")) {
    const std::string attribute = j.at("attribute").get<std::string>();
    const auto col = std::find(tree.feature_columns.begin(),
                               tree.feature_columns.end(), attribute);
    if (col == tree.feature_columns.end())
      fail(Errc::UnknownAttribute,
           "serialized node splits on unknown attribute '" + attribute + "'");
    node->attribute =
        static_cast<std::size_t>(col - tree.feature_columns.begin());
    node->threshold = j.at("threshold").get<double>();
    node->left = node_from_json(j.at("children").at(0), tree);
    node->right = node_from_json(j.at("children").at(1), tree);
  }
  return node;
}

}  // namespace

std::string serialize_tree(const DecisionTree& tree) {
  nlohmann::ordered_json j;
  j["classes"] = tree.class_order;
  j["features"] = tree.feature_columns;
  j["max_depth"] = tree.max_depth;
  j["root"] = node_to_json(*tree.root, tree);
  return j.dump(2);
}

DecisionTree deserialize_tree(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  DecisionTree tree;
  tree.class_order = j.at("classes").get<std::vector<std::string>>();
  tree.feature_columns = j.at("features").get<std::vector<std::string>>();
  tree.max_depth = j.at("max_depth").get<std::size_t>();
  tree.root = node_from_json(j.at("root"), tree);
  return tree;
}

}  // namespace netdiag
