#include "netdiag/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "netdiag/errors.hpp"
#include "netdiag/rng.hpp"

namespace netdiag {

namespace {

template <typename F>
auto run_step(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), std::string(name) + ": " + e.message());
  }
}

FeatureMatrix keep_rows(const FeatureMatrix& X, const std::vector<bool>& mask) {
  FeatureMatrix out;
  out.columns = X.columns;
  for (std::size_t r = 0; r < X.n_rows(); ++r) {
    if (!mask[r]) continue;
    out.row_ids.push_back(X.row_ids[r]);
    const auto row = X.row(r);
    out.values.insert(out.values.end(), row.begin(), row.end());
  }
  return out;
}

std::size_t subtree_size(const TreeNode* node) {
  if (node->is_leaf()) return 1;
  return 1 + subtree_size(node->left.get()) + subtree_size(node->right.get());
}

std::vector<std::string> kpi_classes() {
  const auto& order = kpi_class_order();
  return {order.begin(), order.end()};
}

}  // namespace

const char* flag_name(FlagState flag) {
  switch (flag) {
    case FlagState::Ok: return "ok";
    case FlagState::Problem: return "problem";
    case FlagState::Unscored: return "unscored";
  }
  return "?";
}

std::string composite_name(std::size_t composite,
                           const std::vector<CauseFamily>& families) {
  const std::size_t c = families.size();
  std::string name;
  for (std::size_t f = 0; f < c; ++f) {
    if (composite & (std::size_t{1} << (c - 1 - f))) {
      if (!name.empty()) name += "+";
      name += families[f].name;
    }
  }
  return name.empty() ? "none" : name;
}

std::vector<AnomalyRecord> detect_anomalies(
    const std::vector<RowId>& ids, const std::vector<std::size_t>& y_true,
    const std::vector<std::size_t>& y_pred) {
  if (ids.size() != y_true.size() || y_true.size() != y_pred.size())
    fail(Errc::LengthMismatch, "ids, truth, and predictions must align");
  std::vector<AnomalyRecord> out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (y_true[i] == y_pred[i]) continue;
    AnomalyRecord rec;
    rec.row_id = ids[i];
    rec.true_label = y_true[i];
    rec.predicted_label = y_pred[i];
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<AnomalyRecord> detect_anomalies(
    const DecisionTree& tree, const FeatureMatrix& X,
    const std::vector<std::size_t>& labels) {
  if (tree.feature_columns != X.columns)
    fail(Errc::ColumnMismatch,
         "tree was fitted on different feature columns than supplied");
  if (labels.size() != X.n_rows())
    fail(Errc::LengthMismatch, "one label per matrix row required");
  std::vector<std::size_t> y_pred(X.n_rows());
  for (std::size_t r = 0; r < X.n_rows(); ++r) {
    y_pred[r] = tree.predict_row(X.row(r));
  }
  return detect_anomalies(X.row_ids, labels, y_pred);
}

std::vector<FamilyClustering> cluster_anomalies(
    std::vector<AnomalyRecord>& anomalies, const Dataset& ds,
    const PipelineConfig& config) {
  const auto& families = config.families;
  const std::size_t c = families.size();

  std::vector<RowId> ids;
  ids.reserve(anomalies.size());
  std::unordered_map<RowId, std::size_t> position;
  for (std::size_t i = 0; i < anomalies.size(); ++i) {
    ids.push_back(anomalies[i].row_id);
    position.emplace(anomalies[i].row_id, i);
    anomalies[i].flags.assign(c, FlagState::Unscored);
    anomalies[i].composite.reset();
  }
  const Dataset sub = subset(ds, ids);

  std::vector<FamilyClustering> out;
  for (std::size_t f = 0; f < c; ++f) {
    const CauseFamily& family = families[f];
    const AttributeGroup* group = ds.schema.find_group(family.group);
    if (!group)
      fail(Errc::UnknownGroup,
           "family '" + family.name + "' names missing group '" +
               family.group + "'");

    FeatureSelection fsel;
    try {
      fsel = select_columns(sub, group->columns);
    } catch (const Error& e) {
      if (e.code() != Errc::AllRowsDropped) throw;
    }
    const std::size_t scored = fsel.matrix.n_rows();
    if (scored < 2 * c)
      fail(Errc::TooFewAnomalies,
           "family '" + family.name + "' has " + std::to_string(scored) +
               " scorable anomalies, needs at least " + std::to_string(2 * c));

    KMeansParams params = config.kmeans;
    params.seed = Rng::mix(config.seed, 1000 + f);

    FamilyClustering fc;
    fc.family = family.name;
    fc.scored_rows = fsel.matrix.row_ids;
    fc.orientation.severity_attribute = family.severity_attribute;
    fc.orientation.direction = family.direction;

    std::size_t k = 2;
    if (config.k) {
      k = *config.k;
    } else {
      const std::size_t upper = std::min(config.k_max, scored - 1);
      k = select_k(fsel.matrix, config.k_min, upper, params);
    }
    if (scored < k)
      fail(Errc::TooFewAnomalies,
           "family '" + family.name + "' has fewer scorable anomalies than " +
               std::to_string(k) + " clusters");

    fc.model = fit_kmeans(fsel.matrix, k, params);
    if (scored >= 3) {
      fc.silhouette_score =
          silhouette(standardize(fsel.matrix).first, fc.model.assignments);
    }

    if (k != 2) {
      fc.gated = true;
    } else {
      fc.orientation = orient(fc.model, fsel.matrix,
                              family.severity_attribute, family.direction);
      if (fc.orientation.ambiguous) fc.gated = true;
    }
    if (fc.silhouette_score < config.min_silhouette) fc.gated = true;

    for (std::size_t r = 0; r < scored; ++r) {
      const std::size_t i = position.at(fsel.matrix.row_ids[r]);
      const bool problem =
          !fc.gated &&
          fc.model.assignments[r] == fc.orientation.problem_cluster;
      anomalies[i].flags[f] = problem ? FlagState::Problem : FlagState::Ok;
    }
    out.push_back(std::move(fc));
  }

  for (auto& rec : anomalies) {
    bool complete = true;
    std::size_t composite = 0;
    for (std::size_t f = 0; f < c; ++f) {
      if (rec.flags[f] == FlagState::Unscored) {
        complete = false;
        break;
      }
      if (rec.flags[f] == FlagState::Problem) {
        composite |= std::size_t{1} << (c - 1 - f);
      }
    }
    if (complete) rec.composite = composite;
  }
  return out;
}

namespace {

std::vector<std::string> union_columns(const Dataset& ds,
                                       const std::vector<CauseFamily>& families) {
  std::vector<std::string> columns;
  for (const auto& family : families) {
    const AttributeGroup* group = ds.schema.find_group(family.group);
    if (!group)
      fail(Errc::UnknownGroup,
           "family '" + family.name + "' names missing group '" +
               family.group + "'");
    for (const auto& column : group->columns) {
      if (std::find(columns.begin(), columns.end(), column) == columns.end()) {
        columns.push_back(column);
      }
    }
  }
  return columns;
}

struct CauseTraining {
  FeatureMatrix X;
  std::vector<std::size_t> y;             // index into class_composites
  std::vector<std::size_t> class_composites;  // ascending composite values
  std::vector<std::string> class_names;
  std::vector<std::size_t> anomaly_index;  // into the anomalies vector
};

CauseTraining cause_training_set(const std::vector<AnomalyRecord>& anomalies,
                                 const Dataset& ds,
                                 const std::vector<CauseFamily>& families) {
  CauseTraining t;
  std::vector<RowId> ids;
  std::vector<std::size_t> composites;
  for (std::size_t i = 0; i < anomalies.size(); ++i) {
    if (!anomalies[i].composite) continue;
    ids.push_back(anomalies[i].row_id);
    composites.push_back(*anomalies[i].composite);
    t.anomaly_index.push_back(i);
  }
  if (ids.empty())
    fail(Errc::SingleClass, "no fully scored anomalies to train on");

  t.class_composites = composites;
  std::sort(t.class_composites.begin(), t.class_composites.end());
  t.class_composites.erase(
      std::unique(t.class_composites.begin(), t.class_composites.end()),
      t.class_composites.end());
  if (t.class_composites.size() < 2)
    fail(Errc::SingleClass,
         "all anomalies share composite class '" +
             composite_name(t.class_composites[0], families) + "'");

  for (const std::size_t comp : t.class_composites) {
    t.class_names.push_back(composite_name(comp, families));
  }
  for (const std::size_t comp : composites) {
    const auto it = std::lower_bound(t.class_composites.begin(),
                                     t.class_composites.end(), comp);
    t.y.push_back(
        static_cast<std::size_t>(it - t.class_composites.begin()));
  }

  const FeatureSelection fsel =
      select_columns(subset(ds, ids), union_columns(ds, families));
  if (!fsel.dropped_rows.empty())
    fail(Errc::ShapeMismatch,
         "fully scored anomalies unexpectedly missing union features");
  t.X = fsel.matrix;
  return t;
}

}  // namespace

DecisionTree fit_cause_tree(const std::vector<AnomalyRecord>& anomalies,
                            const Dataset& ds, const PipelineConfig& config) {
  const CauseTraining t = cause_training_set(anomalies, ds, config.families);
  TreeParams params;
  params.max_depth = config.max_depth ? *config.max_depth
                                      : default_depth(t.X.n_rows());
  params.min_leaf = config.min_leaf;
  return fit_tree(t.X, t.y, t.class_names, params);
}

Diagnosis diagnose(const DecisionTree& cause_tree,
                   const std::vector<CauseFamily>& families,
                   std::span<const double> features,
                   std::size_t min_support) {
  if (features.size() != cause_tree.feature_columns.size())
    fail(Errc::MissingAttribute,
         "expected " + std::to_string(cause_tree.feature_columns.size()) +
             " feature values, got " + std::to_string(features.size()));

  Diagnosis d;
  std::size_t rule_id = 0;
  const TreeNode* node = cause_tree.root.get();
  while (!node->is_leaf()) {
    const bool left = features[*node->attribute] <= node->threshold;
    d.path.push_back({cause_tree.feature_columns[*node->attribute], !left,
                      node->threshold});
    if (left) {
      rule_id += 1;
      node = node->left.get();
    } else {
      rule_id += 1 + subtree_size(node->left.get());
      node = node->right.get();
    }
  }
  d.rule_id = rule_id;
  d.support = node->total();
  d.probability =
      static_cast<double>(node->class_counts[node->predicted_class]) /
      static_cast<double>(d.support);

  const std::string& cls = cause_tree.class_order[node->predicted_class];
  const std::size_t n_composites = std::size_t{1} << families.size();
  d.composite = 0;
  for (std::size_t comp = 0; comp < n_composites; ++comp) {
    if (composite_name(comp, families) == cls) {
      d.composite = comp;
      break;
    }
  }

  if (d.support < min_support) {
    d.kind = DiagnosisKind::UnknownLowSupport;
  } else if (d.composite == 0) {
    d.kind = DiagnosisKind::FailureToIdentify;
  } else {
    d.kind = DiagnosisKind::Cause;
  }
  return d;
}

LabeledSlice prepare_labeled_slice(const Dataset& ds,
                                   const PipelineConfig& config) {
  LabeledSlice slice;
  slice.filtered =
      run_step("filter", [&] { return filter(ds, config.filters); });
  const Dataset& filtered = slice.filtered;

  FeatureSelection sel = run_step(
      "features", [&] { return select_features(filtered, config.kpi_group); });
  slice.feature_dropped = std::move(sel.dropped_rows);

  // KPI values aligned with the feature rows; missing-KPI rows drop out
  const auto* kpi = filtered.numeric_column(filtered.schema.kpi_column);
  if (!kpi)
    fail(Errc::MissingColumn,
         "dataset lacks KPI column '" + filtered.schema.kpi_column + "'");
  std::unordered_map<RowId, std::size_t> filtered_pos;
  for (std::size_t r = 0; r < filtered.n_rows(); ++r) {
    filtered_pos.emplace(filtered.row_ids[r], r);
  }
  std::vector<bool> has_kpi(sel.matrix.n_rows());
  std::vector<RowId> kpi_dropped;
  for (std::size_t r = 0; r < sel.matrix.n_rows(); ++r) {
    const double value = (*kpi)[filtered_pos.at(sel.matrix.row_ids[r])];
    has_kpi[r] = !std::isnan(value);
    if (has_kpi[r]) {
      slice.kpi_values.push_back(value);
    } else {
      kpi_dropped.push_back(sel.matrix.row_ids[r]);
    }
  }
  slice.X = keep_rows(sel.matrix, has_kpi);

  slice.labeling = run_step("labeling", [&] {
    return label_values(slice.X.row_ids, slice.kpi_values, config.low_q,
                        config.high_q);
  });
  slice.labeling.dropped_rows = std::move(kpi_dropped);

  slice.y.reserve(slice.labeling.labels.size());
  for (const KpiLabel label : slice.labeling.labels) {
    slice.y.push_back(static_cast<std::size_t>(label));
  }
  return slice;
}

Report run_pipeline(const Dataset& ds, const PipelineConfig& config) {
  if (config.families.empty())
    fail(Errc::InvalidConfig, "at least one cause family is required");
  if (config.holdout &&
      !(config.holdout_fraction > 0.0 && config.holdout_fraction < 1.0))
    fail(Errc::InvalidConfig, "holdout fraction must lie in (0, 1)");

  Report rep;
  rep.config = config;
  rep.input_rows = ds.n_rows();
  rep.parse_warnings = ds.parse_warnings;

  LabeledSlice slice = prepare_labeled_slice(ds, config);
  const Dataset& filtered = slice.filtered;
  const FeatureMatrix& X = slice.X;
  const std::vector<double>& kpi_values = slice.kpi_values;
  const std::vector<std::size_t>& y = slice.y;
  rep.filtered_rows = filtered.n_rows();
  rep.feature_dropped_rows = slice.feature_dropped;
  rep.labeling = slice.labeling;

  const std::size_t n = X.n_rows();
  TreeParams tree_params;
  tree_params.max_depth =
      config.max_depth ? *config.max_depth
                       : (n >= 2 ? default_depth(n) : std::size_t{1});
  tree_params.min_leaf = config.min_leaf;

  rep.kpi_tree = run_step(
      "kpi_tree", [&] { return fit_tree(X, y, kpi_classes(), tree_params); });
  rep.kpi_rules = extract_rules(rep.kpi_tree);

  std::vector<std::size_t> y_pred(n);
  for (std::size_t r = 0; r < n; ++r) {
    y_pred[r] = rep.kpi_tree.predict_row(X.row(r));
  }
  rep.kpi_metrics = run_step(
      "metrics", [&] { return evaluate(y, y_pred, kpi_classes()); });

  if (config.holdout) {
    rep.holdout_metrics = run_step("holdout", [&] {
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      Rng rng(Rng::mix(config.seed, 1));
      rng.shuffle(perm);
      std::size_t n_test =
          static_cast<std::size_t>(config.holdout_fraction *
                                   static_cast<double>(n));
      n_test = std::min(std::max<std::size_t>(n_test, 1), n - 1);
      const std::vector<std::size_t> train(perm.begin() + n_test, perm.end());
      const DecisionTree holdout_tree =
          fit_tree(X, y, kpi_classes(), tree_params, train);
      std::vector<std::size_t> t_true;
      std::vector<std::size_t> t_pred;
      for (std::size_t i = 0; i < n_test; ++i) {
        t_true.push_back(y[perm[i]]);
        t_pred.push_back(holdout_tree.predict_row(X.row(perm[i])));
      }
      return evaluate(t_true, t_pred, kpi_classes());
    });
  }

  rep.anomalies = run_step(
      "anomalies", [&] { return detect_anomalies(X.row_ids, y, y_pred); });

  const std::size_t c = config.families.size();
  rep.composite_counts.assign(std::size_t{1} << c, 0);
  rep.diagnosed_counts.assign(std::size_t{1} << c, 0);
  rep.diagnoses.assign(rep.anomalies.size(), std::nullopt);

  if (!rep.anomalies.empty()) {
    rep.clusterings = run_step("clustering", [&] {
      return cluster_anomalies(rep.anomalies, filtered, config);
    });
    for (const auto& rec : rep.anomalies) {
      if (rec.composite) {
        ++rep.composite_counts[*rec.composite];
      } else {
        ++rep.unscored_anomalies;
      }
    }

    try {
      rep.cause_tree = run_step("cause_tree", [&] {
        return fit_cause_tree(rep.anomalies, filtered, config);
      });
    } catch (const Error& e) {
      if (e.code() != Errc::SingleClass) throw;
      // one composite class: nothing for a tree to separate, diagnoses fall
      // back to the clustered classes below
    }

    if (rep.cause_tree) {
      rep.cause_rules = extract_rules(*rep.cause_tree);
      const CauseTraining t =
          cause_training_set(rep.anomalies, filtered, config.families);
      std::vector<std::size_t> comp_pred;
      comp_pred.reserve(t.X.n_rows());
      for (std::size_t r = 0; r < t.X.n_rows(); ++r) {
        const Diagnosis d = diagnose(*rep.cause_tree, config.families,
                                     t.X.row(r), config.min_support);
        comp_pred.push_back(d.composite);
        rep.diagnoses[t.anomaly_index[r]] = d;
        if (d.kind == DiagnosisKind::UnknownLowSupport) {
          ++rep.unknown_low_support;
        } else {
          ++rep.diagnosed_counts[d.composite];
        }
      }
      std::vector<std::size_t> comp_true;
      std::vector<std::size_t> pred_class;
      comp_true.reserve(t.y.size());
      pred_class.reserve(t.y.size());
      for (std::size_t i = 0; i < t.y.size(); ++i) {
        comp_true.push_back(t.y[i]);
        const auto it = std::lower_bound(t.class_composites.begin(),
                                         t.class_composites.end(),
                                         comp_pred[i]);
        pred_class.push_back(
            static_cast<std::size_t>(it - t.class_composites.begin()));
      }
      rep.cause_metrics = run_step("cause_metrics", [&] {
        return evaluate(comp_true, pred_class, t.class_names);
      });
    } else {
      for (std::size_t i = 0; i < rep.anomalies.size(); ++i) {
        const auto& rec = rep.anomalies[i];
        if (!rec.composite) continue;
        Diagnosis d;
        d.composite = *rec.composite;
        d.kind = d.composite == 0 ? DiagnosisKind::FailureToIdentify
                                  : DiagnosisKind::Cause;
        d.probability = 1.0;
        d.support = rep.composite_counts[d.composite];
        rep.diagnoses[i] = d;
        ++rep.diagnosed_counts[d.composite];
      }
    }
  }

  // scatter along the KPI tree's root attribute (first feature column when
  // the root is a leaf)
  const std::size_t x_col =
      rep.kpi_tree.root->is_leaf() ? 0 : *rep.kpi_tree.root->attribute;
  rep.scatter.x_attribute = X.columns[x_col];
  rep.scatter.kpi_attribute = ds.schema.kpi_column;
  std::unordered_map<RowId, bool> anomalous;
  for (const auto& rec : rep.anomalies) anomalous.emplace(rec.row_id, true);
  rep.scatter.points.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    rep.scatter.points.push_back({X.row_ids[r], X.at(r, x_col), kpi_values[r],
                                  anomalous.count(X.row_ids[r]) > 0});
  }
  return rep;
}

}  // namespace netdiag
