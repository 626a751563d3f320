#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "netdiag/cart.hpp"
#include "netdiag/dataset.hpp"
#include "netdiag/kmeans.hpp"
#include "netdiag/labeling.hpp"

namespace netdiag {

// A hypothesized cause: one attribute group plus the severity attribute that
// names which cluster is the problem one.
struct CauseFamily {
  std::string name;
  std::string group;
  std::string severity_attribute;
  Direction direction = Direction::HigherIsWorse;
};

enum class FlagState { Ok, Problem, Unscored };

const char* flag_name(FlagState flag);

struct AnomalyRecord {
  RowId row_id = 0;
  std::size_t true_label = 0;       // KPI class index
  std::size_t predicted_label = 0;  // differs from true_label by construction
  std::vector<FlagState> flags;     // per family, declared order
  // bit per family, first family highest bit; absent when any flag is
  // Unscored
  std::optional<std::size_t> composite;
};

enum class DiagnosisKind { Cause, FailureToIdentify, UnknownLowSupport };

struct Diagnosis {
  DiagnosisKind kind = DiagnosisKind::FailureToIdentify;
  std::size_t composite = 0;  // predicted composite class
  std::vector<RuleCondition> path;
  double probability = 0.0;
  std::size_t support = 0;
  std::optional<std::size_t> rule_id;  // preorder node index in the cause tree
};

struct FamilyClustering {
  std::string family;
  ClusterModel model;
  CauseOrientation orientation;
  double silhouette_score = 0.0;  // 0 when fewer than 3 scored rows
  // family yielded no problem flags: separability below the configured
  // floor, auto-selected k was not 2, or the orientation was ambiguous
  bool gated = false;
  std::vector<RowId> scored_rows;
};

struct PipelineConfig {
  double low_q = 10.0;
  double high_q = 90.0;
  std::string kpi_group = "rtt";
  std::optional<std::size_t> max_depth;  // absent: depth rule on sample count
  std::size_t min_leaf = 5;
  std::size_t min_support = 5;
  KMeansParams kmeans;                // seed field is superseded by `seed`
  std::optional<std::size_t> k = 2;   // absent: silhouette sweep per family
  std::size_t k_min = 2;
  std::size_t k_max = 5;
  double min_silhouette = 0.3;
  std::vector<CauseFamily> families;
  std::vector<Predicate> filters;
  std::uint64_t seed = 1;
  bool holdout = false;
  double holdout_fraction = 0.2;
};

struct ScatterPoint {
  RowId row_id = 0;
  double x = 0.0;
  double kpi = 0.0;
  bool anomalous = false;
};

struct ScatterData {
  std::string x_attribute;
  std::string kpi_attribute;
  std::vector<ScatterPoint> points;
};

struct Report {
  PipelineConfig config;
  std::size_t input_rows = 0;     // before filtering
  std::size_t filtered_rows = 0;  // after filtering
  std::size_t parse_warnings = 0;
  std::vector<RowId> feature_dropped_rows;  // incomplete KPI-group features
  Labeling labeling;

  DecisionTree kpi_tree;
  RuleSet kpi_rules;
  Metrics kpi_metrics;  // training data
  std::optional<Metrics> holdout_metrics;

  std::vector<AnomalyRecord> anomalies;
  std::vector<FamilyClustering> clusterings;

  std::optional<DecisionTree> cause_tree;
  RuleSet cause_rules;
  std::optional<Metrics> cause_metrics;
  std::vector<std::optional<Diagnosis>> diagnoses;  // parallel to anomalies

  std::vector<std::size_t> composite_counts;  // from clustering, size 2^c
  std::vector<std::size_t> diagnosed_counts;  // from the cause tree, size 2^c
  std::size_t unknown_low_support = 0;
  std::size_t unscored_anomalies = 0;

  ScatterData scatter;
};

// Human name of a composite class: problem family names joined with '+',
// or "none" for the all-OK tuple.
std::string composite_name(std::size_t composite,
                           const std::vector<CauseFamily>& families);

// Shared front end of the pipeline: filter, select the KPI-group features,
// drop missing-KPI rows, label. The depth sweep reuses it so its folds see
// exactly what a full run would.
struct LabeledSlice {
  Dataset filtered;
  std::vector<RowId> feature_dropped;
  FeatureMatrix X;
  std::vector<double> kpi_values;  // parallel to X rows
  std::vector<std::size_t> y;     // label indices, parallel to X rows
  Labeling labeling;
};

LabeledSlice prepare_labeled_slice(const Dataset& ds,
                                   const PipelineConfig& config);

// Rows where the tree prediction disagrees with the label.
std::vector<AnomalyRecord> detect_anomalies(const DecisionTree& tree,
                                            const FeatureMatrix& X,
                                            const std::vector<std::size_t>& labels);
std::vector<AnomalyRecord> detect_anomalies(const std::vector<RowId>& ids,
                                            const std::vector<std::size_t>& y_true,
                                            const std::vector<std::size_t>& y_pred);

// Per family: k-means over the anomaly rows' family features, orientation,
// then problem/OK flags; rows missing a family value stay Unscored. Families
// that fail the separability gate issue only Ok flags.
std::vector<FamilyClustering> cluster_anomalies(
    std::vector<AnomalyRecord>& anomalies, const Dataset& ds,
    const PipelineConfig& config);

// CART over the union of family attribute groups, targets = composite
// classes present among fully scored anomalies. Throws SingleClass when
// fewer than two composite classes occur.
DecisionTree fit_cause_tree(const std::vector<AnomalyRecord>& anomalies,
                            const Dataset& ds, const PipelineConfig& config);

// Walks the cause tree for one anomaly row; low-support leaves map to
// UnknownLowSupport, the all-OK composite to FailureToIdentify.
Diagnosis diagnose(const DecisionTree& cause_tree,
                   const std::vector<CauseFamily>& families,
                   std::span<const double> features, std::size_t min_support);

Report run_pipeline(const Dataset& ds, const PipelineConfig& config);

}  // namespace netdiag
