#include "netdiag/report_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "netdiag/csv.hpp"
#include "netdiag/errors.hpp"

namespace netdiag {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json metrics_json(const Metrics& m) {
  ordered_json j;
  j["accuracy"] = m.accuracy;
  j["classes"] = m.class_order;
  j["confusion"] = m.confusion;
  ordered_json per_class;
  for (std::size_t c = 0; c < m.class_order.size(); ++c) {
    per_class[m.class_order[c]] = {{"precision", m.per_class[c].precision},
                                   {"recall", m.per_class[c].recall},
                                   {"f1", m.per_class[c].f1}};
  }
  j["per_class"] = std::move(per_class);
  j["macro"] = {{"precision", m.macro.precision},
                {"recall", m.macro.recall},
                {"f1", m.macro.f1}};
  return j;
}

const char* direction_name(Direction direction) {
  return direction == Direction::HigherIsWorse ? "higher-is-worse"
                                               : "lower-is-worse";
}

ordered_json clustering_json(const FamilyClustering& fc) {
  ordered_json j;
  j["family"] = fc.family;
  j["k"] = fc.model.k;
  j["scored_rows"] = fc.scored_rows.size();
  j["silhouette"] = fc.silhouette_score;
  j["gated"] = fc.gated;
  j["severity_attribute"] = fc.orientation.severity_attribute;
  j["direction"] = direction_name(fc.orientation.direction);
  j["problem_cluster"] = fc.orientation.problem_cluster;
  j["ambiguous"] = fc.orientation.ambiguous;
  std::vector<std::size_t> sizes(fc.model.k, 0);
  for (const std::size_t a : fc.model.assignments) ++sizes[a];
  j["cluster_sizes"] = sizes;
  j["centroids"] = fc.model.centroids_raw();
  j["inertia"] = fc.model.inertia;
  j["iterations"] = fc.model.iterations;
  return j;
}

std::string composite_report_label(std::size_t composite,
                                   const std::vector<CauseFamily>& families) {
  return composite == 0 ? "failure to identify"
                        : composite_name(composite, families);
}

csv::Table rules_table(const RuleSet& rules) {
  csv::Table table;
  table.header = {"rule_id", "rule", "class", "probability", "support",
                  "leaf"};
  for (const auto& rule : rules.rules) {
    table.rows.push_back({std::to_string(rule.node_index),
                          rule_text(rule.conditions), rule.label,
                          csv::format_double(rule.probability),
                          std::to_string(rule.support),
                          rule.leaf ? "1" : "0"});
  }
  return table;
}

}  // namespace

std::string diagnosis_label(const Diagnosis& diagnosis,
                            const std::vector<CauseFamily>& families) {
  switch (diagnosis.kind) {
    case DiagnosisKind::UnknownLowSupport: return "unknown (low support)";
    case DiagnosisKind::FailureToIdentify: return "failure to identify";
    case DiagnosisKind::Cause:
      return composite_name(diagnosis.composite, families);
  }
  return "?";
}

std::string report_json(const Report& rep) {
  const auto& families = rep.config.families;
  ordered_json j;

  j["dataset"] = {{"input_rows", rep.input_rows},
                  {"filtered_rows", rep.filtered_rows},
                  {"parse_warnings", rep.parse_warnings},
                  {"feature_dropped_rows", rep.feature_dropped_rows},
                  {"kpi_dropped_rows", rep.labeling.dropped_rows}};

  ordered_json counts;
  for (std::size_t c = 0; c < kKpiClassCount; ++c) {
    counts[kpi_class_order()[c]] = rep.labeling.class_counts[c];
  }
  j["labeling"] = {{"low_q", rep.labeling.split.low_q},
                   {"high_q", rep.labeling.split.high_q},
                   {"low_threshold", rep.labeling.split.low_threshold},
                   {"high_threshold", rep.labeling.split.high_threshold},
                   {"counts", std::move(counts)},
                   {"labeled_rows", rep.labeling.labels.size()}};

  j["kpi_tree"] = ordered_json::parse(serialize_tree(rep.kpi_tree));
  j["kpi_metrics"] = metrics_json(rep.kpi_metrics);
  if (rep.holdout_metrics) {
    j["holdout_metrics"] = metrics_json(*rep.holdout_metrics);
  }

  j["anomalies"] = {{"count", rep.anomalies.size()},
                    {"unscored", rep.unscored_anomalies}};

  ordered_json clusterings = ordered_json::array();
  for (const auto& fc : rep.clusterings) {
    clusterings.push_back(clustering_json(fc));
  }
  j["clustering"] = std::move(clusterings);

  if (rep.cause_tree) {
    j["cause_tree"] = ordered_json::parse(serialize_tree(*rep.cause_tree));
  } else {
    j["cause_tree"] = nullptr;
  }
  if (rep.cause_metrics) {
    j["cause_metrics"] = metrics_json(*rep.cause_metrics);
  } else {
    j["cause_metrics"] = nullptr;
  }

  ordered_json clustered;
  ordered_json diagnosed;
  for (std::size_t comp = 0; comp < rep.composite_counts.size(); ++comp) {
    const std::string label = composite_report_label(comp, families);
    clustered[label] = rep.composite_counts[comp];
    diagnosed[label] = rep.diagnosed_counts[comp];
  }
  j["cause_counts"] = {{"clustered", std::move(clustered)},
                       {"diagnosed", std::move(diagnosed)},
                       {"unknown_low_support", rep.unknown_low_support},
                       {"unscored", rep.unscored_anomalies}};

  j["scatter"] = {{"x_attribute", rep.scatter.x_attribute},
                  {"kpi_attribute", rep.scatter.kpi_attribute},
                  {"points", rep.scatter.points.size()}};
  j["seed"] = rep.config.seed;
  return j.dump(2) + "\n";
}

namespace {

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::IoError, "cannot open '" + path + "' for writing");
  out << content;
  if (!out) fail(Errc::IoError, "write failed for '" + path + "'");
}

csv::Table confusion_table(const Metrics& m) {
  csv::Table table;
  table.header.push_back("class");
  for (const auto& name : m.class_order) table.header.push_back(name);
  for (std::size_t r = 0; r < m.class_order.size(); ++r) {
    std::vector<std::string> record;
    record.push_back(m.class_order[r]);
    for (const std::size_t cell : m.confusion[r]) {
      record.push_back(std::to_string(cell));
    }
    table.rows.push_back(std::move(record));
  }
  return table;
}

csv::Table anomalies_table(const Report& rep) {
  const auto& families = rep.config.families;
  csv::Table table;
  table.header = {"row_id", "true_label", "predicted_label"};
  for (const auto& family : families) {
    table.header.push_back(family.name + "_flag");
  }
  table.header.insert(table.header.end(),
                      {"composite", "diagnosis", "rule_id", "probability"});

  for (std::size_t i = 0; i < rep.anomalies.size(); ++i) {
    const auto& rec = rep.anomalies[i];
    std::vector<std::string> record;
    record.push_back(std::to_string(rec.row_id));
    record.push_back(kpi_class_order()[rec.true_label]);
    record.push_back(kpi_class_order()[rec.predicted_label]);
    for (const FlagState flag : rec.flags) {
      record.push_back(flag_name(flag));
    }
    record.push_back(rec.composite ? composite_name(*rec.composite, families)
                                   : "");
    const auto& diag = rep.diagnoses[i];
    record.push_back(diag ? diagnosis_label(*diag, families) : "");
    record.push_back(diag && diag->rule_id
                         ? std::to_string(*diag->rule_id)
                         : "");
    record.push_back(diag ? csv::format_double(diag->probability) : "");
    table.rows.push_back(std::move(record));
  }
  return table;
}

csv::Table cause_counts_table(const Report& rep) {
  const auto& families = rep.config.families;
  csv::Table table;
  table.header = {"label", "clustered", "diagnosed"};
  for (std::size_t comp = 0; comp < rep.composite_counts.size(); ++comp) {
    table.rows.push_back({composite_report_label(comp, families),
                          std::to_string(rep.composite_counts[comp]),
                          std::to_string(rep.diagnosed_counts[comp])});
  }
  table.rows.push_back({"unknown (low support)", "0",
                        std::to_string(rep.unknown_low_support)});
  table.rows.push_back({"unscored", std::to_string(rep.unscored_anomalies),
                        std::to_string(rep.unscored_anomalies)});
  return table;
}

csv::Table scatter_table(const ScatterData& scatter) {
  csv::Table table;
  table.header = {"row_id", scatter.x_attribute, scatter.kpi_attribute,
                  "marker"};
  for (const auto& p : scatter.points) {
    table.rows.push_back({std::to_string(p.row_id), csv::format_double(p.x),
                          csv::format_double(p.kpi),
                          p.anomalous ? "anomalous" : "correct"});
  }
  return table;
}

}  // namespace

void write_report(const Report& rep, const std::string& out_dir) {
  const std::string base = out_dir + "/";
  write_text_file(base + "report.json", report_json(rep));
  csv::write_file(base + "kpi_rules.csv", rules_table(rep.kpi_rules));
  csv::write_file(base + "cause_rules.csv", rules_table(rep.cause_rules));
  csv::write_file(base + "confusion.csv", confusion_table(rep.kpi_metrics));
  csv::write_file(base + "anomalies.csv", anomalies_table(rep));
  csv::write_file(base + "cause_counts.csv", cause_counts_table(rep));
  csv::write_file(base + "scatter.csv", scatter_table(rep.scatter));
}

void write_depth_scores_csv(const std::string& path,
                            const std::vector<DepthScore>& scores) {
  csv::Table table;
  table.header = {"depth", "mean_accuracy", "ci_low", "ci_high"};
  for (const auto& s : scores) {
    table.rows.push_back({std::to_string(s.depth),
                          csv::format_double(s.mean_accuracy),
                          csv::format_double(s.ci_low),
                          csv::format_double(s.ci_high)});
  }
  csv::write_file(path, table);
}

namespace {

struct Range {
  double lo = 0.0;
  double hi = 1.0;

  void widen(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double scale(double v, double out_lo, double out_hi) const {
    const double span = hi > lo ? hi - lo : 1.0;
    return out_lo + (v - lo) / span * (out_hi - out_lo);
  }
};

constexpr int kWidth = 720;
constexpr int kHeight = 480;
constexpr int kMargin = 48;

std::string svg_header() {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(kWidth) + "\" height=\"" + std::to_string(kHeight) +
         "\" viewBox=\"0 0 " + std::to_string(kWidth) + " " +
         std::to_string(kHeight) + "\">\n" +
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string axes(const std::string& x_label, const std::string& y_label) {
  std::string s;
  s += "<line x1=\"" + std::to_string(kMargin) + "\" y1=\"" +
       std::to_string(kHeight - kMargin) + "\" x2=\"" +
       std::to_string(kWidth - kMargin) + "\" y2=\"" +
       std::to_string(kHeight - kMargin) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + std::to_string(kMargin) + "\" y1=\"" +
       std::to_string(kMargin) + "\" x2=\"" + std::to_string(kMargin) +
       "\" y2=\"" + std::to_string(kHeight - kMargin) +
       "\" stroke=\"black\"/>\n";
  s += "<text x=\"" + std::to_string(kWidth / 2) + "\" y=\"" +
       std::to_string(kHeight - 12) + "\" text-anchor=\"middle\" "
       "font-family=\"sans-serif\" font-size=\"13\">" + x_label +
       "</text>\n";
  s += "<text x=\"16\" y=\"" + std::to_string(kHeight / 2) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"13\" transform=\"rotate(-90 16 " +
       std::to_string(kHeight / 2) + ")\">" + y_label + "</text>\n";
  return s;
}

}  // namespace

void write_scatter_svg(const std::string& path, const ScatterData& scatter) {
  Range xr;
  Range yr;
  if (!scatter.points.empty()) {
    xr = {scatter.points[0].x, scatter.points[0].x};
    yr = {scatter.points[0].kpi, scatter.points[0].kpi};
    for (const auto& p : scatter.points) {
      xr.widen(p.x);
      yr.widen(p.kpi);
    }
  }
  std::string s = svg_header();
  s += axes(scatter.x_attribute, scatter.kpi_attribute);
  for (const auto& p : scatter.points) {
    const double cx = xr.scale(p.x, kMargin, kWidth - kMargin);
    const double cy = yr.scale(p.kpi, kHeight - kMargin, kMargin);
    s += "<circle cx=\"" + csv::format_double(cx) + "\" cy=\"" +
         csv::format_double(cy) + "\" r=\"2\" fill=\"" +
         (p.anomalous ? "red" : "steelblue") + "\" fill-opacity=\"0.6\"/>\n";
  }
  s += "</svg>\n";
  write_text_file(path, s);
}

void write_depth_curve_svg(const std::string& path,
                           const std::vector<DepthScore>& scores) {
  Range xr;
  Range yr{0.0, 1.0};
  if (!scores.empty()) {
    xr = {static_cast<double>(scores.front().depth),
          static_cast<double>(scores.back().depth)};
    for (const auto& sc : scores) {
      yr.widen(sc.ci_low);
      yr.widen(sc.ci_high);
    }
  }
  std::string s = svg_header();
  s += axes("tree depth", "accuracy");
  std::string polyline = "<polyline fill=\"none\" stroke=\"steelblue\" "
                         "stroke-width=\"2\" points=\"";
  for (const auto& sc : scores) {
    const double cx =
        xr.scale(static_cast<double>(sc.depth), kMargin, kWidth - kMargin);
    const double cy = yr.scale(sc.mean_accuracy, kHeight - kMargin, kMargin);
    const double lo = yr.scale(sc.ci_low, kHeight - kMargin, kMargin);
    const double hi = yr.scale(sc.ci_high, kHeight - kMargin, kMargin);
    s += "<line x1=\"" + csv::format_double(cx) + "\" y1=\"" +
         csv::format_double(lo) + "\" x2=\"" + csv::format_double(cx) +
         "\" y2=\"" + csv::format_double(hi) +
         "\" stroke=\"gray\" stroke-width=\"1\"/>\n";
    polyline += csv::format_double(cx) + "," + csv::format_double(cy) + " ";
  }
  s += polyline + "\"/>\n";
  for (const auto& sc : scores) {
    const double cx =
        xr.scale(static_cast<double>(sc.depth), kMargin, kWidth - kMargin);
    const double cy = yr.scale(sc.mean_accuracy, kHeight - kMargin, kMargin);
    s += "<circle cx=\"" + csv::format_double(cx) + "\" cy=\"" +
         csv::format_double(cy) + "\" r=\"3\" fill=\"steelblue\"/>\n";
  }
  s += "</svg>\n";
  write_text_file(path, s);
}

}  // namespace netdiag
