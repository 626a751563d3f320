#pragma once

#include <string>
#include <vector>

#include "netdiag/cart.hpp"
#include "netdiag/pipeline.hpp"

namespace netdiag {

// Writes the full report file set into out_dir (report.json, kpi_rules.csv,
// cause_rules.csv, confusion.csv, anomalies.csv, cause_counts.csv,
// scatter.csv). The directory must exist.
void write_report(const Report& report, const std::string& out_dir);

std::string report_json(const Report& report);

void write_depth_scores_csv(const std::string& path,
                            const std::vector<DepthScore>& scores);

void write_scatter_svg(const std::string& path, const ScatterData& scatter);
void write_depth_curve_svg(const std::string& path,
                           const std::vector<DepthScore>& scores);

// Reporting name of a diagnosis outcome ("failure to identify",
// "unknown (low support)", or the problem families joined with '+').
std::string diagnosis_label(const Diagnosis& diagnosis,
                            const std::vector<CauseFamily>& families);

}  // namespace netdiag
