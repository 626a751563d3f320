#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "netdiag/dataset.hpp"

namespace netdiag {

// Canonical order Bad < OK < Good; confusion-matrix axes follow it.
enum class KpiLabel : int { Bad = 0, OK = 1, Good = 2 };

constexpr std::size_t kKpiClassCount = 3;

const char* kpi_label_name(KpiLabel label);
const std::array<std::string, kKpiClassCount>& kpi_class_order();

struct PercentileSplit {
  double low_q = 10.0;
  double high_q = 90.0;
  double low_threshold = 0.0;
  double high_threshold = 0.0;
};

struct Labeling {
  PercentileSplit split;
  std::vector<RowId> row_ids;
  std::vector<KpiLabel> labels;            // parallel to row_ids
  std::vector<RowId> dropped_rows;         // rows with a missing KPI value
  std::array<std::size_t, kKpiClassCount> class_counts{};
};

// Linear interpolation over order statistics: h = (n-1)q/100,
// v[floor(h)] + frac(h) * (v[floor(h)+1] - v[floor(h)]).
double compute_percentile(std::vector<double> values, double q);

// value > high threshold -> Good, value < low threshold -> Bad, everything
// else (boundary equality included) -> OK.
KpiLabel label_value(double value, const PercentileSplit& split);

Labeling label_values(const std::vector<RowId>& row_ids,
                      const std::vector<double>& values, double low_q,
                      double high_q);

// Thresholds come from the KPI column of `ds` itself (after any upstream
// filtering); rows with a missing KPI are dropped and reported.
Labeling label_by_percentiles(const Dataset& ds, double low_q, double high_q);

}  // namespace netdiag
