#include "netdiag/labeling.hpp"

#include <algorithm>
#include <cmath>

#include "netdiag/errors.hpp"

namespace netdiag {

const char* kpi_label_name(KpiLabel label) {
  switch (label) {
    case KpiLabel::Bad: return "Bad";
    case KpiLabel::OK: return "OK";
    case KpiLabel::Good: return "Good";
  }
  return "?";
}

const std::array<std::string, kKpiClassCount>& kpi_class_order() {
  static const std::array<std::string, kKpiClassCount> order = {"Bad", "OK",
                                                                "Good"};
  return order;
}

double compute_percentile(std::vector<double> values, double q) {
  if (values.empty()) fail(Errc::EmptyInput, "no values to rank");
  if (!(q > 0.0 && q < 100.0))
    fail(Errc::QOutOfRange,
         "percentile must lie strictly between 0 and 100, got " +
             std::to_string(q));
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * q / 100.0;
  const std::size_t lo = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0) return values[lo];
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

KpiLabel label_value(double value, const PercentileSplit& split) {
  if (value > split.high_threshold) return KpiLabel::Good;
  if (value < split.low_threshold) return KpiLabel::Bad;
  return KpiLabel::OK;
}

Labeling label_values(const std::vector<RowId>& row_ids,
                      const std::vector<double>& values, double low_q,
                      double high_q) {
  if (row_ids.size() != values.size())
    fail(Errc::LengthMismatch, "row ids and values differ in length");
  if (values.empty()) fail(Errc::EmptyInput, "no rows carry a KPI value");
  if (!(low_q < high_q))
    fail(Errc::QOutOfRange, "low percentile must be below high percentile");

  Labeling out;
  out.split.low_q = low_q;
  out.split.high_q = high_q;
  out.split.low_threshold = compute_percentile(values, low_q);
  out.split.high_threshold = compute_percentile(values, high_q);
  out.row_ids = row_ids;
  out.labels.reserve(values.size());
  for (const double value : values) {
    const KpiLabel label = label_value(value, out.split);
    out.labels.push_back(label);
    ++out.class_counts[static_cast<std::size_t>(label)];
  }
  return out;
}

Labeling label_by_percentiles(const Dataset& ds, double low_q, double high_q) {
  const auto* kpi = ds.numeric_column(ds.schema.kpi_column);
  if (!kpi)
    fail(Errc::MissingColumn,
         "dataset lacks KPI column '" + ds.schema.kpi_column + "'");

  std::vector<RowId> ids;
  std::vector<double> values;
  std::vector<RowId> dropped;
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    const double value = (*kpi)[r];
    if (std::isnan(value)) {
      dropped.push_back(ds.row_ids[r]);
    } else {
      ids.push_back(ds.row_ids[r]);
      values.push_back(value);
    }
  }
  Labeling out = label_values(ids, values, low_q, high_q);
  out.dropped_rows = std::move(dropped);
  return out;
}

}  // namespace netdiag
