#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>
#include <vector>

#include "netdiag/errors.hpp"
#include "netdiag/labeling.hpp"
#include "netdiag/rng.hpp"

using namespace netdiag;

namespace {

std::vector<double> one_to_ten() {
  std::vector<double> v(10);
  std::iota(v.begin(), v.end(), 1.0);
  return v;
}

std::vector<RowId> ids(std::size_t n) {
  std::vector<RowId> v(n);
  std::iota(v.begin(), v.end(), RowId{0});
  return v;
}

}  // namespace

TEST_CASE("percentiles interpolate between order statistics") {
  CHECK(compute_percentile(one_to_ten(), 10.0) == doctest::Approx(1.9).epsilon(1e-12));
  CHECK(compute_percentile(one_to_ten(), 90.0) == doctest::Approx(9.1).epsilon(1e-12));
  CHECK(compute_percentile(one_to_ten(), 50.0) == doctest::Approx(5.5).epsilon(1e-12));
  CHECK(compute_percentile({3.0, 1.0, 2.0}, 50.0) == 2.0);  // sorts first
  CHECK(compute_percentile(std::vector<double>(5, 7.0), 33.0) == 7.0);
}

TEST_CASE("percentile domain errors") {
  CHECK_THROWS_AS(compute_percentile({}, 10.0), Error);
  CHECK_THROWS_AS(compute_percentile({1.0}, 0.0), Error);
  CHECK_THROWS_AS(compute_percentile({1.0}, 100.0), Error);
  CHECK_THROWS_AS(compute_percentile({1.0}, -5.0), Error);
}

TEST_CASE("ten distinct values at (10,90) label exactly min Bad and max Good") {
  const Labeling lab = label_values(ids(10), one_to_ten(), 10.0, 90.0);
  CHECK(lab.split.low_threshold == doctest::Approx(1.9).epsilon(1e-12));
  CHECK(lab.split.high_threshold == doctest::Approx(9.1).epsilon(1e-12));
  CHECK(lab.class_counts[0] == 1);  // Bad
  CHECK(lab.class_counts[1] == 8);  // OK
  CHECK(lab.class_counts[2] == 1);  // Good
  CHECK(lab.labels.front() == KpiLabel::Bad);
  CHECK(lab.labels.back() == KpiLabel::Good);
}

TEST_CASE("an all-equal KPI column labels every row OK") {
  const Labeling lab =
      label_values(ids(6), std::vector<double>(6, 7.0), 10.0, 90.0);
  CHECK(lab.class_counts[1] == 6);
}

TEST_CASE("threshold-equal values are OK") {
  PercentileSplit split{10.0, 90.0, 2.0, 8.0};
  CHECK(label_value(2.0, split) == KpiLabel::OK);
  CHECK(label_value(8.0, split) == KpiLabel::OK);
  CHECK(label_value(1.999, split) == KpiLabel::Bad);
  CHECK(label_value(8.001, split) == KpiLabel::Good);
}

TEST_CASE("a wider band never moves a sample out of OK") {
  Rng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 20 + trial;
    std::vector<double> values(n);
    for (auto& v : values) v = rng.uniform(0.0, 1000.0);
    const Labeling narrow = label_values(ids(n), values, 20.0, 80.0);
    const Labeling wide = label_values(ids(n), values, 10.0, 90.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (narrow.labels[i] == KpiLabel::OK) CHECK(wide.labels[i] == KpiLabel::OK);
    }
  }
}

TEST_CASE("tail shares are a tenth of the rows within one") {
  Rng rng(78);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 50 + 17 * trial;
    std::vector<double> values(n);
    for (auto& v : values) v = rng.uniform(0.0, 1.0);
    const Labeling lab = label_values(ids(n), values, 10.0, 90.0);
    const double tenth = 0.10 * static_cast<double>(n);
    CHECK(std::abs(static_cast<double>(lab.class_counts[0]) - tenth) <= 1.0);
    CHECK(std::abs(static_cast<double>(lab.class_counts[2]) - tenth) <= 1.0);
  }
}

TEST_CASE("labels are deterministic and errors are typed") {
  const Labeling a = label_values(ids(10), one_to_ten(), 10.0, 90.0);
  const Labeling b = label_values(ids(10), one_to_ten(), 10.0, 90.0);
  CHECK(a.labels == b.labels);

  CHECK_THROWS_AS(label_values(ids(3), {1.0, 2.0}, 10.0, 90.0), Error);
  CHECK_THROWS_AS(label_values({}, {}, 10.0, 90.0), Error);
  CHECK_THROWS_AS(label_values(ids(2), {1.0, 2.0}, 90.0, 10.0), Error);
}

TEST_CASE("labeling a dataset drops rows with a missing KPI") {
  Dataset ds;
  ds.schema.kpi_column = "kpi";
  ds.schema.groups = {{"g", {"x"}}};
  ds.row_ids = {0, 1, 2, 3};
  ds.numeric_names = {"kpi", "x"};
  ds.numeric = {{1.0, std::nan(""), 3.0, 4.0}, {0, 0, 0, 0}};
  const Labeling lab = label_by_percentiles(ds, 10.0, 90.0);
  REQUIRE(lab.dropped_rows.size() == 1);
  CHECK(lab.dropped_rows[0] == 1);
  CHECK(lab.row_ids.size() == 3);
  CHECK(lab.class_counts[0] + lab.class_counts[1] + lab.class_counts[2] == 3);
}
