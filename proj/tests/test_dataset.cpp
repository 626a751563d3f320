#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <string>

#include "netdiag/dataset.hpp"
#include "netdiag/errors.hpp"
#include "netdiag/synth.hpp"

using namespace netdiag;

namespace {

struct TempCsv {
  std::string path;
  explicit TempCsv(const std::string& text) {
    static int counter = 0;
    path = "test_dataset_tmp_" + std::to_string(counter++) + ".csv";
    std::ofstream out(path, std::ios::binary);
    out << text;
  }
  ~TempCsv() { std::remove(path.c_str()); }
};

AttributeSchema tiny_schema() {
  AttributeSchema schema;
  schema.kpi_column = "tdr";
  schema.groups = {{"rtt", {"rtt_avg"}}};
  return schema;
}

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::IoError;
}

}  // namespace

TEST_CASE("two data lines load as two rows with ordinal ids") {
  TempCsv file("tdr,rtt_avg\n100,5\n200,3\n");
  const Dataset ds = load_csv(file.path, tiny_schema());
  REQUIRE(ds.n_rows() == 2);
  CHECK(ds.row_ids[0] == 0);
  CHECK(ds.row_ids[1] == 1);
  CHECK((*ds.numeric_column("tdr"))[1] == 200.0);
  CHECK((*ds.numeric_column("rtt_avg"))[0] == 5.0);
  CHECK(ds.parse_warnings == 0);
}

TEST_CASE("a missing declared column is an error") {
  TempCsv file("tdr,other\n1,2\n");
  CHECK(code_of([&] { load_csv(file.path, tiny_schema()); }) ==
        Errc::MissingColumn);
}

TEST_CASE("unparseable numeric cells become missing and count as warnings") {
  TempCsv file("tdr,rtt_avg\n100,abc\n200,3\n300,\n");
  const Dataset ds = load_csv(file.path, tiny_schema());
  REQUIRE(ds.n_rows() == 3);
  const auto& rtt = *ds.numeric_column("rtt_avg");
  CHECK(std::isnan(rtt[0]));
  CHECK(rtt[1] == 3.0);
  CHECK(std::isnan(rtt[2]));  // empty cell, silently missing
  CHECK(ds.parse_warnings == 1);
}

TEST_CASE("loading identical bytes yields identical datasets") {
  const std::string text = "tdr,rtt_avg\n1.5,2.25\n-3e2,0.125\n";
  TempCsv a(text), b(text);
  const Dataset da = load_csv(a.path, tiny_schema());
  const Dataset db = load_csv(b.path, tiny_schema());
  REQUIRE(da.n_rows() == db.n_rows());
  for (std::size_t c = 0; c < da.numeric.size(); ++c)
    for (std::size_t r = 0; r < da.n_rows(); ++r)
      CHECK(da.numeric[c][r] == db.numeric[c][r]);
}

TEST_CASE("schema validation rejects bad layouts") {
  AttributeSchema s = tiny_schema();
  s.groups[0].columns.push_back("tdr");  // kpi inside a group
  CHECK(code_of([&] { s.validate(); }) == Errc::InvalidConfig);

  s = tiny_schema();
  s.groups.push_back({"radio", {"rtt_avg"}});  // column in two groups
  CHECK(code_of([&] { s.validate(); }) == Errc::InvalidConfig);

  s = tiny_schema();
  s.groups.push_back({"radio", {}});  // empty group
  CHECK(code_of([&] { s.validate(); }) == Errc::InvalidConfig);

  s = tiny_schema();
  s.metadata_columns = {"rtt_avg"};  // metadata shadowing a numeric column
  CHECK(code_of([&] { s.validate(); }) == Errc::InvalidConfig);
}

TEST_CASE("metadata equality filter keeps matching rows only") {
  AttributeSchema schema = tiny_schema();
  schema.metadata_columns = {"technology"};
  std::string text = "tdr,rtt_avg,technology\n";
  for (int i = 0; i < 10; ++i)
    text += std::to_string(i) + ",1," + (i < 6 ? "LTE" : "3G") + "\n";
  TempCsv file(text);
  const Dataset ds = load_csv(file.path, schema);

  const Dataset lte = filter(ds, {Predicate::equals("technology", "LTE")});
  REQUIRE(lte.n_rows() == 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(lte.row_ids[i] == i);

  const Dataset same = filter(ds, {});
  CHECK(same.n_rows() == ds.n_rows());
}

TEST_CASE("range filters are closed and reject missing values") {
  TempCsv file("tdr,rtt_avg\n1,5\n2,10\n3,15\n4,\n");
  const Dataset ds = load_csv(file.path, tiny_schema());
  const Dataset mid = filter(ds, {Predicate::in_range("rtt_avg", 5.0, 10.0)});
  REQUIRE(mid.n_rows() == 2);
  CHECK(mid.row_ids[0] == 0);
  CHECK(mid.row_ids[1] == 1);
}

TEST_CASE("filtering an unknown column is an error") {
  TempCsv file("tdr,rtt_avg\n1,2\n");
  const Dataset ds = load_csv(file.path, tiny_schema());
  CHECK(code_of([&] { filter(ds, {Predicate::equals("nope", "x")}); }) ==
        Errc::UnknownColumn);
}

TEST_CASE("combined filters match a brute-force scan of a campaign") {
  SynthConfig cfg;
  cfg.n_rows = 300;
  cfg.seed = 5;
  const auto [ds, truth] = generate(cfg);
  const Dataset picked = filter(ds, {Predicate::equals("operator", "op0"),
                                     Predicate::equals("country", "SE")});
  const auto& op = *ds.metadata_column("operator");
  const auto& country = *ds.metadata_column("country");
  std::size_t expected = 0;
  for (std::size_t i = 0; i < ds.n_rows(); ++i)
    if (op[i] == "op0" && country[i] == "SE") ++expected;
  CHECK(picked.n_rows() == expected);
}

TEST_CASE("select_features keeps schema column order and source values") {
  TempCsv file("tdr,a,b\n1,10,20\n2,11,21\n");
  AttributeSchema schema;
  schema.kpi_column = "tdr";
  schema.groups = {{"g", {"a", "b"}}};
  const Dataset ds = load_csv(file.path, schema);
  const FeatureSelection sel = select_features(ds, "g");
  REQUIRE(sel.matrix.n_rows() == 2);
  REQUIRE(sel.matrix.columns == std::vector<std::string>{"a", "b"});
  CHECK(sel.matrix.at(0, 0) == 10.0);
  CHECK(sel.matrix.at(1, 1) == 21.0);
  CHECK(sel.dropped_rows.empty());
}

TEST_CASE("rows missing a group value are dropped and reported") {
  TempCsv file("tdr,a,b\n1,10,20\n2,,21\n3,12,22\n4,13,23\n5,14,24\n");
  AttributeSchema schema;
  schema.kpi_column = "tdr";
  schema.groups = {{"g", {"a", "b"}}};
  const Dataset ds = load_csv(file.path, schema);
  const FeatureSelection sel = select_features(ds, "g");
  CHECK(sel.matrix.n_rows() == 4);
  REQUIRE(sel.dropped_rows.size() == 1);
  CHECK(sel.dropped_rows[0] == 1);
}

TEST_CASE("unknown group and fully-missing selections are errors") {
  TempCsv file("tdr,a\n1,\n2,\n");
  AttributeSchema schema;
  schema.kpi_column = "tdr";
  schema.groups = {{"g", {"a"}}};
  const Dataset ds = load_csv(file.path, schema);
  CHECK(code_of([&] { select_features(ds, "nope"); }) == Errc::UnknownGroup);
  CHECK(code_of([&] { select_features(ds, "g"); }) == Errc::AllRowsDropped);
}

TEST_CASE("filter and select commute on row ids") {
  SynthConfig cfg;
  cfg.n_rows = 200;
  cfg.seed = 9;
  const auto [ds, truth] = generate(cfg);
  const std::vector<Predicate> preds{Predicate::equals("service", "web")};

  const FeatureSelection a = select_features(filter(ds, preds), "radio");
  const FeatureSelection whole = select_features(ds, "radio");
  const Dataset kept = filter(ds, preds);
  std::vector<RowId> expected;
  for (const RowId id : whole.matrix.row_ids)
    for (const RowId kept_id : kept.row_ids)
      if (id == kept_id) expected.push_back(id);
  CHECK(a.matrix.row_ids == expected);
}

TEST_CASE("subset keeps dataset order regardless of id order") {
  TempCsv file("tdr,rtt_avg\n1,2\n3,4\n5,6\n");
  const Dataset ds = load_csv(file.path, tiny_schema());
  const Dataset sub = subset(ds, {2, 0});
  REQUIRE(sub.n_rows() == 2);
  CHECK(sub.row_ids[0] == 0);
  CHECK(sub.row_ids[1] == 2);
  CHECK((*sub.numeric_column("tdr"))[1] == 5.0);
}
