#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "netdiag/config.hpp"
#include "netdiag/csv.hpp"
#include "netdiag/errors.hpp"
#include "netdiag/synth.hpp"

using namespace netdiag;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path(name) {}
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path, ec);
  }
};

const std::vector<double>& column(const Dataset& ds, const std::string& name) {
  const auto* col = ds.numeric_column(name);
  REQUIRE(col != nullptr);
  return *col;
}

double mean_where(const std::vector<double>& values,
                  const std::vector<bool>& pick, bool wanted) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (pick[i] != wanted) continue;
    sum += values[i];
    ++count;
  }
  REQUIRE(count > 0);
  return sum / static_cast<double>(count);
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  return cov / std::sqrt(va * vb);
}

}  // namespace

TEST_CASE("the same config generates the same campaign") {
  SynthConfig cfg;
  cfg.n_rows = 200;
  cfg.seed = 11;
  const auto [ds1, truth1] = generate(cfg);
  const auto [ds2, truth2] = generate(cfg);
  CHECK(ds1.numeric == ds2.numeric);
  CHECK(ds1.metadata == ds2.metadata);
  CHECK(truth1.radio_fault == truth2.radio_fault);
  CHECK(truth1.tcp_fault == truth2.tcp_fault);

  cfg.seed = 12;
  const auto [ds3, truth3] = generate(cfg);
  CHECK(ds1.numeric != ds3.numeric);
}

TEST_CASE("each row draws from its own stream, so campaigns nest") {
  SynthConfig cfg;
  cfg.seed = 21;
  cfg.n_rows = 50;
  const auto [small, truth_small] = generate(cfg);
  cfg.n_rows = 120;
  const auto [big, truth_big] = generate(cfg);
  for (std::size_t c = 0; c < small.numeric.size(); ++c) {
    for (std::size_t r = 0; r < 50; ++r) {
      CHECK(small.numeric[c][r] == big.numeric[c][r]);
    }
  }
  for (std::size_t r = 0; r < 50; ++r) {
    CHECK(truth_small.radio_fault[r] == truth_big.radio_fault[r]);
    CHECK(truth_small.tcp_fault[r] == truth_big.tcp_fault[r]);
  }
}

TEST_CASE("the generated schema exposes the full column set") {
  const AttributeSchema schema = synth_schema();
  CHECK_NOTHROW(schema.validate());
  const auto names = schema.numeric_columns();
  CHECK(names.size() == 18);  // kpi + 4 rtt + 6 radio + 7 tcp
  CHECK(names[0] == "tdr_kbps");
  REQUIRE(schema.groups.size() == 3);
  CHECK(schema.groups[0].columns.size() == 4);
  CHECK(schema.groups[1].columns.size() == 6);
  CHECK(schema.groups[2].columns.size() == 7);
  CHECK(schema.metadata_columns ==
        std::vector<std::string>{"country", "operator", "service"});
}

TEST_CASE("fault injection tracks the configured rates independently") {
  SynthConfig cfg;
  cfg.n_rows = 20000;
  cfg.seed = 3;
  cfg.radio_fault_rate = 0.05;
  cfg.tcp_fault_rate = 0.08;
  const auto [ds, truth] = generate(cfg);

  std::size_t radio = 0, tcp = 0, both = 0;
  for (std::size_t i = 0; i < cfg.n_rows; ++i) {
    radio += truth.radio_fault[i] ? 1 : 0;
    tcp += truth.tcp_fault[i] ? 1 : 0;
    both += (truth.radio_fault[i] && truth.tcp_fault[i]) ? 1 : 0;
  }
  CHECK(radio > 850);
  CHECK(radio < 1150);
  CHECK(tcp > 1400);
  CHECK(tcp < 1800);
  CHECK(both > 40);  // independent draws overlap near n * p_radio * p_tcp
  CHECK(both < 130);
}

TEST_CASE("the KPI tracks inverse round-trip time on healthy rows") {
  SynthConfig cfg;
  cfg.n_rows = 4000;
  cfg.seed = 5;
  cfg.radio_fault_rate = 0.0;
  cfg.tcp_fault_rate = 0.0;
  const auto [ds, truth] = generate(cfg);

  const auto& rtt = column(ds, "Abs_RTT_avg");
  const auto& tdr = column(ds, "tdr_kbps");
  std::vector<double> inv(rtt.size());
  for (std::size_t i = 0; i < rtt.size(); ++i) inv[i] = 1.0 / rtt[i];
  CHECK(pearson(inv, tdr) > 0.9);
}

TEST_CASE("faults suppress the KPI without moving the round trip") {
  SynthConfig cfg;
  cfg.n_rows = 4000;
  cfg.seed = 6;
  cfg.radio_fault_rate = 0.1;
  cfg.tcp_fault_rate = 0.1;
  const auto [ds, truth] = generate(cfg);

  std::vector<bool> any_fault(cfg.n_rows);
  for (std::size_t i = 0; i < cfg.n_rows; ++i)
    any_fault[i] = truth.radio_fault[i] || truth.tcp_fault[i];

  const auto& tdr = column(ds, "tdr_kbps");
  const auto& rtt = column(ds, "Abs_RTT_avg");
  CHECK(mean_where(tdr, any_fault, true) <
        0.4 * mean_where(tdr, any_fault, false));
  const double rtt_ratio =
      mean_where(rtt, any_fault, true) / mean_where(rtt, any_fault, false);
  CHECK(rtt_ratio > 0.8);
  CHECK(rtt_ratio < 1.25);
}

TEST_CASE("each fault family shifts only its own attribute group") {
  SynthConfig cfg;
  cfg.n_rows = 4000;
  cfg.seed = 7;
  cfg.radio_fault_rate = 0.1;
  cfg.tcp_fault_rate = 0.1;
  const auto [ds, truth] = generate(cfg);

  const auto& rsrp = column(ds, "Start.RSRP.dBm");
  const auto& loss = column(ds, "Abs_PacketLost_sum");

  const double rsrp_healthy = mean_where(rsrp, truth.radio_fault, false);
  CHECK(mean_where(rsrp, truth.radio_fault, true) < rsrp_healthy - 15.0);
  CHECK(std::abs(mean_where(rsrp, truth.tcp_fault, true) - rsrp_healthy) <
        5.0);

  const double loss_healthy = mean_where(loss, truth.tcp_fault, false);
  CHECK(mean_where(loss, truth.tcp_fault, true) > loss_healthy + 20.0);
  CHECK(std::abs(mean_where(loss, truth.radio_fault, true) - loss_healthy) <
        5.0);
}

TEST_CASE("generated campaigns round-trip through CSV") {
  SynthConfig cfg;
  cfg.n_rows = 60;
  cfg.seed = 8;
  const auto [ds, truth] = generate(cfg);

  TempFile file("test_synth_roundtrip.csv");
  write_dataset_csv(file.path, ds);
  const Dataset loaded = load_csv(file.path, synth_schema());

  CHECK(loaded.parse_warnings == 0);
  CHECK(loaded.row_ids == ds.row_ids);
  CHECK(loaded.numeric_names == ds.numeric_names);
  REQUIRE(loaded.numeric.size() == ds.numeric.size());
  for (std::size_t c = 0; c < ds.numeric.size(); ++c) {
    for (std::size_t r = 0; r < cfg.n_rows; ++r) {
      CHECK(loaded.numeric[c][r] == ds.numeric[c][r]);  // exact, not approx
    }
  }
  CHECK(loaded.metadata == ds.metadata);
}

TEST_CASE("the truth file lists one row per sample") {
  SynthConfig cfg;
  cfg.n_rows = 40;
  cfg.seed = 9;
  cfg.radio_fault_rate = 0.3;
  const auto [ds, truth] = generate(cfg);

  TempFile file("test_synth_truth.csv");
  write_truth_csv(file.path, truth);
  const csv::Table table = csv::read_file(file.path);
  CHECK(table.header ==
        std::vector<std::string>{"row_id", "radio_fault", "tcp_fault"});
  REQUIRE(table.rows.size() == cfg.n_rows);
  for (std::size_t i = 0; i < cfg.n_rows; ++i) {
    CHECK(table.rows[i][0] == std::to_string(i));
    CHECK(table.rows[i][1] == (truth.radio_fault[i] ? "1" : "0"));
    CHECK(table.rows[i][2] == (truth.tcp_fault[i] ? "1" : "0"));
  }
}

TEST_CASE("impossible generator settings are rejected") {
  auto rejects = [](auto&& tweak) {
    SynthConfig cfg;
    tweak(cfg);
    try {
      cfg.validate();
    } catch (const Error& e) {
      return e.code() == Errc::InvalidConfig;
    }
    return false;
  };
  CHECK(rejects([](SynthConfig& c) { c.n_rows = 0; }));
  CHECK(rejects([](SynthConfig& c) { c.radio_fault_rate = -0.1; }));
  CHECK(rejects([](SynthConfig& c) { c.tcp_fault_rate = 1.2; }));
  CHECK(rejects([](SynthConfig& c) {
    c.radio_fault_rate = 0.7;
    c.tcp_fault_rate = 0.7;
  }));
  CHECK(rejects([](SynthConfig& c) { c.rtt_mean_ms = 0.0; }));
  CHECK(rejects([](SynthConfig& c) { c.tdr_noise = -1.0; }));
  CHECK(rejects([](SynthConfig& c) { c.tdr_penalty = 0.0; }));
  CHECK(rejects([](SynthConfig& c) { c.tdr_penalty = 1.5; }));
  CHECK(rejects([](SynthConfig& c) { c.cwnd_shrink = 0.0; }));
  CHECK(rejects([](SynthConfig& c) { c.idle_inflation = 0.5; }));
  CHECK(rejects([](SynthConfig& c) { c.rsrp_drop_db = -1.0; }));
}

TEST_CASE("recovery scoring counts hits per family") {
  Report report;
  report.config.families = default_tool_config().pipeline.families;

  GroundTruth truth;
  truth.radio_fault = {true, false, false, false};
  truth.tcp_fault = {false, false, true, true};

  auto add = [&report](RowId id, FlagState radio, FlagState tcp) {
    AnomalyRecord rec;
    rec.row_id = id;
    rec.flags = {radio, tcp};
    report.anomalies.push_back(rec);
  };
  add(0, FlagState::Problem, FlagState::Ok);        // radio hit
  add(1, FlagState::Problem, FlagState::Ok);        // radio false alarm
  add(2, FlagState::Ok, FlagState::Problem);        // tcp hit
  add(3, FlagState::Unscored, FlagState::Ok);       // tcp miss, radio skipped

  const auto scores = score_recovery(report, truth);
  REQUIRE(scores.size() == 2);

  CHECK(scores[0].family == "radio");
  CHECK(scores[0].flagged == 2);
  CHECK(scores[0].injected == 1);
  CHECK(scores[0].hits == 1);
  REQUIRE(scores[0].precision.has_value());
  CHECK(*scores[0].precision == 0.5);
  REQUIRE(scores[0].recall.has_value());
  CHECK(*scores[0].recall == 1.0);

  CHECK(scores[1].family == "tcp");
  CHECK(scores[1].flagged == 1);
  CHECK(scores[1].injected == 2);
  CHECK(scores[1].hits == 1);
  CHECK(*scores[1].precision == 1.0);
  CHECK(*scores[1].recall == 0.5);
}

TEST_CASE("recovery scoring skips unknown families and empty tallies") {
  Report report;
  report.config.families = {{"signal", "radio", "Start.RSRP.dBm",
                             Direction::LowerIsWorse},
                            {"tcp", "tcp", "Abs_PacketLost_sum",
                             Direction::HigherIsWorse}};
  GroundTruth truth;
  truth.radio_fault = {false, false};
  truth.tcp_fault = {false, false};

  AnomalyRecord rec;
  rec.row_id = 0;
  rec.flags = {FlagState::Problem, FlagState::Ok};
  report.anomalies.push_back(rec);

  const auto scores = score_recovery(report, truth);
  REQUIRE(scores.size() == 1);  // "signal" has no truth column
  CHECK(scores[0].family == "tcp");
  CHECK(scores[0].flagged == 0);
  CHECK(scores[0].injected == 0);
  CHECK_FALSE(scores[0].precision.has_value());
  CHECK_FALSE(scores[0].recall.has_value());
}

TEST_CASE("recovery scoring rejects rows outside the campaign") {
  Report report;
  report.config.families = default_tool_config().pipeline.families;
  GroundTruth truth;
  truth.radio_fault = {false};
  truth.tcp_fault = {false};

  AnomalyRecord rec;
  rec.row_id = 99;
  rec.flags = {FlagState::Ok, FlagState::Ok};
  report.anomalies.push_back(rec);

  try {
    score_recovery(report, truth);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::IdMismatch);
  }
}
