#include "netdiag/synth.hpp"

#include <cmath>

#include "netdiag/csv.hpp"
#include "netdiag/errors.hpp"
#include "netdiag/rng.hpp"

namespace netdiag {

namespace {

constexpr double kRssiHealthyDbm = -57.0;
constexpr double kRsrpHealthyDbm = -85.0;
constexpr double kSinrHealthyDb = 18.0;
constexpr double kCwinAvgBytes = 250000.0;
constexpr double kRwinAvgBytes = 1.0e6;
constexpr double kLossMean = 2.0;
constexpr double kIdleMeanMs = 40.0;
constexpr double kDupackMean = 1.0;

const char* const kCountries[] = {"SE", "NO", "IT", "ES"};
const char* const kServices[] = {"web", "video", "bulk"};

}  // namespace

void SynthConfig::validate() const {
  if (n_rows < 1) fail(Errc::InvalidConfig, "need at least one row");
  auto rate = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (!rate(radio_fault_rate) || !rate(tcp_fault_rate))
    fail(Errc::InvalidConfig, "fault rates must lie in [0, 1]");
  if (radio_fault_rate + tcp_fault_rate > 1.0)
    fail(Errc::InvalidConfig, "fault rates must sum to at most 1");
  if (!(rtt_mean_ms > 0.0) || !(tdr_gain > 0.0))
    fail(Errc::InvalidConfig, "baseline magnitudes must be positive");
  if (rtt_spread < 0.0 || tdr_noise < 0.0 || radio_noise_db < 0.0 ||
      tcp_noise < 0.0)
    fail(Errc::InvalidConfig, "noise levels cannot be negative");
  if (!(tdr_penalty > 0.0 && tdr_penalty <= 1.0))
    fail(Errc::InvalidConfig, "KPI penalty must lie in (0, 1]");
  if (!(cwnd_shrink > 0.0 && cwnd_shrink <= 1.0))
    fail(Errc::InvalidConfig, "congestion-window shrink must lie in (0, 1]");
  if (loss_inflation < 0.0 || dupack_inflation < 0.0 || idle_inflation < 1.0)
    fail(Errc::InvalidConfig, "fault inflations must not reduce severity");
  if (rsrp_drop_db < 0.0 || rssi_drop_db < 0.0 || sinr_drop_db < 0.0)
    fail(Errc::InvalidConfig, "radio drops cannot be negative");
}

AttributeSchema synth_schema() {
  AttributeSchema schema;
  schema.kpi_column = "tdr_kbps";
  schema.groups = {
      {"rtt", {"Abs_RTT_avg", "Abs_RTT_min", "Abs_RTT_max", "Abs_RTT_std"}},
      {"radio",
       {"Start.RSSI.dBm", "End.RSSI.dBm", "Start.RSRP.dBm", "End.RSRP.dBm",
        "Start.SINR.dB", "End.SINR.dB"}},
      {"tcp",
       {"Abs_CWIN_avg", "Abs_CWIN_max", "Abs_RWIN_avg", "Abs_RWIN_max",
        "Abs_PacketLost_sum", "Abs_IdleTime_avg", "triple_dupacks_b2a"}},
  };
  schema.metadata_columns = {"country", "operator", "service"};
  return schema;
}

std::pair<Dataset, GroundTruth> generate(const SynthConfig& cfg) {
  cfg.validate();
  const AttributeSchema schema = synth_schema();

  Dataset ds;
  ds.schema = schema;
  ds.numeric_names = schema.numeric_columns();
  ds.metadata_names = schema.metadata_columns;
  const std::size_t n = cfg.n_rows;
  ds.row_ids.resize(n);
  ds.numeric.assign(ds.numeric_names.size(), std::vector<double>(n));
  ds.metadata.assign(ds.metadata_names.size(), std::vector<std::string>(n));

  GroundTruth truth;
  truth.radio_fault.resize(n);
  truth.tcp_fault.resize(n);

  // column positions follow numeric_columns(): kpi, rtt group, radio group,
  // tcp group
  enum Col {
    kTdr = 0,
    kRttAvg, kRttMin, kRttMax, kRttStd,
    kStartRssi, kEndRssi, kStartRsrp, kEndRsrp, kStartSinr, kEndSinr,
    kCwinAvg, kCwinMax, kRwinAvg, kRwinMax, kLoss, kIdle, kDupacks,
  };

  const double log_rtt_mean = std::log(cfg.rtt_mean_ms);
  const double log_cwin = std::log(kCwinAvgBytes);
  const double log_rwin = std::log(kRwinAvgBytes);
  const double log_idle = std::log(kIdleMeanMs);

  for (std::size_t i = 0; i < n; ++i) {
    ds.row_ids[i] = i;
    Rng rng(Rng::mix(cfg.seed, i));

    const bool radio_fault = rng.bernoulli(cfg.radio_fault_rate);
    const bool tcp_fault = rng.bernoulli(cfg.tcp_fault_rate);
    truth.radio_fault[i] = radio_fault;
    truth.tcp_fault[i] = tcp_fault;

    const double rtt_avg = rng.lognormal(log_rtt_mean, cfg.rtt_spread);
    const double rtt_min = rtt_avg * rng.uniform(0.5, 0.9);
    const double rtt_max = rtt_avg * rng.uniform(1.2, 2.5);
    const double rtt_std = (rtt_max - rtt_min) * rng.uniform(0.15, 0.35);

    double tdr = cfg.tdr_gain / rtt_avg * rng.lognormal(0.0, cfg.tdr_noise);
    if (radio_fault) tdr *= cfg.tdr_penalty;
    if (tcp_fault) tdr *= cfg.tdr_penalty;

    const double half_noise = cfg.radio_noise_db / 2.0;
    double start_rssi = kRssiHealthyDbm + rng.normal(0.0, cfg.radio_noise_db);
    double end_rssi = start_rssi + rng.normal(0.0, half_noise);
    double start_rsrp = kRsrpHealthyDbm + rng.normal(0.0, cfg.radio_noise_db);
    double end_rsrp = start_rsrp + rng.normal(0.0, half_noise);
    double start_sinr = kSinrHealthyDb + rng.normal(0.0, cfg.radio_noise_db);
    double end_sinr = start_sinr + rng.normal(0.0, half_noise);
    if (radio_fault) {
      start_rssi -= cfg.rssi_drop_db;
      end_rssi -= cfg.rssi_drop_db;
      start_rsrp -= cfg.rsrp_drop_db;
      end_rsrp -= cfg.rsrp_drop_db;
      start_sinr -= cfg.sinr_drop_db;
      end_sinr -= cfg.sinr_drop_db;
    }

    double cwin_avg = rng.lognormal(log_cwin, cfg.tcp_noise);
    double cwin_max = cwin_avg * rng.uniform(1.5, 3.0);
    const double rwin_avg = rng.lognormal(log_rwin, cfg.tcp_noise);
    const double rwin_max = rwin_avg * rng.uniform(1.2, 2.0);
    double loss = static_cast<double>(rng.poisson(kLossMean));
    double idle = rng.lognormal(log_idle, cfg.tcp_noise);
    double dupacks = static_cast<double>(rng.poisson(kDupackMean));
    if (tcp_fault) {
      loss += static_cast<double>(rng.poisson(cfg.loss_inflation));
      dupacks += static_cast<double>(rng.poisson(cfg.dupack_inflation));
      idle *= cfg.idle_inflation;
      cwin_avg *= cfg.cwnd_shrink;
      cwin_max *= cfg.cwnd_shrink;
    }

    ds.numeric[kTdr][i] = tdr;
    ds.numeric[kRttAvg][i] = rtt_avg;
    ds.numeric[kRttMin][i] = rtt_min;
    ds.numeric[kRttMax][i] = rtt_max;
    ds.numeric[kRttStd][i] = rtt_std;
    ds.numeric[kStartRssi][i] = start_rssi;
    ds.numeric[kEndRssi][i] = end_rssi;
    ds.numeric[kStartRsrp][i] = start_rsrp;
    ds.numeric[kEndRsrp][i] = end_rsrp;
    ds.numeric[kStartSinr][i] = start_sinr;
    ds.numeric[kEndSinr][i] = end_sinr;
    ds.numeric[kCwinAvg][i] = cwin_avg;
    ds.numeric[kCwinMax][i] = cwin_max;
    ds.numeric[kRwinAvg][i] = rwin_avg;
    ds.numeric[kRwinMax][i] = rwin_max;
    ds.numeric[kLoss][i] = loss;
    ds.numeric[kIdle][i] = idle;
    ds.numeric[kDupacks][i] = dupacks;

    ds.metadata[0][i] = kCountries[i % 4];
    ds.metadata[1][i] = "op" + std::to_string(i % 3);
    ds.metadata[2][i] = kServices[(i / 4) % 3];
  }
  return {std::move(ds), std::move(truth)};
}

void write_dataset_csv(const std::string& path, const Dataset& ds) {
  csv::Table table;
  table.header.push_back("row_id");
  for (const auto& name : ds.numeric_names) table.header.push_back(name);
  for (const auto& name : ds.metadata_names) table.header.push_back(name);

  table.rows.reserve(ds.n_rows());
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    std::vector<std::string> record;
    record.reserve(table.header.size());
    record.push_back(std::to_string(ds.row_ids[r]));
    for (const auto& column : ds.numeric) {
      record.push_back(std::isnan(column[r]) ? ""
                                             : csv::format_double(column[r]));
    }
    for (const auto& column : ds.metadata) record.push_back(column[r]);
    table.rows.push_back(std::move(record));
  }
  csv::write_file(path, table);
}

void write_truth_csv(const std::string& path, const GroundTruth& truth) {
  csv::Table table;
  table.header = {"row_id", "radio_fault", "tcp_fault"};
  table.rows.reserve(truth.radio_fault.size());
  for (std::size_t i = 0; i < truth.radio_fault.size(); ++i) {
    table.rows.push_back({std::to_string(i), truth.radio_fault[i] ? "1" : "0",
                          truth.tcp_fault[i] ? "1" : "0"});
  }
  csv::write_file(path, table);
}

std::vector<FamilyRecovery> score_recovery(const Report& report,
                                           const GroundTruth& truth) {
  const std::size_t n_rows = truth.radio_fault.size();
  std::vector<FamilyRecovery> out;
  for (std::size_t f = 0; f < report.config.families.size(); ++f) {
    const std::string& name = report.config.families[f].name;
    const std::vector<bool>* injected = nullptr;
    if (name == "radio") injected = &truth.radio_fault;
    if (name == "tcp") injected = &truth.tcp_fault;
    if (!injected) continue;

    FamilyRecovery fr;
    fr.family = name;
    for (const auto& rec : report.anomalies) {
      if (rec.row_id >= n_rows)
        fail(Errc::IdMismatch,
             "anomaly row " + std::to_string(rec.row_id) +
                 " outside the ground-truth campaign");
      if (rec.flags[f] == FlagState::Unscored) continue;
      const bool flagged = rec.flags[f] == FlagState::Problem;
      const bool is_injected = (*injected)[rec.row_id];
      fr.flagged += flagged ? 1 : 0;
      fr.injected += is_injected ? 1 : 0;
      fr.hits += (flagged && is_injected) ? 1 : 0;
    }
    if (fr.flagged > 0) {
      fr.precision = static_cast<double>(fr.hits) /
                     static_cast<double>(fr.flagged);
    }
    if (fr.injected > 0) {
      fr.recall = static_cast<double>(fr.hits) /
                  static_cast<double>(fr.injected);
    }
    out.push_back(std::move(fr));
  }
  return out;
}

}  // namespace netdiag
