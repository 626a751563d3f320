#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "netdiag/dataset.hpp"
#include "netdiag/pipeline.hpp"

namespace netdiag {

// Deterministic fault-injection campaign generator. Faults suppress the KPI
// without touching the round-trip columns, which is exactly the signature
// the anomaly stage is built to catch.
struct SynthConfig {
  std::size_t n_rows = 1000;
  std::uint64_t seed = 1;

  double rtt_mean_ms = 60.0;
  double rtt_spread = 0.35;  // log-space sigma
  double tdr_gain = 3.0e6;   // kpi = gain / rtt_avg, times noise

  double radio_fault_rate = 0.05;
  double tcp_fault_rate = 0.05;

  double rsrp_drop_db = 25.0;
  double rssi_drop_db = 20.0;
  double sinr_drop_db = 12.0;
  double loss_inflation = 40.0;    // extra lost packets (Poisson mean)
  double dupack_inflation = 10.0;  // extra triple-dupack events
  double idle_inflation = 5.0;     // idle-time multiplier
  double cwnd_shrink = 0.3;        // congestion-window multiplier
  double tdr_penalty = 0.2;        // KPI multiplier per carried fault

  double tdr_noise = 0.05;     // log-space sigma on the KPI
  double radio_noise_db = 4.0; // gaussian sigma on radio readings
  double tcp_noise = 0.3;      // log-space sigma on TCP magnitudes

  void validate() const;  // throws InvalidConfig
};

struct GroundTruth {
  std::vector<bool> radio_fault;  // indexed by row id
  std::vector<bool> tcp_fault;
};

// Column layout every generated campaign exposes; also the default schema
// for loading external data shaped the same way.
AttributeSchema synth_schema();

std::pair<Dataset, GroundTruth> generate(const SynthConfig& cfg);

void write_dataset_csv(const std::string& path, const Dataset& ds);
void write_truth_csv(const std::string& path, const GroundTruth& truth);

struct FamilyRecovery {
  std::string family;
  std::size_t flagged = 0;   // anomalies flagged problem
  std::size_t injected = 0;  // anomalies carrying the injected fault
  std::size_t hits = 0;      // overlap
  std::optional<double> precision;  // absent when nothing was flagged
  std::optional<double> recall;     // absent when nothing was injected
};

// Compares per-family problem flags to injected flags over the report's
// anomaly rows. Families are matched to truth columns by name ("radio",
// "tcp"); other families are skipped. Unscored rows are left out.
std::vector<FamilyRecovery> score_recovery(const Report& report,
                                           const GroundTruth& truth);

}  // namespace netdiag
