// netdiag: percentile-labels a throughput KPI, screens it with a decision
// tree, clusters the misclassified rows per cause family, and emits
// root-cause rules plus plot-ready CSV files.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "netdiag/cart.hpp"
#include "netdiag/config.hpp"
#include "netdiag/csv.hpp"
#include "netdiag/dataset.hpp"
#include "netdiag/errors.hpp"
#include "netdiag/labeling.hpp"
#include "netdiag/pipeline.hpp"
#include "netdiag/report_io.hpp"
#include "netdiag/synth.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitPipeline = 4;
constexpr int kExitUnknownRow = 5;

// Rethrows the in-flight exception, prints a one-line JSON error, and hands
// back the phase's exit code (UnknownRow keeps its dedicated code).
int fail_exit(int phase_code) {
  nlohmann::ordered_json line;
  int code = phase_code;
  try {
    throw;
  } catch (const netdiag::Error& e) {
    line["error"] = netdiag::errc_name(e.code());
    line["message"] = e.message();
    if (e.code() == netdiag::Errc::UnknownRow) code = kExitUnknownRow;
  } catch (const std::exception& e) {
    line["error"] = "Internal";
    line["message"] = e.what();
  }
  std::cerr << line.dump() << "\n";
  return code;
}

struct CommonArgs {
  std::string config_path;
  std::string data_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool svg = false;
  bool verbose = false;
};

void note(const CommonArgs& args, const std::string& text) {
  if (args.verbose) std::cerr << text << "\n";
}

netdiag::ToolConfig load_config(const CommonArgs& args) {
  netdiag::ToolConfig cfg = args.config_path.empty()
                                ? netdiag::default_tool_config()
                                : netdiag::parse_config_file(args.config_path);
  if (args.seed) {
    cfg.pipeline.seed = *args.seed;
    cfg.synth.seed = *args.seed;
  }
  return cfg;
}

void ensure_out_dir(const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec)
    netdiag::fail(netdiag::Errc::IoError,
                  "cannot create output directory '" + out_dir + "'");
}

int cmd_run(const CommonArgs& args) {
  netdiag::ToolConfig cfg;
  try {
    cfg = load_config(args);
  } catch (...) {
    return fail_exit(kExitConfig);
  }

  netdiag::Dataset ds;
  try {
    ds = netdiag::load_csv(args.data_path, cfg.schema);
  } catch (...) {
    return fail_exit(kExitData);
  }
  note(args, "loaded " + std::to_string(ds.n_rows()) + " rows (" +
                 std::to_string(ds.parse_warnings) + " parse warnings)");

  try {
    const netdiag::Report report = netdiag::run_pipeline(ds, cfg.pipeline);
    note(args, "labeled " + std::to_string(report.labeling.row_ids.size()) +
                   " rows, " + std::to_string(report.anomalies.size()) +
                   " anomalies");
    ensure_out_dir(args.out_dir);
    netdiag::write_report(report, args.out_dir);
    if (args.svg)
      netdiag::write_scatter_svg(args.out_dir + "/scatter.svg",
                                 report.scatter);
    note(args, "wrote report to " + args.out_dir);
  } catch (...) {
    return fail_exit(kExitPipeline);
  }
  return 0;
}

int cmd_synth(const CommonArgs& args) {
  netdiag::ToolConfig cfg;
  try {
    cfg = load_config(args);
    cfg.synth.validate();
  } catch (...) {
    return fail_exit(kExitConfig);
  }

  try {
    const auto [ds, truth] = netdiag::generate(cfg.synth);
    ensure_out_dir(args.out_dir);
    netdiag::write_dataset_csv(args.out_dir + "/dataset.csv", ds);
    netdiag::write_truth_csv(args.out_dir + "/truth.csv", truth);
    note(args, "wrote " + std::to_string(ds.n_rows()) + " rows to " +
                   args.out_dir);
  } catch (...) {
    return fail_exit(kExitPipeline);
  }
  return 0;
}

struct SweepArgs {
  std::string depths = "1..10";
  std::size_t folds = 10;
  std::size_t repeats = 30;
};

std::vector<std::size_t> parse_depth_range(const std::string& text) {
  const auto sep = text.find("..");
  const auto as_count = [&text](const std::string& part) -> std::size_t {
    const auto value = netdiag::csv::parse_double(part);
    if (!value || *value < 1.0 ||
        *value != static_cast<double>(static_cast<std::size_t>(*value)))
      netdiag::fail(netdiag::Errc::InvalidConfig,
                    "--depths: '" + text + "' is not <low>..<high>");
    return static_cast<std::size_t>(*value);
  };
  if (sep == std::string::npos)
    netdiag::fail(netdiag::Errc::InvalidConfig,
                  "--depths: '" + text + "' is not <low>..<high>");
  const std::size_t low = as_count(text.substr(0, sep));
  const std::size_t high = as_count(text.substr(sep + 2));
  if (low > high)
    netdiag::fail(netdiag::Errc::InvalidConfig, "--depths: low exceeds high");
  std::vector<std::size_t> depths;
  for (std::size_t d = low; d <= high; ++d) depths.push_back(d);
  return depths;
}

int cmd_sweep_depth(const CommonArgs& args, const SweepArgs& sweep) {
  netdiag::ToolConfig cfg;
  std::vector<std::size_t> depths;
  try {
    cfg = load_config(args);
    depths = parse_depth_range(sweep.depths);
  } catch (...) {
    return fail_exit(kExitConfig);
  }

  netdiag::Dataset ds;
  try {
    ds = netdiag::load_csv(args.data_path, cfg.schema);
  } catch (...) {
    return fail_exit(kExitData);
  }

  try {
    const netdiag::LabeledSlice slice =
        netdiag::prepare_labeled_slice(ds, cfg.pipeline);
    note(args, "cross-validating " + std::to_string(slice.X.n_rows()) +
                   " rows over " + std::to_string(depths.size()) + " depths");
    const std::vector<netdiag::DepthScore> scores = netdiag::cross_validate(
        slice.X, slice.y, depths, cfg.pipeline.min_leaf, sweep.folds,
        sweep.repeats, cfg.pipeline.seed, netdiag::kKpiClassCount);
    ensure_out_dir(args.out_dir);
    netdiag::write_depth_scores_csv(args.out_dir + "/depth_scores.csv",
                                    scores);
    if (args.svg)
      netdiag::write_depth_curve_svg(args.out_dir + "/depth_accuracy.svg",
                                     scores);
    note(args, "wrote depth scores to " + args.out_dir);
  } catch (...) {
    return fail_exit(kExitPipeline);
  }
  return 0;
}

std::size_t table_column(const netdiag::csv::Table& table,
                         const std::string& name, const std::string& file) {
  for (std::size_t i = 0; i < table.header.size(); ++i)
    if (table.header[i] == name) return i;
  netdiag::fail(netdiag::Errc::MissingColumn,
                file + " has no '" + name + "' column");
}

int cmd_explain(const std::string& report_dir, std::uint64_t row_id) {
  netdiag::csv::Table anomalies;
  try {
    anomalies = netdiag::csv::read_file(report_dir + "/anomalies.csv");
  } catch (...) {
    return fail_exit(kExitData);
  }

  try {
    const std::string wanted = std::to_string(row_id);
    const std::size_t id_col = table_column(anomalies, "row_id", "anomalies.csv");
    const std::vector<std::string>* record = nullptr;
    for (const auto& row : anomalies.rows) {
      if (row[id_col] == wanted) {
        record = &row;
        break;
      }
    }
    if (!record)
      netdiag::fail(netdiag::Errc::UnknownRow,
                    "row " + wanted + " is not in anomalies.csv");

    const auto field = [&](const std::string& name) {
      return (*record)[table_column(anomalies, name, "anomalies.csv")];
    };

    std::cout << "row " << wanted << ": true " << field("true_label")
              << ", predicted " << field("predicted_label") << "\n";

    std::string flags;
    for (std::size_t i = 0; i < anomalies.header.size(); ++i) {
      const std::string& name = anomalies.header[i];
      if (name.size() > 5 && name.ends_with("_flag")) {
        if (!flags.empty()) flags += ' ';
        flags += name.substr(0, name.size() - 5) + "=" + (*record)[i];
      }
    }
    if (!flags.empty()) std::cout << "flags: " << flags << "\n";

    const std::string rule_id = field("rule_id");
    if (!rule_id.empty()) {
      const netdiag::csv::Table rules =
          netdiag::csv::read_file(report_dir + "/cause_rules.csv");
      const std::size_t rid_col = table_column(rules, "rule_id", "cause_rules.csv");
      const std::size_t text_col = table_column(rules, "rule", "cause_rules.csv");
      bool found = false;
      for (const auto& row : rules.rows) {
        if (row[rid_col] == rule_id) {
          std::cout << row[text_col] << "\n";
          found = true;
          break;
        }
      }
      if (!found)
        netdiag::fail(netdiag::Errc::MalformedRecord,
                      "rule " + rule_id + " is not in cause_rules.csv");
    }

    const std::string diagnosis = field("diagnosis");
    if (diagnosis.empty()) {
      std::cout << "diagnosis: unscored\n";
    } else {
      std::cout << "diagnosis: " << diagnosis << " (probability "
                << field("probability") << ")\n";
    }
  } catch (...) {
    return fail_exit(kExitData);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Diagnoses throughput anomalies in network measurement campaigns: "
      "percentile KPI labels, a decision-tree screen, per-family clustering "
      "of the misclassified rows, and root-cause rules."};
  app.require_subcommand(1);

  CommonArgs args;
  SweepArgs sweep;
  std::string report_dir;
  std::uint64_t row_id = 0;

  const auto add_common = [&args](CLI::App* cmd, bool with_data) {
    cmd->add_option("--config", args.config_path,
                    "key = value config file (defaults cover generated data)");
    if (with_data)
      cmd->add_option("--data", args.data_path, "input CSV")->required();
    cmd->add_option("--out", args.out_dir, "output directory")->required();
    cmd->add_option("--seed", args.seed, "override every configured seed");
    cmd->add_flag("--svg", args.svg, "also emit SVG plots");
    cmd->add_flag("--verbose", args.verbose, "progress notes on stderr");
  };

  CLI::App* run = app.add_subcommand(
      "run", "full analysis: label, screen, cluster, explain");
  add_common(run, true);

  CLI::App* synth = app.add_subcommand(
      "synth", "generate a fault-injection campaign plus ground truth");
  add_common(synth, false);

  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep-depth", "cross-validated accuracy per tree depth");
  add_common(sweep_cmd, true);
  sweep_cmd->add_option("--depths", sweep.depths, "inclusive range, e.g. 1..10");
  sweep_cmd->add_option("--folds", sweep.folds, "cross-validation folds")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1000}));
  sweep_cmd->add_option("--repeats", sweep.repeats, "shuffle repeats")
      ->check(CLI::Range(std::size_t{1}, std::size_t{10000}));

  CLI::App* explain = app.add_subcommand(
      "explain", "print the diagnosis rule chain for one anomaly row");
  explain->add_option("--report", report_dir, "directory written by run")
      ->required();
  explain->add_option("--row", row_id, "row id from anomalies.csv")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    nlohmann::ordered_json line;
    line["error"] = "InvalidConfig";
    line["message"] = std::string(e.what());
    std::cerr << line.dump() << "\n";
    return kExitConfig;
  }

  if (run->parsed()) return cmd_run(args);
  if (synth->parsed()) return cmd_synth(args);
  if (sweep_cmd->parsed()) return cmd_sweep_depth(args, sweep);
  return cmd_explain(report_dir, row_id);
}
