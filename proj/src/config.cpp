#include "netdiag/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "netdiag/csv.hpp"
#include "netdiag/errors.hpp"

namespace netdiag {

namespace {

std::string trim(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string::npos ? text.size() : comma;
    const std::string item = trim(text.substr(start, end - start));
    if (!item.empty()) items.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return items;
}

double parse_number(const std::string& key, const std::string& value) {
  const auto parsed = csv::parse_double(value);
  if (!parsed)
    fail(Errc::InvalidConfig, "key '" + key + "': '" + value +
                                  "' is not a number");
  return *parsed;
}

std::size_t parse_count(const std::string& key, const std::string& value,
                        std::size_t minimum) {
  const double number = parse_number(key, value);
  if (number < static_cast<double>(minimum) ||
      number != static_cast<double>(static_cast<std::size_t>(number)))
    fail(Errc::InvalidConfig, "key '" + key + "': expected an integer >= " +
                                  std::to_string(minimum));
  return static_cast<std::size_t>(number);
}

std::uint64_t parse_seed(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  for (const char ch : value) {
    if (ch < '0' || ch > '9')
      fail(Errc::InvalidConfig,
           "key '" + key + "': seeds are unsigned integers");
    out = out * 10 + static_cast<std::uint64_t>(ch - '0');
  }
  if (value.empty())
    fail(Errc::InvalidConfig, "key '" + key + "': empty seed");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  fail(Errc::InvalidConfig, "key '" + key + "': expected true or false");
}

Direction parse_direction(const std::string& key, const std::string& value) {
  if (value == "higher-is-worse") return Direction::HigherIsWorse;
  if (value == "lower-is-worse") return Direction::LowerIsWorse;
  fail(Errc::InvalidConfig,
       "key '" + key + "': expected higher-is-worse or lower-is-worse");
}

struct FamilyDraft {
  std::string name;
  std::string group;
  std::string severity;
  bool has_direction = false;
  Direction direction = Direction::HigherIsWorse;
};

}  // namespace

ToolConfig default_tool_config() {
  ToolConfig cfg;
  cfg.schema = synth_schema();
  cfg.pipeline.kpi_group = "rtt";
  cfg.pipeline.families = {
      {"radio", "radio", "Start.RSRP.dBm", Direction::LowerIsWorse},
      {"tcp", "tcp", "Abs_PacketLost_sum", Direction::HigherIsWorse},
  };
  return cfg;
}

ToolConfig parse_config_text(const std::string& text) {
  ToolConfig cfg = default_tool_config();

  std::unordered_set<std::string> seen;
  std::vector<AttributeGroup> groups;
  std::vector<std::string> metadata;
  bool groups_set = false;
  bool metadata_set = false;
  std::vector<FamilyDraft> families;
  auto family_draft = [&families](const std::string& name) -> FamilyDraft& {
    for (auto& draft : families) {
      if (draft.name == name) return draft;
    }
    families.push_back({name, "", "", false, Direction::HigherIsWorse});
    return families.back();
  };

  std::istringstream in(text);
  std::string raw_line;
  std::size_t line_no = 0;
  while (std::getline(in, raw_line)) {
    ++line_no;
    const auto hash = raw_line.find('#');
    if (hash != std::string::npos) raw_line.erase(hash);
    const std::string line = trim(raw_line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(Errc::InvalidConfig,
           "line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      fail(Errc::InvalidConfig,
           "line " + std::to_string(line_no) + ": missing key");
    if (!seen.insert(key).second)
      fail(Errc::InvalidConfig, "duplicate key '" + key + "'");

    if (key == "kpi") {
      cfg.schema.kpi_column = value;
    } else if (key.rfind("group.", 0) == 0) {
      const std::string name = key.substr(6);
      if (name.empty())
        fail(Errc::InvalidConfig, "group key with empty name");
      groups.push_back({name, split_list(value)});
      groups_set = true;
    } else if (key == "metadata") {
      metadata = split_list(value);
      metadata_set = true;
    } else if (key.rfind("filter_range.", 0) == 0) {
      const std::string column = key.substr(13);
      const auto sep = value.find("..");
      if (column.empty() || sep == std::string::npos)
        fail(Errc::InvalidConfig,
             "key '" + key + "': expected <low>..<high>");
      const double low = parse_number(key, trim(value.substr(0, sep)));
      const double high = parse_number(key, trim(value.substr(sep + 2)));
      if (low > high)
        fail(Errc::InvalidConfig, "key '" + key + "': low exceeds high");
      cfg.pipeline.filters.push_back(Predicate::in_range(column, low, high));
    } else if (key.rfind("filter.", 0) == 0) {
      const std::string column = key.substr(7);
      if (column.empty())
        fail(Errc::InvalidConfig, "filter key with empty column");
      cfg.pipeline.filters.push_back(Predicate::equals(column, value));
    } else if (key == "kpi_group") {
      cfg.pipeline.kpi_group = value;
    } else if (key == "label.low_q") {
      cfg.pipeline.low_q = parse_number(key, value);
    } else if (key == "label.high_q") {
      cfg.pipeline.high_q = parse_number(key, value);
    } else if (key == "tree.max_depth") {
      if (value == "auto") {
        cfg.pipeline.max_depth.reset();
      } else {
        cfg.pipeline.max_depth = parse_count(key, value, 1);
      }
    } else if (key == "tree.min_leaf") {
      cfg.pipeline.min_leaf = parse_count(key, value, 1);
    } else if (key == "tree.min_support") {
      cfg.pipeline.min_support = parse_count(key, value, 1);
    } else if (key == "kmeans.k") {
      if (value == "auto") {
        cfg.pipeline.k.reset();
      } else {
        cfg.pipeline.k = parse_count(key, value, 1);
      }
    } else if (key == "kmeans.k_min") {
      cfg.pipeline.k_min = parse_count(key, value, 2);
    } else if (key == "kmeans.k_max") {
      cfg.pipeline.k_max = parse_count(key, value, 2);
    } else if (key == "kmeans.n_init") {
      cfg.pipeline.kmeans.n_init = parse_count(key, value, 1);
    } else if (key == "kmeans.max_iter") {
      cfg.pipeline.kmeans.max_iter = parse_count(key, value, 1);
    } else if (key == "kmeans.tol") {
      cfg.pipeline.kmeans.tol = parse_number(key, value);
    } else if (key == "kmeans.min_silhouette") {
      cfg.pipeline.min_silhouette = parse_number(key, value);
    } else if (key.rfind("family.", 0) == 0) {
      const std::string rest = key.substr(7);
      const auto dot = rest.find('.');
      if (dot == std::string::npos || dot == 0)
        fail(Errc::InvalidConfig,
             "key '" + key + "': expected family.<name>.<field>");
      const std::string name = rest.substr(0, dot);
      const std::string field = rest.substr(dot + 1);
      FamilyDraft& draft = family_draft(name);
      if (field == "group") {
        draft.group = value;
      } else if (field == "severity") {
        draft.severity = value;
      } else if (field == "direction") {
        draft.direction = parse_direction(key, value);
        draft.has_direction = true;
      } else {
        fail(Errc::InvalidConfig,
             "key '" + key + "': unknown family field '" + field + "'");
      }
    } else if (key == "seed") {
      const std::uint64_t seed = parse_seed(key, value);
      cfg.pipeline.seed = seed;
      cfg.synth.seed = seed;
    } else if (key == "holdout") {
      cfg.pipeline.holdout = parse_bool(key, value);
    } else if (key == "holdout.fraction") {
      cfg.pipeline.holdout_fraction = parse_number(key, value);
    } else if (key == "synth.n_rows") {
      cfg.synth.n_rows = parse_count(key, value, 1);
    } else if (key == "synth.rtt_mean_ms") {
      cfg.synth.rtt_mean_ms = parse_number(key, value);
    } else if (key == "synth.rtt_spread") {
      cfg.synth.rtt_spread = parse_number(key, value);
    } else if (key == "synth.tdr_gain") {
      cfg.synth.tdr_gain = parse_number(key, value);
    } else if (key == "synth.radio_fault_rate") {
      cfg.synth.radio_fault_rate = parse_number(key, value);
    } else if (key == "synth.tcp_fault_rate") {
      cfg.synth.tcp_fault_rate = parse_number(key, value);
    } else if (key == "synth.rsrp_drop_db") {
      cfg.synth.rsrp_drop_db = parse_number(key, value);
    } else if (key == "synth.rssi_drop_db") {
      cfg.synth.rssi_drop_db = parse_number(key, value);
    } else if (key == "synth.sinr_drop_db") {
      cfg.synth.sinr_drop_db = parse_number(key, value);
    } else if (key == "synth.loss_inflation") {
      cfg.synth.loss_inflation = parse_number(key, value);
    } else if (key == "synth.dupack_inflation") {
      cfg.synth.dupack_inflation = parse_number(key, value);
    } else if (key == "synth.idle_inflation") {
      cfg.synth.idle_inflation = parse_number(key, value);
    } else if (key == "synth.cwnd_shrink") {
      cfg.synth.cwnd_shrink = parse_number(key, value);
    } else if (key == "synth.tdr_penalty") {
      cfg.synth.tdr_penalty = parse_number(key, value);
    } else if (key == "synth.tdr_noise") {
      cfg.synth.tdr_noise = parse_number(key, value);
    } else if (key == "synth.radio_noise_db") {
      cfg.synth.radio_noise_db = parse_number(key, value);
    } else if (key == "synth.tcp_noise") {
      cfg.synth.tcp_noise = parse_number(key, value);
    } else {
      fail(Errc::InvalidConfig, "unknown key '" + key + "'");
    }
  }

  if (groups_set) cfg.schema.groups = std::move(groups);
  if (metadata_set) cfg.schema.metadata_columns = std::move(metadata);
  if (!families.empty()) {
    cfg.pipeline.families.clear();
    for (const auto& draft : families) {
      if (draft.group.empty() || draft.severity.empty())
        fail(Errc::InvalidConfig,
             "family '" + draft.name + "' needs both group and severity");
      cfg.pipeline.families.push_back(
          {draft.name, draft.group, draft.severity, draft.direction});
    }
  }

  cfg.schema.validate();
  if (!(cfg.pipeline.low_q > 0.0 && cfg.pipeline.low_q < 100.0 &&
        cfg.pipeline.high_q > 0.0 && cfg.pipeline.high_q < 100.0 &&
        cfg.pipeline.low_q < cfg.pipeline.high_q))
    fail(Errc::InvalidConfig,
         "label percentiles must satisfy 0 < low < high < 100");
  if (cfg.pipeline.k_min > cfg.pipeline.k_max)
    fail(Errc::InvalidConfig, "kmeans.k_min exceeds kmeans.k_max");
  if (cfg.pipeline.holdout &&
      !(cfg.pipeline.holdout_fraction > 0.0 &&
        cfg.pipeline.holdout_fraction < 1.0))
    fail(Errc::InvalidConfig, "holdout.fraction must lie in (0, 1)");
  if (!cfg.schema.find_group(cfg.pipeline.kpi_group))
    fail(Errc::InvalidConfig,
         "kpi_group '" + cfg.pipeline.kpi_group + "' is not a declared group");
  for (const auto& family : cfg.pipeline.families) {
    const AttributeGroup* group = cfg.schema.find_group(family.group);
    if (!group)
      fail(Errc::InvalidConfig, "family '" + family.name +
                                    "' references unknown group '" +
                                    family.group + "'");
    if (std::find(group->columns.begin(), group->columns.end(),
                  family.severity_attribute) == group->columns.end())
      fail(Errc::InvalidConfig,
           "family '" + family.name + "': severity attribute '" +
               family.severity_attribute + "' is not in group '" +
               family.group + "'");
  }
  cfg.synth.validate();
  return cfg;
}

ToolConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(Errc::InvalidConfig, "cannot open config '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

}  // namespace netdiag
