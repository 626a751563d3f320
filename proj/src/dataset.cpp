#include "netdiag/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "netdiag/csv.hpp"
#include "netdiag/errors.hpp"

namespace netdiag {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

}  // namespace

void AttributeSchema::validate() const {
  if (kpi_column.empty()) fail(Errc::InvalidConfig, "kpi column is not set");
  std::unordered_set<std::string> seen_groups;
  std::unordered_set<std::string> seen_columns;
  for (const auto& group : groups) {
    if (group.name.empty())
      fail(Errc::InvalidConfig, "attribute group with empty name");
    if (!seen_groups.insert(group.name).second)
      fail(Errc::InvalidConfig, "duplicate group '" + group.name + "'");
    if (group.columns.empty())
      fail(Errc::InvalidConfig, "group '" + group.name + "' has no columns");
    for (const auto& column : group.columns) {
      if (column == kpi_column)
        fail(Errc::InvalidConfig,
             "kpi column '" + kpi_column + "' listed in group '" + group.name +
                 "'");
      if (!seen_columns.insert(column).second)
        fail(Errc::InvalidConfig,
             "column '" + column + "' listed in more than one place");
    }
  }
  for (const auto& column : metadata_columns) {
    if (column == kpi_column || seen_columns.count(column))
      fail(Errc::InvalidConfig,
           "metadata column '" + column + "' collides with a numeric column");
    if (!seen_columns.insert(column).second)
      fail(Errc::InvalidConfig, "duplicate metadata column '" + column + "'");
  }
}

const AttributeGroup* AttributeSchema::find_group(
    const std::string& name) const {
  for (const auto& group : groups) {
    if (group.name == name) return &group;
  }
  return nullptr;
}

std::vector<std::string> AttributeSchema::numeric_columns() const {
  std::vector<std::string> names;
  names.push_back(kpi_column);
  for (const auto& group : groups) {
    names.insert(names.end(), group.columns.begin(), group.columns.end());
  }
  return names;
}

const std::vector<double>* Dataset::numeric_column(
    const std::string& name) const {
  for (std::size_t i = 0; i < numeric_names.size(); ++i) {
    if (numeric_names[i] == name) return &numeric[i];
  }
  return nullptr;
}

const std::vector<std::string>* Dataset::metadata_column(
    const std::string& name) const {
  for (std::size_t i = 0; i < metadata_names.size(); ++i) {
    if (metadata_names[i] == name) return &metadata[i];
  }
  return nullptr;
}

std::optional<std::size_t> FeatureMatrix::column_index(
    const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  return std::nullopt;
}

Predicate Predicate::equals(std::string column, std::string value) {
  Predicate p;
  p.kind = Kind::Equals;
  p.column = std::move(column);
  p.value = std::move(value);
  return p;
}

Predicate Predicate::in_range(std::string column, double low, double high) {
  Predicate p;
  p.kind = Kind::InRange;
  p.column = std::move(column);
  p.low = low;
  p.high = high;
  return p;
}

Dataset load_csv(const std::string& path, const AttributeSchema& schema) {
  schema.validate();
  const csv::Table table = csv::read_file(path);

  std::unordered_map<std::string, std::size_t> header_index;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    header_index.emplace(table.header[i], i);
  }
  auto locate = [&](const std::string& name) {
    const auto it = header_index.find(name);
    if (it == header_index.end())
      fail(Errc::MissingColumn, "column '" + name + "' not in header");
    return it->second;
  };

  Dataset ds;
  ds.schema = schema;
  ds.numeric_names = schema.numeric_columns();
  ds.metadata_names = schema.metadata_columns;

  std::vector<std::size_t> numeric_src;
  for (const auto& name : ds.numeric_names) numeric_src.push_back(locate(name));
  std::vector<std::size_t> metadata_src;
  for (const auto& name : ds.metadata_names)
    metadata_src.push_back(locate(name));

  const std::size_t n = table.rows.size();
  ds.row_ids.resize(n);
  ds.numeric.assign(ds.numeric_names.size(), std::vector<double>(n, kMissing));
  ds.metadata.assign(ds.metadata_names.size(), std::vector<std::string>(n));

  for (std::size_t r = 0; r < n; ++r) {
    ds.row_ids[r] = r;
    const auto& record = table.rows[r];
    for (std::size_t c = 0; c < numeric_src.size(); ++c) {
      const std::string& cell = record[numeric_src[c]];
      if (cell.empty()) continue;
      if (const auto value = csv::parse_double(cell)) {
        ds.numeric[c][r] = *value;
      } else {
        ++ds.parse_warnings;
      }
    }
    for (std::size_t c = 0; c < metadata_src.size(); ++c) {
      ds.metadata[c][r] = record[metadata_src[c]];
    }
  }
  return ds;
}

namespace {

Dataset take_rows(const Dataset& ds, const std::vector<std::size_t>& keep) {
  Dataset out;
  out.schema = ds.schema;
  out.numeric_names = ds.numeric_names;
  out.metadata_names = ds.metadata_names;
  out.parse_warnings = ds.parse_warnings;
  out.row_ids.reserve(keep.size());
  for (const std::size_t r : keep) out.row_ids.push_back(ds.row_ids[r]);
  out.numeric.reserve(ds.numeric.size());
  for (const auto& column : ds.numeric) {
    std::vector<double> slice;
    slice.reserve(keep.size());
    for (const std::size_t r : keep) slice.push_back(column[r]);
    out.numeric.push_back(std::move(slice));
  }
  out.metadata.reserve(ds.metadata.size());
  for (const auto& column : ds.metadata) {
    std::vector<std::string> slice;
    slice.reserve(keep.size());
    for (const std::size_t r : keep) slice.push_back(column[r]);
    out.metadata.push_back(std::move(slice));
  }
  return out;
}

}  // namespace

Dataset filter(const Dataset& ds, const std::vector<Predicate>& predicates) {
  struct Bound {
    const Predicate* pred;
    const std::vector<std::string>* text = nullptr;
    const std::vector<double>* nums = nullptr;
  };
  std::vector<Bound> bound;
  for (const auto& pred : predicates) {
    Bound b;
    b.pred = &pred;
    if (pred.kind == Predicate::Kind::Equals) {
      b.text = ds.metadata_column(pred.column);
      if (!b.text)
        fail(Errc::UnknownColumn,
             "no metadata column '" + pred.column + "' to match against");
    } else {
      b.nums = ds.numeric_column(pred.column);
      if (!b.nums)
        fail(Errc::UnknownColumn,
             "no numeric column '" + pred.column + "' to range-filter");
    }
    bound.push_back(b);
  }

  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    bool ok = true;
    for (const auto& b : bound) {
      if (b.text) {
        if ((*b.text)[r] != b.pred->value) {
          ok = false;
          break;
        }
      } else {
        const double v = (*b.nums)[r];
        if (!(v >= b.pred->low && v <= b.pred->high)) {  // NaN fails
          ok = false;
          break;
        }
      }
    }
    if (ok) keep.push_back(r);
  }
  return take_rows(ds, keep);
}

FeatureSelection select_columns(const Dataset& ds,
                                const std::vector<std::string>& columns) {
  std::vector<const std::vector<double>*> sources;
  for (const auto& name : columns) {
    const auto* column = ds.numeric_column(name);
    if (!column)
      fail(Errc::UnknownColumn, "no numeric column '" + name + "'");
    sources.push_back(column);
  }

  FeatureSelection sel;
  sel.matrix.columns = columns;
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    bool complete = true;
    for (const auto* column : sources) {
      if (std::isnan((*column)[r])) {
        complete = false;
        break;
      }
    }
    if (!complete) {
      sel.dropped_rows.push_back(ds.row_ids[r]);
      continue;
    }
    sel.matrix.row_ids.push_back(ds.row_ids[r]);
    for (const auto* column : sources) sel.matrix.values.push_back((*column)[r]);
  }
  if (sel.matrix.row_ids.empty() && ds.n_rows() > 0)
    fail(Errc::AllRowsDropped,
         "every row is missing a value in the requested columns");
  return sel;
}

FeatureSelection select_features(const Dataset& ds, const std::string& group) {
  const AttributeGroup* g = ds.schema.find_group(group);
  if (!g) fail(Errc::UnknownGroup, "no attribute group '" + group + "'");
  return select_columns(ds, g->columns);
}

Dataset subset(const Dataset& ds, const std::vector<RowId>& ids) {
  const std::unordered_set<RowId> wanted(ids.begin(), ids.end());
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    if (wanted.count(ds.row_ids[r])) keep.push_back(r);
  }
  return take_rows(ds, keep);
}

}  // namespace netdiag
