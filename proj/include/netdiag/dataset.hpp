#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace netdiag {

using RowId = std::uint64_t;

struct AttributeGroup {
  std::string name;
  std::vector<std::string> columns;
};

// Declares which CSV columns matter: one target KPI column, named groups of
// numeric feature columns, and string metadata columns usable in filters.
struct AttributeSchema {
  std::string kpi_column;
  std::vector<AttributeGroup> groups;
  std::vector<std::string> metadata_columns;

  // Throws InvalidConfig when the KPI sits in a group, a column is listed
  // twice, a group is empty, or metadata overlaps the numeric columns.
  void validate() const;

  const AttributeGroup* find_group(const std::string& name) const;

  // kpi first, then group columns in declaration order
  std::vector<std::string> numeric_columns() const;
};

// Column-major table. Numeric cells use NaN for missing; row ids are 0-based
// data-line ordinals from the source file and survive every transformation.
class Dataset {
 public:
  AttributeSchema schema;
  std::vector<RowId> row_ids;
  std::vector<std::string> numeric_names;
  std::vector<std::vector<double>> numeric;
  std::vector<std::string> metadata_names;
  std::vector<std::vector<std::string>> metadata;
  std::size_t parse_warnings = 0;

  std::size_t n_rows() const { return row_ids.size(); }
  const std::vector<double>* numeric_column(const std::string& name) const;
  const std::vector<std::string>* metadata_column(const std::string& name) const;
};

// Dense feature slice; construction guarantees no missing values.
struct FeatureMatrix {
  std::vector<RowId> row_ids;
  std::vector<std::string> columns;
  std::vector<double> values;  // row-major

  std::size_t n_rows() const { return row_ids.size(); }
  std::size_t n_cols() const { return columns.size(); }
  double at(std::size_t row, std::size_t col) const {
    return values[row * columns.size() + col];
  }
  std::span<const double> row(std::size_t index) const {
    return {values.data() + index * columns.size(), columns.size()};
  }
  std::optional<std::size_t> column_index(const std::string& name) const;
};

struct FeatureSelection {
  FeatureMatrix matrix;
  std::vector<RowId> dropped_rows;  // rows excluded for missing values
};

struct Predicate {
  enum class Kind { Equals, InRange };
  Kind kind;
  std::string column;
  std::string value;  // Equals only
  double low = 0.0;   // InRange, closed on both ends
  double high = 0.0;

  static Predicate equals(std::string column, std::string value);
  static Predicate in_range(std::string column, double low, double high);
};

// Reads only the columns the schema declares. Unparseable numeric cells
// become missing and bump parse_warnings; empty cells are silently missing.
Dataset load_csv(const std::string& path, const AttributeSchema& schema);

// Conjunction of predicates; preserves row ids and order.
Dataset filter(const Dataset& ds, const std::vector<Predicate>& predicates);

// Matrix over one schema group. Rows missing any group value are dropped and
// reported; AllRowsDropped if nothing survives.
FeatureSelection select_features(const Dataset& ds, const std::string& group);

// Same contract over an explicit column list (for cross-group feature sets).
FeatureSelection select_columns(const Dataset& ds,
                                const std::vector<std::string>& columns);

// Rows whose ids appear in `ids`, in dataset order.
Dataset subset(const Dataset& ds, const std::vector<RowId>& ids);

}  // namespace netdiag
