#include "netdiag/csv.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "netdiag/errors.hpp"

namespace netdiag::csv {

namespace {

// Pulls one record off the stream, handling quotes and embedded newlines.
// Returns false on clean EOF before any character of a record.
bool read_record(std::istream& in, std::vector<std::string>& fields,
                 std::size_t& line_no) {
  fields.clear();
  int c = in.get();
  // skip blank lines
  while (c == '\n' || c == '\r') {
    if (c == '\n') ++line_no;
    c = in.get();
  }
  if (c == EOF) return false;

  std::string field;
  bool quoted = false;
  bool record_open = true;
  while (record_open) {
    if (c == EOF) {
      if (quoted)
        fail(Errc::MalformedRecord,
             "unterminated quoted field at end of input");
      break;
    }
    const char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        const int next = in.peek();
        if (next == '"') {
          in.get();
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line_no;
        field.push_back(ch);
      }
    } else {
      switch (ch) {
        case '"':
          if (!field.empty())
            fail(Errc::MalformedRecord,
                 "quote inside unquoted field on line " +
                     std::to_string(line_no));
          quoted = true;
          break;
        case ',':
          fields.push_back(std::move(field));
          field.clear();
          break;
        case '\r':
          break;
        case '\n':
          ++line_no;
          record_open = false;
          break;
        default:
          field.push_back(ch);
      }
    }
    if (record_open) c = in.get();
  }
  fields.push_back(std::move(field));
  return true;
}

}  // namespace

Table read(std::istream& in) {
  // strip UTF-8 BOM if present
  if (in.peek() == 0xEF) {
    char bom[3] = {};
    in.read(bom, 3);
    if (in.gcount() != 3 || bom[1] != char(0xBB) || bom[2] != char(0xBF)) {
      fail(Errc::MalformedHeader, "invalid byte-order mark");
    }
  }

  Table table;
  std::size_t line_no = 1;
  if (!read_record(in, table.header, line_no))
    fail(Errc::EmptyFile, "no header record");
  if (table.header.size() == 1 && table.header[0].empty())
    fail(Errc::MalformedHeader, "header record is empty");
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (table.header[i].empty())
      fail(Errc::MalformedHeader,
           "empty column name at position " + std::to_string(i));
    for (std::size_t j = 0; j < i; ++j) {
      if (table.header[j] == table.header[i])
        fail(Errc::MalformedHeader,
             "duplicate column name '" + table.header[i] + "'");
    }
  }

  std::vector<std::string> fields;
  while (read_record(in, fields, line_no)) {
    if (fields.size() != table.header.size())
      fail(Errc::MalformedRecord,
           "expected " + std::to_string(table.header.size()) + " fields, got " +
               std::to_string(fields.size()) + " near line " +
               std::to_string(line_no));
    table.rows.push_back(fields);
  }
  return table;
}

Table read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open '" + path + "' for reading");
  return read(in);
}

std::string escape_field(const std::string& field) {
  bool needs_quotes = false;
  for (char ch : field) {
    if (ch == ',' || ch == '"' || ch == '\n' || ch == '\r') {
      needs_quotes = true;
      break;
    }
  }
  if (!needs_quotes) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

void write(std::ostream& out, const Table& table) {
  auto write_record = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out.put(',');
      out << escape_field(fields[i]);
    }
    out.put('\n');
  };
  write_record(table.header);
  for (const auto& row : table.rows) write_record(row);
}

void write_file(const std::string& path, const Table& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::IoError, "cannot open '" + path + "' for writing");
  write(out, table);
  if (!out) fail(Errc::IoError, "write failed for '" + path + "'");
}

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_double(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (*first == '+') ++first;  // from_chars rejects a leading plus
  double value = 0.0;
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last) return std::nullopt;
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

}  // namespace netdiag::csv
