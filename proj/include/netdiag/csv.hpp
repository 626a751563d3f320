#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace netdiag::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// RFC 4180 reader: quoted fields, doubled-quote escapes, embedded newlines,
// CRLF or LF endings, leading BOM stripped. Blank lines between records are
// skipped. Throws EmptyFile / MalformedHeader / MalformedRecord.
Table read(std::istream& in);
Table read_file(const std::string& path);

// Writer quotes only fields that need it (comma, quote, CR or LF).
void write(std::ostream& out, const Table& table);
void write_file(const std::string& path, const Table& table);

std::string escape_field(const std::string& field);

// Shortest round-trip representation (std::to_chars).
std::string format_double(double value);

// Strict parse: whole string must be consumed, non-finite rejected.
// Leading '+' is tolerated. Returns nullopt on any failure.
std::optional<double> parse_double(const std::string& text);

}  // namespace netdiag::csv
