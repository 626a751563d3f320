#pragma once

#include <stdexcept>
#include <string>

namespace netdiag {

// Error identities surfaced by library operations. The CLI maps failures to
// exit codes by pipeline phase, so the enum stays flat.
enum class Errc {
  // dataset / csv
  MissingColumn,
  EmptyFile,
  MalformedHeader,
  MalformedRecord,
  UnknownColumn,
  UnknownGroup,
  AllRowsDropped,
  // labeling
  EmptyInput,
  QOutOfRange,
  // cart
  AllZero,
  TooFewSamples,
  ShapeMismatch,
  MissingAttribute,
  LengthMismatch,
  UnknownLabel,
  InsufficientSamples,
  // kmeans
  TooFewRows,
  SingleCluster,
  EmptyRange,
  NotBinary,
  UnknownAttribute,
  // pipeline
  TooFewAnomalies,
  SingleClass,
  ColumnMismatch,
  // synth / config / io
  InvalidConfig,
  IdMismatch,
  UnknownRow,
  IoError,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const { return code_; }
  const std::string& message() const { return message_; }  // without the code prefix

 private:
  Errc code_;
  std::string message_;
};

[[noreturn]] void fail(Errc code, const std::string& message);

}  // namespace netdiag
