#include "netdiag/errors.hpp"

namespace netdiag {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::MissingColumn: return "MissingColumn";
    case Errc::EmptyFile: return "EmptyFile";
    case Errc::MalformedHeader: return "MalformedHeader";
    case Errc::MalformedRecord: return "MalformedRecord";
    case Errc::UnknownColumn: return "UnknownColumn";
    case Errc::UnknownGroup: return "UnknownGroup";
    case Errc::AllRowsDropped: return "AllRowsDropped";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::QOutOfRange: return "QOutOfRange";
    case Errc::AllZero: return "AllZero";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::MissingAttribute: return "MissingAttribute";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::UnknownLabel: return "UnknownLabel";
    case Errc::InsufficientSamples: return "InsufficientSamples";
    case Errc::TooFewRows: return "TooFewRows";
    case Errc::SingleCluster: return "SingleCluster";
    case Errc::EmptyRange: return "EmptyRange";
    case Errc::NotBinary: return "NotBinary";
    case Errc::UnknownAttribute: return "UnknownAttribute";
    case Errc::TooFewAnomalies: return "TooFewAnomalies";
    case Errc::SingleClass: return "SingleClass";
    case Errc::ColumnMismatch: return "ColumnMismatch";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::IdMismatch: return "IdMismatch";
    case Errc::UnknownRow: return "UnknownRow";
    case Errc::IoError: return "IoError";
  }
  return "UnknownError";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message),
      code_(code),
      message_(message) {}

void fail(Errc code, const std::string& message) { throw Error(code, message); }

}  // namespace netdiag
