// Copyright 2026 The clinner Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CLINNER_ERROR_HPP
#define CLINNER_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace clinner {

enum class ErrorKind {
  InvalidArgument,
  InvalidEncoding,
  InvalidRegistry,
  MalformedLine,
  UnknownLabel,
  SchemeViolation,
  InvalidScheme,
  OverlappingSpans,
  SpanOutOfRange,
  MissingTags,
  MalformedRecord,
  DuplicatePaperId,
  EmptyDataset,
  DegenerateSplit,
  TransportError,
  MalformedResponse,
  RateLimited,
  CacheError,
  PositionOutOfRange,
  EmptySentence,
  UntaggedSentence,
  InvalidModel,
  TokenMismatch,
  LengthMismatch,
  OutOfRange,
  DatasetMismatch,
  CorpusMismatch,
  UnknownDisease,
  ConfigError,
  IoError,
};

inline std::string_view kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidEncoding: return "InvalidEncoding";
    case ErrorKind::InvalidRegistry: return "InvalidRegistry";
    case ErrorKind::MalformedLine: return "MalformedLine";
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::SchemeViolation: return "SchemeViolation";
    case ErrorKind::InvalidScheme: return "InvalidScheme";
    case ErrorKind::OverlappingSpans: return "OverlappingSpans";
    case ErrorKind::SpanOutOfRange: return "SpanOutOfRange";
    case ErrorKind::MissingTags: return "MissingTags";
    case ErrorKind::MalformedRecord: return "MalformedRecord";
    case ErrorKind::DuplicatePaperId: return "DuplicatePaperId";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::DegenerateSplit: return "DegenerateSplit";
    case ErrorKind::TransportError: return "TransportError";
    case ErrorKind::MalformedResponse: return "MalformedResponse";
    case ErrorKind::RateLimited: return "RateLimited";
    case ErrorKind::CacheError: return "CacheError";
    case ErrorKind::PositionOutOfRange: return "PositionOutOfRange";
    case ErrorKind::EmptySentence: return "EmptySentence";
    case ErrorKind::UntaggedSentence: return "UntaggedSentence";
    case ErrorKind::InvalidModel: return "InvalidModel";
    case ErrorKind::TokenMismatch: return "TokenMismatch";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::DatasetMismatch: return "DatasetMismatch";
    case ErrorKind::CorpusMismatch: return "CorpusMismatch";
    case ErrorKind::UnknownDisease: return "UnknownDisease";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library. `line()` is 1-based and 0 when the
/// error is not tied to an input line.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::size_t line = 0)
      : std::runtime_error(format(kind, message, line)), kind_(kind), line_(line) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string format(ErrorKind kind, const std::string& message, std::size_t line) {
    std::string out = "error[";
    out += kind_name(kind);
    out += "]";
    if (line != 0) {
      out += " line ";
      out += std::to_string(line);
    }
    out += ": ";
    out += message;
    return out;
  }

  ErrorKind kind_;
  std::size_t line_;
};

}  // namespace clinner

#endif  // CLINNER_ERROR_HPP
