#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fang {

enum class ErrorCategory {
  Io,
  MalformedLine,
  DanglingEndpoint,
  MistypedEdge,
  NegativeElapsed,
  DuplicateNode,
  SelfLoop,
  UnknownNode,
  NotAnArticle,
  MissingSource,
  InvalidArgument,
  DimensionMismatch,
  Config,
  NonFinite,
};

std::string_view category_name(ErrorCategory c);

// All library failures surface as this type; `line` is 1-based when the
// error refers to a record in an input file and 0 otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what, std::size_t line = 0)
      : std::runtime_error(what), category_(category), line_(line) {}

  ErrorCategory category() const noexcept { return category_; }
  std::size_t line() const noexcept { return line_; }

 private:
  ErrorCategory category_;
  std::size_t line_;
};

inline std::string_view category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Io: return "io";
    case ErrorCategory::MalformedLine: return "malformed-line";
    case ErrorCategory::DanglingEndpoint: return "dangling-endpoint";
    case ErrorCategory::MistypedEdge: return "mistyped-edge";
    case ErrorCategory::NegativeElapsed: return "negative-elapsed";
    case ErrorCategory::DuplicateNode: return "duplicate-node";
    case ErrorCategory::SelfLoop: return "self-loop";
    case ErrorCategory::UnknownNode: return "unknown-node";
    case ErrorCategory::NotAnArticle: return "not-an-article";
    case ErrorCategory::MissingSource: return "missing-source";
    case ErrorCategory::InvalidArgument: return "invalid-argument";
    case ErrorCategory::DimensionMismatch: return "dimension-mismatch";
    case ErrorCategory::Config: return "config";
    case ErrorCategory::NonFinite: return "non-finite";
  }
  return "unknown";
}

}  // namespace fang
