#pragma once

#include <stdexcept>
#include <string>

namespace gradwave {

/// Error categories; the CLI maps them onto process exit codes.
enum class ErrorCode {
  InvalidArgument,
  Parse,
  NumericFailure,
  DependentConstraints,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct InvalidArgument : Error {
  explicit InvalidArgument(const std::string& what) : Error(ErrorCode::InvalidArgument, what) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& what) : Error(ErrorCode::Parse, what) {}
};

struct NumericFailure : Error {
  explicit NumericFailure(const std::string& what) : Error(ErrorCode::NumericFailure, what) {}
};

struct DependentConstraints : Error {
  explicit DependentConstraints(const std::string& what)
      : Error(ErrorCode::DependentConstraints, what) {}
};

}  // namespace gradwave
