#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace osmmcl {

enum class ErrorCode {
  kParse,
  kStructure,
  kEmptyMap,
  kOutOfExtent,
  kResource,
  kInvalidArgument,
  kDegenerate,
  kIo,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Malformed input text. Line and column are 1-based; 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::uint64_t line, std::uint64_t column);

  [[nodiscard]] std::uint64_t line() const noexcept { return line_; }
  [[nodiscard]] std::uint64_t column() const noexcept { return column_; }

 private:
  std::uint64_t line_;
  std::uint64_t column_;
};

}  // namespace osmmcl
