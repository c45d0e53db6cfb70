#include "osmmcl/error.hpp"

namespace osmmcl {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse:
      return "parse error";
    case ErrorCode::kStructure:
      return "structural error";
    case ErrorCode::kEmptyMap:
      return "empty map";
    case ErrorCode::kOutOfExtent:
      return "out of extent";
    case ErrorCode::kResource:
      return "resource limit";
    case ErrorCode::kInvalidArgument:
      return "invalid argument";
    case ErrorCode::kDegenerate:
      return "degenerate input";
    case ErrorCode::kIo:
      return "i/o error";
  }
  return "unknown error";
}

ParseError::ParseError(const std::string& what, std::uint64_t line, std::uint64_t column)
    : Error(ErrorCode::kParse,
            what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
      line_(line),
      column_(column) {}

}  // namespace osmmcl
