#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace genret {

using TokenId = std::uint32_t;

enum class ErrorKind {
  kIo,         // file could not be read or written
  kFormat,     // malformed input file
  kParameter,  // invalid argument to an operation
  kData,       // data violates an invariant (duplicate key, missing doc, ...)
  kConfig,     // inconsistent configuration (dimension mismatch, ...)
};

std::string_view to_string(ErrorKind kind);

/// Fatal error raised by every genret operation. The CLI renders it as a
/// single `error: <kind>: <message>` line.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define GENRET_REQUIRE(cond, kind, msg)              \
  do {                                               \
    if (!(cond)) throw ::genret::Error((kind), (msg)); \
  } while (0)

/// Non-fatal, record-level problems collected while loading files.
struct Diagnostics {
  std::vector<std::string> messages;

  void add(std::string message) { messages.push_back(std::move(message)); }
  bool empty() const { return messages.empty(); }
  std::size_t size() const { return messages.size(); }
};

}  // namespace genret
