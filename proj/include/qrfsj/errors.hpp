#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace qrfsj {

// Error category, mapped to process exit codes by the CLI:
// Io -> 2, Validation -> 3, Numeric -> 4.
enum class ErrorKind { Io, Validation, Numeric };

// All library errors carry a stable machine-parsable tag (e.g. "DuplicateYear")
// in addition to the human-readable message.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, std::string tag, const std::string& message)
      : std::runtime_error(message), kind_(kind), tag_(std::move(tag)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& tag() const noexcept { return tag_; }

private:
  ErrorKind kind_;
  std::string tag_;
};

[[noreturn]] inline void throw_io(const std::string& tag, const std::string& msg) {
  throw Error(ErrorKind::Io, tag, msg);
}

[[noreturn]] inline void throw_validation(const std::string& tag, const std::string& msg) {
  throw Error(ErrorKind::Validation, tag, msg);
}

[[noreturn]] inline void throw_numeric(const std::string& tag, const std::string& msg) {
  throw Error(ErrorKind::Numeric, tag, msg);
}

}  // namespace qrfsj
