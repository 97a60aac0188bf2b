#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace decisive {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller violated an operation's preconditions (empty input, bad config, ...).
class UsageError : public Error {
 public:
  using Error::Error;
};

// A numeric value outside the domain of the operation.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, std::size_t index)
      : Error(what + " (index " + std::to_string(index) + ")"), index_(index) {}
  explicit DomainError(const std::string& what) : Error(what) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_ = 0;
};

// Input data failed validation. `line` is 1-based, 0 when not tied to a row.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& reason, std::size_t line, const std::string& detail = {})
      : Error(line == 0 ? reason + (detail.empty() ? "" : ": " + detail)
                        : "line " + std::to_string(line) + ": " + reason +
                              (detail.empty() ? "" : " (" + detail + ")")),
        reason_(reason),
        line_(line) {}

  const std::string& reason() const noexcept { return reason_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string reason_;
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace decisive
