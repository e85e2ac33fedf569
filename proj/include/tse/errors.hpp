#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tse {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input document (JSON syntax, wrong shape, bad field types).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a data invariant. Carries every issue found,
// not just the first one.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& context, std::vector<std::string> issues)
      : Error(format(context, issues)), issues_(std::move(issues)) {}

  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  static std::string format(const std::string& context, const std::vector<std::string>& issues) {
    std::string msg = context + ": " + std::to_string(issues.size()) + " issue(s)";
    for (const auto& issue : issues) msg += "\n  - " + issue;
    return msg;
  }

  std::vector<std::string> issues_;
};

// A table or form lookup that has no entry for the requested key.
class LookupError : public Error {
 public:
  using Error::Error;
};

// Template instantiation could not satisfy its constraints within the attempt budget.
class ConstraintError : public Error {
 public:
  ConstraintError(const std::string& what, std::string constraint)
      : Error(what), constraint_(std::move(constraint)) {}

  const std::string& constraint() const noexcept { return constraint_; }

 private:
  std::string constraint_;
};

// Bad command-line or configuration input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// The scoring endpoint could not be reached or kept failing after retries.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Some pairs of a suite could not be scored; no result is returned for the suite.
class PartialScoringError : public Error {
 public:
  PartialScoringError(const std::string& what, std::vector<std::int64_t> failed_ids)
      : Error(what), failed_ids_(std::move(failed_ids)) {}

  const std::vector<std::int64_t>& failed_ids() const noexcept { return failed_ids_; }

 private:
  std::vector<std::int64_t> failed_ids_;
};

}  // namespace tse
