#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace entlink {

/// Invalid physical parameter passed to a model function.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Experiment configuration failed validation. Carries one message per offending field.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> field_errors);
  const std::vector<std::string>& field_errors() const noexcept { return field_errors_; }

 private:
  std::vector<std::string> field_errors_;
};

/// An estimate is undefined for the given data (e.g. no singles counted).
class EstimateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed event log or config text.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace entlink
