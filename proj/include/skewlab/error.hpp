#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace skewlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Element layout does not match the group (or base) it is used with.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Quotient projection requested for a (group, subgroup) pair that has no
/// canonical representative rule.
class UnsupportedQuotientError : public Error {
 public:
  using Error::Error;
};

/// Input is degenerate for the requested operation (e.g. conjugacy class of
/// the identity).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// A step budget ran out mid-computation; `steps_done` reports progress and
/// `partial_result` holds whatever value had been accumulated (coordinates,
/// empty when nothing useful was produced).
class BudgetError : public Error {
 public:
  BudgetError(const std::string& what, std::int64_t steps)
      : Error(what), steps_done(steps) {}
  BudgetError(const std::string& what, std::int64_t steps,
              std::vector<double> partial)
      : Error(what), steps_done(steps), partial_result(std::move(partial)) {}
  std::int64_t steps_done = 0;
  std::vector<double> partial_result;
};

/// Configuration rejected; `key_path` names the offending field.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), key_path(path) {}
  std::string key_path;
};

/// Two set estimates cannot be compared (different group or window).
class IncomparableEstimatesError : public Error {
 public:
  using Error::Error;
};

/// Numeric text could not be converted at the declared precision.
class PrecisionError : public Error {
 public:
  using Error::Error;
};

}  // namespace skewlab
