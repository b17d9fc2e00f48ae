#pragma once

#include <stdexcept>
#include <string>

namespace stagesched {

// Caller broke a documented precondition (dimension mismatch, empty set...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Bad parameters: unknown hardware class, out-of-range noise, malformed grid.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A placement could not be found with the available machine capacity.
class NoSolution : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Trace or config file failed to parse or validate.
class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ContractViolation(what);
}

}  // namespace detail

}  // namespace stagesched
