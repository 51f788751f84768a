#pragma once

#include <stdexcept>
#include <string>

namespace jcqed {

/// Invalid input: bad parameters, unknown presets, out-of-domain analytic evaluation.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure: step-size underflow, singular solves, residual or truncation checks.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

[[noreturn]] inline void fail_domain(const std::string& what) { throw DomainError(what); }
[[noreturn]] inline void fail_numerical(const std::string& what) { throw NumericalError(what); }

}  // namespace detail
}  // namespace jcqed
