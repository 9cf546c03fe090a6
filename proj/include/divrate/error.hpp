#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace divrate {

/// Thrown when an argument violates an operation's documented domain.
class invalid_parameter : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when an exact-enumeration request exceeds the feasibility budget.
/// Carries the outcome count that tripped the guard.
class enumeration_too_large : public std::runtime_error {
public:
  enumeration_too_large(const std::string& what, double outcome_count)
      : std::runtime_error(what), outcome_count_(outcome_count) {}

  double outcome_count() const noexcept { return outcome_count_; }

private:
  double outcome_count_;
};

/// File or stream failure; message names the path.
class io_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a falling-factorial product or weighted term leaves the
/// finite floating range; the message names the offending term.
class factorial_overflow : public std::overflow_error {
public:
  using std::overflow_error::overflow_error;
};

/// Thrown when a budgeted computation would exceed its configured cost
/// limit; the message carries the cost estimate.
class budget_exceeded : public std::runtime_error {
public:
  budget_exceeded(const std::string& what, double estimated_cost)
      : std::runtime_error(what), estimated_cost_(estimated_cost) {}

  double estimated_cost() const noexcept { return estimated_cost_; }

private:
  double estimated_cost_;
};

} // namespace divrate
