#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pdmph {

/// Error classes surfaced by the toolkit. Each maps to a distinct CLI exit code.
enum class ErrorKind {
  invalid_domain = 3,
  nonpositive_mass = 4,
  generating_function_zero = 5,
  domain_violation = 6,
  not_parity_capable = 7,
  eigensolver_failure = 8,
  budget_exceeded = 9,
  io = 10,
  config = 2,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_domain: return "invalid-domain";
    case ErrorKind::nonpositive_mass: return "nonpositive-mass";
    case ErrorKind::generating_function_zero: return "generating-function-zero";
    case ErrorKind::domain_violation: return "domain-violation";
    case ErrorKind::not_parity_capable: return "not-parity-capable";
    case ErrorKind::eigensolver_failure: return "eigensolver-failure";
    case ErrorKind::budget_exceeded: return "budget-exceeded";
    case ErrorKind::io: return "io-error";
    case ErrorKind::config: return "config-error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace pdmph
