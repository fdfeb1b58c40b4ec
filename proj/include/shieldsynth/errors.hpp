#pragma once

#include <stdexcept>
#include <string>

namespace shieldsynth {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation precondition (dimension mismatch, bad range).
struct ContractViolation : Error {
  using Error::Error;
};

/// A computation produced or encountered a non-finite value, or a
/// factorization/pivot broke down.
struct NumericalError : Error {
  using Error::Error;
};

/// An iteration exhausted its budget without meeting its tolerance.
struct ConvergenceError : Error {
  using Error::Error;
};

/// The CEGIS loop could not certify the initial-state set.
struct SynthesisFailure : Error {
  using Error::Error;
};

/// A safe set handed to MOAS is unbounded; synthesis cannot proceed.
struct UnboundedSafeSet : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

/// Shield program text that does not conform to the emitted grammar.
struct ParseError : Error {
  int line;
  int column;
  ParseError(const std::string& msg, int line_, int column_)
      : Error(msg + " (line " + std::to_string(line_) + ", col " + std::to_string(column_) + ")"),
        line(line_),
        column(column_) {}
};

}  // namespace shieldsynth
