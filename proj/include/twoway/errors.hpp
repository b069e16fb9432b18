#pragma once

#include <stdexcept>
#include <string>

namespace twoway {

/// Caller handed in something malformed: wrong lengths, bad identifiers, bad sizes.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A machine or algorithm description violates its own structural invariants
/// (non-unitary operator, improper measurement, head leaving a linear tape).
class SpecError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The requested evaluation route does not apply to this machine.
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exhaustive searches refuse inputs beyond their combinatorial budget.
class RefusalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Quantum state drifted outside the 1e-9 envelope.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace twoway
