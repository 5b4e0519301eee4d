#pragma once

#include <stdexcept>

namespace trapcheck {

/// Bad user-supplied data: CLI arguments, config fields, malformed vectors.
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Config that parses but describes impossible physics or settings.
struct ValidationError : InputError {
  using InputError::InputError;
};

/// Evaluation outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Parameters violate the nondegeneracy condition: no horizon pair exists.
struct NoHorizonError : DomainError {
  using DomainError::DomainError;
};

/// Unreadable or syntactically broken input file.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace trapcheck
