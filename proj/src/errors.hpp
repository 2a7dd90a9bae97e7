#pragma once

#include <stdexcept>

namespace mfdp {

// Data itself is invalid (p-values outside (0,1], NaN, empty input).
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Caller-supplied parameter is invalid (window bounds, lambda, gamma, kappa).
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Evaluation point lies outside an envelope's window.
struct RangeError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

// Combinatorial guard tripped (subset enumeration or table too large).
struct CapacityError : std::length_error {
  using std::length_error::length_error;
};

// Filesystem or stream failure.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed text input.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mfdp
