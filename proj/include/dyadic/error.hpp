#pragma once

#include <stdexcept>
#include <string>

namespace dyadic {

// Malformed or inconsistent user input (CLI exit code 2).
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// Input is well-formed but carries too little information (no present
// pairs, zero dispersion, ...). Reported like an input error.
class DegenerateInputError : public InputError {
 public:
  explicit DegenerateInputError(const std::string& what) : InputError(what) {}
};

// Numerical failure: singular systems, broken PSD contracts, invalid
// normalizations (CLI exit code 3).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dyadic
