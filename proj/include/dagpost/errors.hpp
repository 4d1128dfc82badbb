#ifndef DAGPOST_ERRORS_HPP
#define DAGPOST_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dagpost {

// Raised when an operation would need exhaustive work past a configured cap
// (e.g. enumerating DAGs beyond the enumeration limit).
class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a numerical routine fails (non-finite input, factorization
// breakdown) rather than silently returning garbage.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a detector threshold satisfying the requested false-positive
// constraint cannot be found on the given benchmark set.
class CalibrationError : public std::runtime_error {
 public:
  explicit CalibrationError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when an error rate has an empty denominator (e.g. no absent edges
// anywhere in the ground truth).
class UndefinedRateError : public std::runtime_error {
 public:
  explicit UndefinedRateError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dagpost

#endif  // DAGPOST_ERRORS_HPP
