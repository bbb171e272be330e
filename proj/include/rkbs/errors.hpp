#pragma once

#include <stdexcept>
#include <string>

namespace rkbs {

// Dimension or length mismatch between an architecture and its inputs.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An analytic bound was requested for a configuration it does not cover
// (decay exponent below depth+1, or an unsupported activation).
class CertificationUnavailable : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class IllConditionedError : public std::runtime_error {
 public:
  IllConditionedError(const std::string& what, double condition)
      : std::runtime_error(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

class EnumerationRefused : public std::length_error {
 public:
  using std::length_error::length_error;
};

class RejectedProbe : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DegenerateDiagonal : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The solver could not produce any anchor. Maps to CLI exit code 3.
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Config or dataset failed validation. Maps to CLI exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rkbs
