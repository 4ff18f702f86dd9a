#pragma once

#include <stdexcept>
#include <string>

namespace varq {

// Too few values for the requested statistic (empty batch, n < 4 for g2,
// group length < 2, ...).
class InsufficientDataError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Both sample groups constant: the standard error of the mean difference is 0.
class DegenerateVarianceError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// All t-statistics equal: central moments vanish.
class DegenerateDispersionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A metric's standard error is 0, so no z-test can be formed.
class ZeroStandardError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Caller broke a structural precondition (unsorted curve, mismatched theta,
// wrong simulation mode).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Failure inside one (theta, n) cell of a power sweep; the message carries
// the cell coordinates and the original error text.
class SweepCellError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace varq
