#pragma once

#include <stdexcept>
#include <string>

namespace finslerlab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A jet operation left the domain of an elementary function (sqrt of a
/// negative value, division by a vanishing value part, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A derivative was requested beyond the truncation orders of a jet.
class CapOverflowError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

/// The metric tensor is numerically singular at the evaluation point.
class DegenerateMetricError : public Error {
 public:
  using Error::Error;
};

/// The point is outside the admissible domain (L <= 0, y = 0, beta = 0).
class InadmissiblePointError : public Error {
 public:
  using Error::Error;
};

/// A denominator of a closed-form coefficient vanishes.
class SingularCoefficientError : public Error {
 public:
  using Error::Error;
};

/// Raised when a closed form that assumes b_j N^j = 0 is requested for a
/// non-tangent configuration.
class TangencyViolationError : public Error {
 public:
  using Error::Error;
};

class RankDeficiencyError : public Error {
 public:
  using Error::Error;
};

class HypothesisConflictError : public Error {
 public:
  using Error::Error;
};

/// Invalid scenario or parse input. Carries the offending line when known.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, int line = -1)
      : Error(line >= 0 ? "line " + std::to_string(line + 1) + ": " + what
                        : what),
        line_(line) {}

  [[nodiscard]] int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace finslerlab
