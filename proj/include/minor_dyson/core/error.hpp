#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace minor_dyson {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the arguments was violated.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A value fell outside the support of a density or operator.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Floating point trouble: non-finite values, failed convergence, tolerance misses.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// Two eigenvalues that must be distinct are closer than the degeneracy threshold.
class DegenerateSpectrum : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

/// An SDE step kept violating the ordering constraints down to the minimal step.
class StepFailure : public NumericalFailure {
 public:
  StepFailure(const std::string& what, std::vector<double> lambda,
              std::vector<double> mu, double time)
      : NumericalFailure(what),
        lambda_(std::move(lambda)),
        mu_(std::move(mu)),
        time_(time) {}

  const std::vector<double>& lambda() const noexcept { return lambda_; }
  const std::vector<double>& mu() const noexcept { return mu_; }
  double time() const noexcept { return time_; }

 private:
  std::vector<double> lambda_;
  std::vector<double> mu_;
  double time_;
};

/// No nonnegative off-diagonal moduli realize the requested phase sum.
class InfeasibleGauge : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidInput(message);
}

}  // namespace detail
}  // namespace minor_dyson
