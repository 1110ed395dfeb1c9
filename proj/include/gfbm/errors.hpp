#pragma once

#include <stdexcept>
#include <string>

namespace gfbm {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: out-of-range parameters, malformed grids or tables.
/// The CLI maps this family to exit code 2.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// Numerical failure at run time (quadrature, factorization, root finding).
class NumericalError : public Error {
public:
  using Error::Error;
};

class RangeError : public InvalidArgument {
public:
  RangeError(std::string parameter, const std::string& message)
      : InvalidArgument("RangeError(" + parameter + "): " + message),
        parameter_(std::move(parameter)) {}
  const std::string& parameter() const noexcept { return parameter_; }

private:
  std::string parameter_;
};

#define GFBM_DEFINE_ERROR(Name, Base)                                          \
  class Name : public Base {                                                   \
  public:                                                                      \
    explicit Name(const std::string& what) : Base(#Name ": " + what) {}        \
  }

GFBM_DEFINE_ERROR(SingularPoint, InvalidArgument);
GFBM_DEFINE_ERROR(BadRatio, InvalidArgument);
GFBM_DEFINE_ERROR(BadSize, InvalidArgument);
GFBM_DEFINE_ERROR(OutOfRange, InvalidArgument);
GFBM_DEFINE_ERROR(NotMonotone, InvalidArgument);
GFBM_DEFINE_ERROR(DomainMismatch, InvalidArgument);
GFBM_DEFINE_ERROR(InsufficientSpread, InvalidArgument);
GFBM_DEFINE_ERROR(DegenerateInterval, InvalidArgument);

GFBM_DEFINE_ERROR(NonIntegrable, NumericalError);
GFBM_DEFINE_ERROR(NoConvergence, NumericalError);
GFBM_DEFINE_ERROR(FactorizationFailure, NumericalError);
GFBM_DEFINE_ERROR(BisectionFailure, NumericalError);
GFBM_DEFINE_ERROR(StalledSequence, NumericalError);
GFBM_DEFINE_ERROR(NoFlip, NumericalError);
GFBM_DEFINE_ERROR(IoError, Error);

#undef GFBM_DEFINE_ERROR

} // namespace gfbm
