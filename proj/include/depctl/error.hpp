// Error taxonomy shared by every module.
#pragma once

#include <stdexcept>
#include <string>

namespace depctl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: bad kernels, bad copula parameters, mismatched shapes.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class InvalidKernel : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class OutOfUnitInterval : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class LengthMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class DimensionMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class UnknownExperiment : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Numerical failures.
class NumericError : public Error {
 public:
  using Error::Error;
};

class MgfDiverged : public NumericError {
 public:
  using NumericError::NumericError;
};

class NoConvergence : public NumericError {
 public:
  using NumericError::NumericError;
};

class NoRootInDomain : public NumericError {
 public:
  using NumericError::NumericError;
};

class NoDerivativeRoot : public NumericError {
 public:
  using NumericError::NumericError;
};

class NoFixedPoint : public NumericError {
 public:
  using NumericError::NumericError;
};

// Mean arrival rate is not below mean service rate.
class UnstableQueue : public Error {
 public:
  UnstableQueue(double arrival_rate, double service_rate)
      : Error("unstable queue: mean arrival rate " + std::to_string(arrival_rate) +
              " >= mean service rate " + std::to_string(service_rate)),
        arrival_rate_(arrival_rate),
        service_rate_(service_rate) {}

  double arrival_rate() const noexcept { return arrival_rate_; }
  double service_rate() const noexcept { return service_rate_; }

 private:
  double arrival_rate_;
  double service_rate_;
};

class CopulaError : public Error {
 public:
  using Error::Error;
};

class ZeroMassState : public CopulaError {
 public:
  using CopulaError::CopulaError;
};

class IncompatibleCopula : public CopulaError {
 public:
  using CopulaError::CopulaError;
};

}  // namespace depctl
