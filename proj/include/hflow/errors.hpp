#pragma once

#include <stdexcept>
#include <string>

namespace hflow {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OutOfDomainError : Error {
  using Error::Error;
};

struct ExtrapolationError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct ContractViolation : Error {
  using Error::Error;
};

struct TrappedRayError : Error {
  using Error::Error;
};

struct IntegrationError : Error {
  using Error::Error;
};

struct BeamBreakdownError : Error {
  BeamBreakdownError(const std::string& what, double s) : Error(what), parameter(s) {}
  double parameter;
};

struct SolverError : Error {
  using Error::Error;
};

} // namespace hflow
