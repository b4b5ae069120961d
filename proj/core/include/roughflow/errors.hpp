#pragma once
#include <stdexcept>
#include <string>

namespace roughflow {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid user-supplied data (config values, profiles, parameters).
struct InputError : Error {
  using Error::Error;
};

/// A point lies outside the fluid domain.
struct DomainError : Error {
  using Error::Error;
};

/// Solvability data of a Neumann problem fails the zero-flux balance.
/// Carries the measured mismatch so callers can report it.
struct CompatibilityError : Error {
  double mismatch;
  CompatibilityError(const std::string& what, double m)
      : Error(what), mismatch(m) {}
};

/// A field that must decay fails its tail-norm certificate.
struct DecayError : Error {
  using Error::Error;
};

/// Missing prerequisite (cascade member, snapshot, wall-jet order).
struct DependencyError : Error {
  using Error::Error;
};

/// Time-step constraint violated.
struct TimeStepError : Error {
  using Error::Error;
};

/// Linear solver failed to factor or converge.
struct SolverError : Error {
  using Error::Error;
};

/// A quantity that is exact in the continuum exceeded its numerical
/// tolerance; indicates a bug rather than bad input.
struct InternalConsistencyError : Error {
  double mismatch;
  InternalConsistencyError(const std::string& what, double m)
      : Error(what), mismatch(m) {}
};

}  // namespace roughflow
