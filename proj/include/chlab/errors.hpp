#pragma once

#include <stdexcept>
#include <string>

namespace chlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two fields on different grids were combined.
class GridMismatch : public Error {
 public:
  GridMismatch() : Error("fields live on different grids") {}
};

/// A field was constructed from non-finite samples.
class NonFiniteField : public Error {
 public:
  using Error::Error;
};

/// The periodic box cannot hold the soliton tail.
class DomainTooSmall : public Error {
 public:
  using Error::Error;
};

/// A Marcus jump displaces characteristics too far for the domain.
class JumpTooLarge : public Error {
 public:
  using Error::Error;
};

/// The time integrator hit its CFL guard or produced NaNs.
class SolverAbort : public Error {
 public:
  using Error::Error;
};

/// Newton failed, the speed left the admissible range, or A became singular.
class ModulationBreakdown : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace chlab
