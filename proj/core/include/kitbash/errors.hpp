// Error taxonomy. Three families map onto the CLI exit codes:
// validation (2), solver (3), io (4).
#pragma once

#include <stdexcept>
#include <string>

namespace kitbash {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : Error {
  using Error::Error;
};
struct SolverError : Error {
  using Error::Error;
};

// -- solver family -----------------------------------------------------------

// Log map requested at or beyond the rotation cut locus.
struct AngleNearPi : SolverError {
  using SolverError::SolverError;
};
struct EmptyInput : SolverError {
  using SolverError::SolverError;
};
struct SingularSystem : SolverError {
  using SolverError::SolverError;
};
struct AllWeightsZero : SolverError {
  using SolverError::SolverError;
};
struct NoDofOnChain : SolverError {
  using SolverError::SolverError;
};
struct NoGroundContact : SolverError {
  using SolverError::SolverError;
};

// -- validation family -------------------------------------------------------

struct InvalidMesh : ValidationError {
  using ValidationError::ValidationError;
};
struct DofMismatch : ValidationError {
  using ValidationError::ValidationError;
};
struct LimitViolation : ValidationError {
  using ValidationError::ValidationError;
};
struct MissingJointValue : ValidationError {
  using ValidationError::ValidationError;
};
struct MissingSourceParent : ValidationError {
  using ValidationError::ValidationError;
};
struct ParseError : ValidationError {
  using ValidationError::ValidationError;
};
struct SchemaError : ValidationError {
  using ValidationError::ValidationError;
};
struct MissingFile : ValidationError {
  using ValidationError::ValidationError;
};

// -- io family ---------------------------------------------------------------

struct IoError : Error {
  using Error::Error;
};

}  // namespace kitbash
