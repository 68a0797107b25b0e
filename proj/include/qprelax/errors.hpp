#pragma once

#include <stdexcept>
#include <string>

namespace qpr {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical rank disagrees with the rank required by the caller.
struct RankMismatch : Error {
  using Error::Error;
};

/// The stacked matrix [U V] of the facial reduction is numerically singular.
struct DegenerateFace : Error {
  using Error::Error;
};

/// An auxiliary solve (e.g. the Slater LP) could not be completed.
struct SolverFailure : Error {
  using Error::Error;
};

/// Input exceeds the limits of an enumeration-based routine.
struct TooLarge : Error {
  using Error::Error;
};

/// A certificate relation has residual above tolerance.
struct ResidualTooLarge : Error {
  using Error::Error;
};

/// Eigenvalue/factorization iteration did not converge.
struct ConvergenceFailure : Error {
  using Error::Error;
};

/// Malformed instance file or CLI input.
struct ParseError : Error {
  using Error::Error;
};

}  // namespace qpr
