#pragma once

#include <stdexcept>
#include <string>

namespace mgfc {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Cup geometry cannot resist a full 6-D wrench (rank(A) < 6).
struct DegenerateGripper : Error {
  using Error::Error;
};

// Slippage model requires all cup normals parallel to the tool z axis.
struct NonPlanarGripper : Error {
  using Error::Error;
};

// A W^-1 A^T is numerically singular (condition number above 1e12).
struct SingularSystem : Error {
  using Error::Error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

// Simplex stalled beyond the iteration cap.
struct LpNumericalFailure : Error {
  using Error::Error;
};

// An LP that must be solvable by construction came back infeasible/unbounded.
struct LpInternalError : Error {
  using Error::Error;
};

// The grasp cannot hold the object at rest somewhere along the path.
struct StaticallyInfeasible : Error {
  StaticallyInfeasible(const std::string& msg, int knot_index, std::string row)
      : Error(msg), knot(knot_index), row_label(std::move(row)) {}
  int knot;
  std::string row_label;
};

// LP infeasibility surfaced from the TOTP solver with a row label attached.
struct LpInfeasible : Error {
  LpInfeasible(const std::string& msg, std::string row)
      : Error(msg), row_label(std::move(row)) {}
  std::string row_label;
};

struct InsufficientData : Error {
  using Error::Error;
};

// Config/dataset parsing failure; message names the file and offending key.
struct ParseError : Error {
  using Error::Error;
};

}  // namespace mgfc
