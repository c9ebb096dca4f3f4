#pragma once

#include <stdexcept>
#include <string>

namespace rnco {

// One concrete exception class per failure family. All derive from
// std::runtime_error; the CLI catches the base, tests catch the exact type.

struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A structurally invalid solution or an action that violates a problem
// constraint (capacity, distance budget, repeated visit, ...).
struct FeasibilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// API misuse: querying a terminal state, stepping an infeasible action,
// mismatched node-id sets during embedding alignment.
struct ContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Instance too large for an exact solver.
struct SizeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace rnco
