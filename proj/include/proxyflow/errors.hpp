#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace proxyflow {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- configuration / input errors -----------------------------------------

struct ConfigError : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

/// Carries every violated invariant found while checking a data structure.
struct ValidationError : Error {
  explicit ValidationError(std::vector<std::string> v)
      : Error(join(v)), violations(std::move(v)) {}
  std::vector<std::string> violations;

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "validation failed:";
    for (const auto& x : v) s += "\n  - " + x;
    return s;
  }
};

// --- grid / model errors ----------------------------------------------------

struct SingularTopology : Error {
  using Error::Error;
};

/// Outage of line `line` would island the network; no LODF column exists.
struct RadialLine : Error {
  explicit RadialLine(int line_index)
      : Error("line " + std::to_string(line_index) +
              " is radial: outage islands the network"),
        line(line_index) {}
  int line;
};

struct DegenerateFleet : Error {
  using Error::Error;
};

struct InfeasibleLoad : Error {
  using Error::Error;
};

// --- solver errors ----------------------------------------------------------

struct NumericalFailure : Error {
  using Error::Error;
};

struct InfeasibleError : Error {
  using Error::Error;
};

struct BudgetExceeded : Error {
  using Error::Error;
};

// --- learning errors ---------------------------------------------------------

struct ShapeMismatch : Error {
  using Error::Error;
};

struct TapeReused : Error {
  using Error::Error;
};

struct DivergenceDetected : Error {
  using Error::Error;
};

}  // namespace proxyflow
