#pragma once

#include <stdexcept>
#include <string>

namespace limitlab {

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EquilibriumError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SpectralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Spectral calculus misuse (e.g. negative power on a non-mean-zero field).
struct CalculusError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LinearSolveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Time step rejected (positivity loss, NaN, CFL violation).
struct StepError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace limitlab
