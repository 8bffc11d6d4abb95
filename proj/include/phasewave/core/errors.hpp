#pragma once

#include <iostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace phasewave {

/// Bad input: sizes, extents, parameter ranges, mismatched grids, file formats.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The numerics went wrong at runtime (NaN, trace collapse, mass drift).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Collects non-fatal warnings (resolution, CFL, boundary decay).
/// Optionally echoes each warning to stderr as it arrives.
struct Diagnostics {
  std::vector<std::string> warnings;
  bool echo = false;

  void warn(std::string message) {
    if (echo) std::cerr << "warning: " << message << '\n';
    warnings.push_back(std::move(message));
  }
  bool empty() const { return warnings.empty(); }
};

inline void warn(Diagnostics* diag, std::string message) {
  if (diag) diag->warn(std::move(message));
}

}  // namespace phasewave
