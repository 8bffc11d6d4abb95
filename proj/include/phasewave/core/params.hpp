#pragma once

#include <cmath>
#include <string>

#include "phasewave/core/errors.hpp"

namespace phasewave {

/// Model constants in nondimensional units (hbar = m = 1 by default).
struct PhysicalParams {
  double hbar = 1.0;
  double mass = 1.0;
  double kT = 1.0;           // temperature times Boltzmann constant
  double gamma = 0.0;        // friction per unit mass
  double rest_energy = 0.0;  // m c^2
  double a = 0.0;            // legacy coordinate-diffusion amplitude
  double b = 0.0;            // legacy momentum-diffusion amplitude
  bool include_rest_phase = false;

  /// Equilibrium momentum variance kT*m of the friction/diffusion operator.
  double thermal_variance() const { return kT * mass; }
  /// Constant potential offset entering the phase factor.
  double rest_term() const { return include_rest_phase ? rest_energy : 0.0; }

  void validate() const {
    auto finite = [](double v, const char* name) {
      if (!std::isfinite(v)) throw ValidationError(std::string(name) + " must be finite");
    };
    finite(hbar, "hbar");
    finite(mass, "mass");
    finite(kT, "kT");
    finite(gamma, "gamma");
    finite(rest_energy, "rest_energy");
    finite(a, "a");
    finite(b, "b");
    if (!(hbar > 0)) throw ValidationError("hbar must be > 0");
    if (!(mass > 0)) throw ValidationError("mass must be > 0");
    if (kT < 0) throw ValidationError("kT must be >= 0");
    if (gamma < 0) throw ValidationError("gamma must be >= 0");
    if (rest_energy < 0) throw ValidationError("rest_energy must be >= 0");
    if (a < 0) throw ValidationError("a must be >= 0");
    if (b < 0) throw ValidationError("b must be >= 0");
  }

  void validate_legacy() const {
    validate();
    if (!(a > 0) || !(b > 0))
      throw ValidationError("legacy diffusion model needs a > 0 and b > 0");
  }

  bool operator==(const PhysicalParams&) const = default;
};

}  // namespace phasewave
