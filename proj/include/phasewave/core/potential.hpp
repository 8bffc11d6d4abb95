#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "phasewave/core/grid.hpp"
#include "phasewave/detail/spectral.hpp"

namespace phasewave {

namespace shape {
struct Zero {
  bool operator==(const Zero&) const = default;
};
/// k x^2 / 2
struct Harmonic {
  double k = 1.0;
  bool operator==(const Harmonic&) const = default;
};
/// c4 x^4
struct Quartic {
  double c4 = 1.0;
  bool operator==(const Quartic&) const = default;
};
/// h ((x/d)^2 - 1)^2
struct DoubleWell {
  double h = 1.0;
  double d = 1.0;
  bool operator==(const DoubleWell&) const = default;
};
/// Samples on the grid's x-axis; gradients are spectral.
struct Tabulated {
  std::vector<double> samples;
  bool operator==(const Tabulated&) const = default;
};
}  // namespace shape

using PotentialShape =
    std::variant<shape::Zero, shape::Harmonic, shape::Quartic, shape::DoubleWell, shape::Tabulated>;

/// V(x, t) = V0(x) + V1(x) cos(omega t). Without a drive V does not depend on t.
struct PotentialSpec {
  PotentialShape base = shape::Zero{};
  std::optional<PotentialShape> drive;
  double omega = 0.0;

  bool time_dependent() const { return drive.has_value() && omega != 0.0; }
  bool operator==(const PotentialSpec&) const = default;
};

/// Potential values and spatial gradient on an x-axis.
struct PotentialSample {
  std::vector<double> value;
  std::vector<double> gradient;
};

namespace detail {

inline void check_shape(const PotentialShape& s, const Axis& axis) {
  if (const auto* tab = std::get_if<shape::Tabulated>(&s)) {
    if (static_cast<int>(tab->samples.size()) != axis.size())
      throw ValidationError("tabulated potential has " + std::to_string(tab->samples.size()) +
                            " samples, x-axis has " + std::to_string(axis.size()));
    for (double v : tab->samples)
      if (!std::isfinite(v)) throw ValidationError("tabulated potential has non-finite samples");
  }
  if (const auto* dw = std::get_if<shape::DoubleWell>(&s)) {
    if (!(dw->d != 0.0)) throw ValidationError("double_well d must be nonzero");
  }
}

/// Gaussian-smoothed shape (standard deviation sigma), evaluated exactly for
/// the polynomial kinds and spectrally for tables.
inline PotentialSample sample_shape(const PotentialShape& s, const Axis& axis, double sigma = 0.0) {
  const int n = axis.size();
  PotentialSample out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  const double s2 = sigma * sigma;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, shape::Zero>) {
        } else if constexpr (std::is_same_v<T, shape::Harmonic>) {
          for (int i = 0; i < n; ++i) {
            const double x = axis.at(i);
            out.value[i] = 0.5 * v.k * (x * x + s2);
            out.gradient[i] = v.k * x;
          }
        } else if constexpr (std::is_same_v<T, shape::Quartic>) {
          for (int i = 0; i < n; ++i) {
            const double x = axis.at(i);
            out.value[i] = v.c4 * (x * x * x * x + 6.0 * s2 * x * x + 3.0 * s2 * s2);
            out.gradient[i] = v.c4 * (4.0 * x * x * x + 12.0 * s2 * x);
          }
        } else if constexpr (std::is_same_v<T, shape::DoubleWell>) {
          // h (x^4/d^4 - 2 x^2/d^2 + 1) with Gaussian moments <x^2>, <x^4>.
          const double d2 = v.d * v.d, d4 = d2 * d2;
          for (int i = 0; i < n; ++i) {
            const double x = axis.at(i);
            const double m2 = x * x + s2;
            const double m4 = x * x * x * x + 6.0 * s2 * x * x + 3.0 * s2 * s2;
            out.value[i] = v.h * (m4 / d4 - 2.0 * m2 / d2 + 1.0);
            out.gradient[i] = v.h * ((4.0 * x * x * x + 12.0 * s2 * x) / d4 - 4.0 * x / d2);
          }
        } else {
          out.value = sigma > 0 ? gaussian_smooth_1d(v.samples, axis, sigma) : v.samples;
          out.gradient = derivative_1d(out.value, axis);
        }
      },
      s);
  return out;
}

}  // namespace detail

inline void validate_potential(const PotentialSpec& spec, const Axis& axis) {
  if (!std::isfinite(spec.omega) || spec.omega < 0)
    throw ValidationError("omega must be finite and >= 0");
  detail::check_shape(spec.base, axis);
  if (spec.drive) detail::check_shape(*spec.drive, axis);
}

/// V and dV/dx on the x-axis at time t; sigma > 0 returns the Gaussian-smoothed
/// potential used by the configuration-space reference solver.
inline PotentialSample eval_potential(const PotentialSpec& spec, const Axis& axis, double t,
                                      double sigma = 0.0) {
  validate_potential(spec, axis);
  PotentialSample out = detail::sample_shape(spec.base, axis, sigma);
  if (spec.drive) {
    const double c = std::cos(spec.omega * t);
    if (c != 0.0) {
      const PotentialSample drive = detail::sample_shape(*spec.drive, axis, sigma);
      for (int i = 0; i < axis.size(); ++i) {
        out.value[i] += drive.value[i] * c;
        out.gradient[i] += drive.gradient[i] * c;
      }
    }
  }
  return out;
}

inline PotentialSample eval_potential(const PotentialSpec& spec, const PhaseGrid& grid, double t) {
  return eval_potential(spec, grid.x_axis(), t);
}

}  // namespace phasewave
