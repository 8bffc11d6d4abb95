#pragma once

// Discrete right-hand sides of the wave-field equations. Every operator
// returns a time-derivative contribution; nothing is updated in place.

#include <cmath>
#include <complex>
#include <functional>
#include <variant>
#include <vector>

#include "phasewave/core/fields.hpp"
#include "phasewave/core/params.hpp"
#include "phasewave/core/potential.hpp"
#include "phasewave/detail/spectral.hpp"

namespace phasewave {

/// Hamiltonian transport with the fast phase:
///   V'(x) d/dp phi - (p/m) d/dx phi - (i/hbar)(mc^2 + V - p^2/2m) phi
inline WaveField apply_A(const WaveField& field, const PhysicalParams& params,
                         const PotentialSpec& spec, double t) {
  params.validate();
  const PhaseGrid& g = field.grid();
  const PotentialSample pot = eval_potential(spec, g.x_axis(), t);
  const auto phi = field.values();
  const auto dphi_dx = detail::d_dx(phi, g);
  const auto dphi_dp = detail::d_dp(phi, g);
  std::vector<cd> out(g.size());
  const cd minus_i_over_hbar(0.0, -1.0 / params.hbar);
  const double rest = params.rest_term();
  detail::parallel_for(g.nx(), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    for (int j = 0; j < g.np(); ++j) {
      const std::size_t k = g.index(i, j);
      const double p = g.p(j);
      const double phase = rest + pot.value[i] - p * p / (2.0 * params.mass);
      out[k] = pot.gradient[i] * dphi_dp[k] - (p / params.mass) * dphi_dx[k] +
               minus_i_over_hbar * phase * phi[k];
    }
  });
  return field.with_values(std::move(out));
}

/// Momentum diffusion with p replaced by (p + i hbar d/dx):
///   d/dp [ (p + i hbar d/dx) phi + kT m d/dp phi ]
/// expanded as phi + p dphi/dp + i hbar d2phi/dxdp + kT m d2phi/dp2, so the
/// coordinate p is never differentiated across the periodic p-boundary.
/// The friction factor gamma is not included.
inline WaveField apply_B(const WaveField& field, const PhysicalParams& params) {
  params.validate();
  const PhaseGrid& g = field.grid();
  const auto phi = field.values();
  const auto dphi_dp = detail::d_dp(phi, g);
  const auto dphi_dxdp = detail::d_dx(dphi_dp, g);
  const auto dphi_dpdp = detail::d_dp(dphi_dp, g);
  const double diffusion = params.thermal_variance();
  const cd i_hbar(0.0, params.hbar);
  std::vector<cd> out(g.size());
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.np(); ++j) {
      const std::size_t k = g.index(i, j);
      out[k] = phi[k] + g.p(j) * dphi_dp[k] + i_hbar * dphi_dxdp[k] + diffusion * dphi_dpdp[k];
    }
  return field.with_values(std::move(out));
}

/// Legacy diffusion operator
///   a^2 (d/dx - i p/hbar)^2 phi + b^2 d^2/dp^2 phi + (a b / hbar) phi
/// evaluated per x-wavenumber s, where the first term is -(s - p/hbar)^2 a^2.
inline WaveField apply_delta_ab(const WaveField& field, const PhysicalParams& params) {
  params.validate_legacy();
  const PhaseGrid& g = field.grid();
  const int nx = g.nx(), np = g.np();
  const double a2 = params.a * params.a, b2 = params.b * params.b;

  std::vector<cd> coordinate(field.values().begin(), field.values().end());
  detail::fft_x(coordinate, g, detail::kForward);
  detail::parallel_for(nx, [&](std::size_t k) {
    const double s = g.x_axis().wavenumber(static_cast<int>(k));
    cd* line = coordinate.data() + k * np;
    for (int j = 0; j < np; ++j) {
      const double mismatch = s - g.p(j) / params.hbar;
      line[j] *= -a2 * mismatch * mismatch / nx;
    }
  });
  detail::fft_x(coordinate, g, detail::kBackward);

  const auto momentum = detail::d2_dp2(field.values(), g);
  const double constant = params.a * params.b / params.hbar;
  const auto phi = field.values();
  std::vector<cd> out(g.size());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = coordinate[k] + b2 * momentum[k] + constant * phi[k];
  return field.with_values(std::move(out));
}

// ---------------------------------------------------------------------------
// Gauge-covariant form. Covariant derivatives:
//   D^x_0 = d/dt + i A0/hbar,  D^x = d/dx + i Ax/hbar,  D^p = d/dp + i Bp/hbar.

/// Real tables A0, Ax, Bp on a grid (possibly sampled at a time t).
struct GaugePotentials {
  PhaseGrid grid;
  std::vector<double> a0;
  std::vector<double> ax;
  std::vector<double> bp;

  void validate(const PhaseGrid& expected) const {
    require_same_grid(grid, expected, "gauge potentials");
    for (const auto* t : {&a0, &ax, &bp}) {
      if (t->size() != grid.size()) throw ValidationError("gauge potential table has wrong size");
      for (double v : *t)
        if (!std::isfinite(v)) throw ValidationError("gauge potential table is not finite");
    }
  }
};

/// A0 = H = mc^2 + p^2/2m + V, Ax = -p, Bp = 0: the potentials that reduce
/// the covariant form to d phi/dt = A phi + gamma B phi.
inline GaugePotentials kramers_potentials(const PhaseGrid& g, const PhysicalParams& params,
                                          const PotentialSpec& spec, double t) {
  const PotentialSample pot = eval_potential(spec, g.x_axis(), t);
  GaugePotentials out{g, std::vector<double>(g.size()), std::vector<double>(g.size()),
                      std::vector<double>(g.size(), 0.0)};
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.np(); ++j) {
      const std::size_t k = g.index(i, j);
      const double p = g.p(j);
      out.a0[k] = params.rest_term() + p * p / (2.0 * params.mass) + pot.value[i];
      out.ax[k] = -p;
    }
  return out;
}

/// Value of a gauge function and its partials at one point.
struct GaugeSample {
  double g = 0.0;
  double dt = 0.0;
  double dx = 0.0;
  double dp = 0.0;
};

/// Closed-form g(x, p, t) returning the value with exact partials.
struct AnalyticGauge {
  std::function<GaugeSample(double x, double p, double t)> eval;
};

/// g sampled on a grid; x and p partials are spectral (g must be periodic),
/// the time partial is supplied or zero.
struct TabulatedGauge {
  PhaseGrid grid;
  std::vector<double> values;
  std::vector<double> time_derivative;  // empty means zero
};

using GaugeFunction = std::variant<AnalyticGauge, TabulatedGauge>;

struct GaugeTables {
  std::vector<double> g, dt, dx, dp;
};

inline GaugeTables sample_gauge(const GaugeFunction& gauge, const PhaseGrid& grid, double t) {
  GaugeTables out{std::vector<double>(grid.size()), std::vector<double>(grid.size()),
                  std::vector<double>(grid.size()), std::vector<double>(grid.size())};
  if (const auto* analytic = std::get_if<AnalyticGauge>(&gauge)) {
    for (int i = 0; i < grid.nx(); ++i)
      for (int j = 0; j < grid.np(); ++j) {
        const std::size_t k = grid.index(i, j);
        const GaugeSample s = analytic->eval(grid.x(i), grid.p(j), t);
        out.g[k] = s.g;
        out.dt[k] = s.dt;
        out.dx[k] = s.dx;
        out.dp[k] = s.dp;
      }
    return out;
  }
  const auto& tab = std::get<TabulatedGauge>(gauge);
  require_same_grid(tab.grid, grid, "tabulated gauge");
  if (tab.values.size() != grid.size()) throw ValidationError("tabulated gauge has wrong size");
  out.g = tab.values;
  if (!tab.time_derivative.empty()) {
    if (tab.time_derivative.size() != grid.size())
      throw ValidationError("tabulated gauge time derivative has wrong size");
    out.dt = tab.time_derivative;
  }
  const std::vector<cd> as_complex(tab.values.begin(), tab.values.end());
  const auto gx = detail::d_dx(as_complex, grid);
  const auto gp = detail::d_dp(as_complex, grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    out.dx[k] = gx[k].real();
    out.dp[k] = gp[k].real();
  }
  return out;
}

enum class GaugeDirection { forward, inverse };

/// forward: phi -> exp(-i g / hbar) phi; inverse undoes it.
inline WaveField gauge_transform(const WaveField& field, const GaugeFunction& gauge, double t,
                                 GaugeDirection direction, double hbar = 1.0) {
  const PhaseGrid& grid = field.grid();
  const GaugeTables tab = sample_gauge(gauge, grid, t);
  const double sign = direction == GaugeDirection::forward ? -1.0 : 1.0;
  std::vector<cd> out(field.values().begin(), field.values().end());
  for (std::size_t k = 0; k < out.size(); ++k) {
    // Rotated in extended precision so each component is rounded once.
    const long double theta = sign * static_cast<long double>(tab.g[k]) / hbar;
    const long double c = std::cos(theta), s = std::sin(theta);
    const long double re = out[k].real(), im = out[k].imag();
    out[k] = {static_cast<double>(re * c - im * s), static_cast<double>(re * s + im * c)};
  }
  return field.with_values(std::move(out));
}

/// A0 += dg/dt, Ax += dg/dx, Bp += dg/dp.
inline GaugePotentials gauge_shift_potentials(const GaugePotentials& pots, const GaugeFunction& gauge,
                                              double t) {
  const GaugeTables tab = sample_gauge(gauge, pots.grid, t);
  GaugePotentials out = pots;
  for (std::size_t k = 0; k < out.a0.size(); ++k) {
    out.a0[k] += tab.dt[k];
    out.ax[k] += tab.dx[k];
    out.bp[k] += tab.dp[k];
  }
  return out;
}

/// Right-hand side of the covariant equation, i.e. D^x_0 phi:
///   dH/dx D^p phi - dH/dp D^x phi + gamma D^p (i hbar D^x phi + kT m D^p phi)
/// with H = mc^2 + p^2/2m + V taken from the potential spec.
inline WaveField generalized_covariant_rhs(const WaveField& field, const GaugePotentials& pots,
                                           const PhysicalParams& params, const PotentialSpec& spec,
                                           double t) {
  params.validate();
  const PhaseGrid& g = field.grid();
  pots.validate(g);
  const PotentialSample pot = eval_potential(spec, g.x_axis(), t);
  const auto phi = field.values();
  const cd i_over_hbar(0.0, 1.0 / params.hbar);

  auto cov_p = [&](std::span<const cd> f) {
    auto d = detail::d_dp(f, g);
    for (std::size_t k = 0; k < d.size(); ++k) d[k] += i_over_hbar * pots.bp[k] * f[k];
    return d;
  };
  auto cov_x = [&](std::span<const cd> f) {
    auto d = detail::d_dx(f, g);
    for (std::size_t k = 0; k < d.size(); ++k) d[k] += i_over_hbar * pots.ax[k] * f[k];
    return d;
  };

  const auto dp_phi = cov_p(phi);
  const auto dx_phi = cov_x(phi);
  std::vector<cd> out(g.size());
  std::vector<cd> inner_flux(g.size());
  const cd i_hbar(0.0, params.hbar);
  const double diffusion = params.thermal_variance();
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.np(); ++j) {
      const std::size_t k = g.index(i, j);
      const double dH_dp = g.p(j) / params.mass;
      out[k] = pot.gradient[i] * dp_phi[k] - dH_dp * dx_phi[k];
      inner_flux[k] = i_hbar * dx_phi[k] + diffusion * dp_phi[k];
    }
  if (params.gamma != 0.0) {
    const auto diffusion_term = cov_p(inner_flux);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += params.gamma * diffusion_term[k];
  }
  return field.with_values(std::move(out));
}

/// d phi / dt implied by the covariant equation: D^x_0 phi - (i/hbar) A0 phi.
inline WaveField apply_generalized_rhs(const WaveField& field, const GaugePotentials& pots,
                                       const PhysicalParams& params, const PotentialSpec& spec,
                                       double t) {
  WaveField covariant = generalized_covariant_rhs(field, pots, params, spec, t);
  std::vector<cd> out = std::move(covariant).take_values();
  const auto phi = field.values();
  const cd minus_i_over_hbar(0.0, -1.0 / params.hbar);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += minus_i_over_hbar * pots.a0[k] * phi[k];
  return field.with_values(std::move(out));
}

}  // namespace phasewave
