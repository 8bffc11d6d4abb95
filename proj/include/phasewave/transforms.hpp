#pragma once

// Maps between representations: configuration wave functions, phase-space
// wave fields, Wigner and Husimi distributions, and the Galileo boost.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "phasewave/core/fields.hpp"
#include "phasewave/core/params.hpp"
#include "phasewave/detail/spectral.hpp"

namespace phasewave {

/// Which operator's kernel defines the stationary p-profile.
///   kramers: exp(-(p - hbar s)^2 / (2 kT m)), the kernel of B
///   legacy:  exp(-(a / (hbar b)) (p - hbar s)^2 / 2), the slowest mode of Delta_{a,b}
enum class StationaryModel { kramers, legacy };

/// Width parameter w of the profile exp(-(p - hbar s)^2 / (2 w)).
inline double stationary_width(const PhysicalParams& params, StationaryModel model) {
  if (model == StationaryModel::legacy) {
    params.validate_legacy();
    return params.hbar * params.b / params.a;
  }
  params.validate();
  if (!(params.thermal_variance() > 0))
    throw ValidationError("stationary subspace needs kT * mass > 0");
  return params.thermal_variance();
}

namespace detail {

inline std::vector<double> stationary_profiles(const PhaseGrid& g, double hbar, double width) {
  std::vector<double> prof(g.size());
  for (int k = 0; k < g.nx(); ++k) {
    const double centre = hbar * g.x_axis().wavenumber(k);
    for (int j = 0; j < g.np(); ++j) {
      const double q = g.p(j) - centre;
      prof[g.index(k, j)] = std::exp(-q * q / (2.0 * width));
    }
  }
  return prof;
}

inline void require_axis(const Axis& a, const Axis& b) {
  if (!(a == b)) throw ValidationError("wavefunction axis does not match the grid's x-axis");
}

}  // namespace detail

/// phi(x, p) = sum_s c(s) e^{isx} G(p - hbar s) with c the Fourier coefficients
/// of psi, normalized to unit L2 norm on `target`.
inline WaveField lift_to_phase_space(const ConfigWavefunction& psi, const PhysicalParams& params,
                                     const PhaseGrid& target,
                                     StationaryModel model = StationaryModel::kramers) {
  if (params.kT == 0.0 && model == StationaryModel::kramers)
    throw ValidationError("lift needs kT > 0");
  const double width = stationary_width(params, model);
  detail::require_axis(psi.axis(), target.x_axis());
  std::vector<cd> coeff(psi.values().begin(), psi.values().end());
  detail::fft_1d(coeff, detail::kForward);
  const auto prof = detail::stationary_profiles(target, params.hbar, width);
  std::vector<cd> out(target.size());
  for (int k = 0; k < target.nx(); ++k)
    for (int j = 0; j < target.np(); ++j) {
      const std::size_t idx = target.index(k, j);
      out[idx] = coeff[k] * prof[idx];
    }
  detail::fft_x(out, target, detail::kBackward);
  return normalized(WaveField(target, std::move(out), psi.time()));
}

struct Projection {
  WaveField projected;
  ConfigWavefunction psi;  // unit norm
  double residual = 0.0;   // ||field - projected|| / ||field||
};

/// Orthogonal L2 projection of every x-wavenumber's p-profile onto the
/// stationary profile of that wavenumber.
inline Projection project_stationary(const WaveField& field, const PhysicalParams& params,
                                     StationaryModel model = StationaryModel::kramers) {
  const double width = stationary_width(params, model);
  const PhaseGrid& g = field.grid();
  const double total = l2_norm(field);
  if (!(total > 0)) throw ValidationError("project_stationary: zero-norm field");
  std::vector<cd> spec(field.values().begin(), field.values().end());
  detail::fft_x(spec, g, detail::kForward);
  const auto prof = detail::stationary_profiles(g, params.hbar, width);
  const int nx = g.nx(), np = g.np();
  std::vector<cd> coeff(nx);
  std::vector<double> profile_norm(nx);
  detail::parallel_for(nx, [&](std::size_t kk) {
    const int k = static_cast<int>(kk);
    cd num = 0.0;
    double den = 0.0;
    for (int j = 0; j < np; ++j) {
      const std::size_t idx = g.index(k, j);
      num += prof[idx] * spec[idx];
      den += prof[idx] * prof[idx];
    }
    const cd c = den > 0 ? num / den : cd(0.0);
    profile_norm[k] = std::sqrt(den);
    coeff[k] = c * profile_norm[k];
    for (int j = 0; j < np; ++j) {
      const std::size_t idx = g.index(k, j);
      spec[idx] = c * prof[idx] / double(nx);
    }
  });
  detail::fft_x(spec, g, detail::kBackward);
  WaveField projected(g, std::move(spec), field.time());
  const double residual = distance(field, projected) / total;

  // psi's Fourier coefficients are the mode amplitudes in the orthonormal
  // profile basis. Profiles cut off by the p-boundary carry their reduced
  // weight instead of an amplified coefficient.
  const double full = *std::max_element(profile_norm.begin(), profile_norm.end());
  for (cd& c : coeff) c /= full;
  detail::fft_1d(coeff, detail::kBackward);
  ConfigWavefunction psi(g.x_axis(), std::move(coeff), field.time());
  if (psi.norm() > 0) psi = psi.normalized();
  return {std::move(projected), std::move(psi), residual};
}

/// ||field - P field|| / ||field|| only.
inline double stationary_residual(const WaveField& field, const PhysicalParams& params,
                                  StationaryModel model = StationaryModel::kramers) {
  return project_stationary(field, params, model).residual;
}

// ---------------------------------------------------------------------------
// Quasidistributions

struct WignerResult {
  RealField wigner;
  double imaginary_residue = 0.0;  // max |Im W|
};

/// W(x, p) = (1/(pi hbar)) int psi*(x+y) psi(x-y) e^{2ipy/hbar} dy by the
/// trapezoid rule with y-step h = pi hbar / (p-extent); psi(x +- kh) comes from
/// spectral shifts and is taken as zero outside the x-domain, so psi must decay
/// towards the x-boundary.
/// The sum over p of W dp equals |psi(x)|^2 exactly.
inline WignerResult wigner(const ConfigWavefunction& psi, const PhysicalParams& params,
                           const PhaseGrid& target, Diagnostics* diag = nullptr) {
  params.validate();
  detail::require_axis(psi.axis(), target.x_axis());
  const int nx = target.nx(), np = target.np();
  const double hbar = params.hbar;
  const double h = std::numbers::pi * hbar / target.p_axis().length();
  const int kmax = (np - 1) / 2;
  if (kmax * h < 4.0 * target.dx())
    warn(diag, "wigner: p-extent too large for the x-resolution of the correlation window");

  std::vector<std::vector<cd>> shifted(2 * kmax + 1);
  detail::parallel_for(2 * kmax + 1, [&](std::size_t idx) {
    const int k = static_cast<int>(idx) - kmax;
    shifted[idx] = detail::shift_1d(psi.values(), target.x_axis(), -k * h);  // psi(x + k h)
  }, 1);

  std::vector<cd> corr(target.size());
  const double pref = h / (std::numbers::pi * hbar);
  const Axis& xa = target.x_axis();
  auto inside = [&](double x) { return x >= xa.min() && x < xa.min() + xa.length(); };
  for (int i = 0; i < nx; ++i)
    for (int k = -kmax; k <= kmax; ++k) {
      const double x = xa.at(i);
      if (!inside(x + k * h) || !inside(x - k * h)) {
        corr[target.index(i, (k + np) % np)] = 0.0;
        continue;
      }
      const cd plus = shifted[k + kmax][i];
      const cd minus = shifted[-k + kmax][i];
      const cd phase = std::polar(pref, 2.0 * target.p_axis().min() * k * h / hbar);
      corr[target.index(i, (k + np) % np)] = std::conj(plus) * minus * phase;
    }
  detail::fft_p(corr, target, detail::kBackward);
  std::vector<double> w(target.size());
  double residue = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = corr[i].real();
    residue = std::max(residue, std::abs(corr[i].imag()));
  }
  if (residue > 1e-10) warn(diag, "wigner: imaginary residue " + std::to_string(residue));
  return {RealField(target, std::move(w), psi.time()), residue};
}

/// Periodic Gaussian smoothing of a real phase-space field.
inline RealField gaussian_smooth(const RealField& f, double sigma_x, double sigma_p) {
  const PhaseGrid& g = f.grid();
  std::vector<cd> work(f.values().begin(), f.values().end());
  detail::fft_x(work, g, detail::kForward);
  detail::fft_p(work, g, detail::kForward);
  const double norm = 1.0 / (double(g.nx()) * g.np());
  for (int k = 0; k < g.nx(); ++k) {
    const double s = g.x_axis().raw_wavenumber(k);
    const double fx = std::exp(-0.5 * sigma_x * sigma_x * s * s);
    for (int j = 0; j < g.np(); ++j) {
      const double kappa = g.p_axis().raw_wavenumber(j);
      work[g.index(k, j)] *= fx * std::exp(-0.5 * sigma_p * sigma_p * kappa * kappa) * norm;
    }
  }
  detail::fft_p(work, g, detail::kBackward);
  detail::fft_x(work, g, detail::kBackward);
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = work[i].real();
  return f.with_values(std::move(out));
}

/// Smoothing deviation hbar a / (2 b) of the legacy model.
inline double default_husimi_sigma(const PhysicalParams& params) {
  params.validate_legacy();
  return params.hbar * params.a / (2.0 * params.b);
}

/// Wigner function smoothed with deviations sigma_x in x and hbar/(2 sigma_x) in p.
inline RealField husimi(const ConfigWavefunction& psi, const PhysicalParams& params, double sigma_x,
                        const PhaseGrid& target, Diagnostics* diag = nullptr) {
  if (!(sigma_x > 0) || !std::isfinite(sigma_x))
    throw ValidationError("husimi sigma_x must be > 0");
  const RealField w = wigner(psi, params, target, diag).wigner;
  RealField q = gaussian_smooth(w, sigma_x, params.hbar / (2.0 * sigma_x));
  if (q.min_value() < -1e-9)
    warn(diag, "husimi: minimum " + std::to_string(q.min_value()) + " below -1e-9");
  return q;
}

// ---------------------------------------------------------------------------
// Galileo boost

/// phi'(x, p) = exp(-(i/hbar)(m u x + m u^2 t / 2)) phi(x + u t, p + m u),
/// shifts done spectrally along each axis.
inline WaveField galileo_boost(const WaveField& field, double u, const PhysicalParams& params,
                               double t, Diagnostics* diag = nullptr) {
  params.validate();
  const PhaseGrid& g = field.grid();
  if (u == 0.0) return field;
  const double dx_shift = u * t;
  const double dp_shift = params.mass * u;
  if (std::abs(dx_shift) > 0.5 * g.x_axis().length() || std::abs(dp_shift) > 0.5 * g.p_axis().length())
    warn(diag, "galileo_boost: shift exceeds half the domain, wrap-around aliasing likely");
  std::vector<cd> data(field.values().begin(), field.values().end());
  const int nx = g.nx(), np = g.np();
  if (dx_shift != 0.0) {
    detail::fft_x(data, g, detail::kForward);
    for (int k = 0; k < nx; ++k) {
      const cd m = std::polar(1.0 / nx, g.x_axis().wavenumber(k) * dx_shift);
      for (int j = 0; j < np; ++j) data[g.index(k, j)] *= m;
    }
    detail::fft_x(data, g, detail::kBackward);
  }
  detail::fft_p(data, g, detail::kForward);
  std::vector<cd> pm(np);
  for (int j = 0; j < np; ++j) pm[j] = std::polar(1.0 / np, g.p_axis().wavenumber(j) * dp_shift);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < np; ++j) data[g.index(i, j)] *= pm[j];
  detail::fft_p(data, g, detail::kBackward);
  const double m = params.mass, hbar = params.hbar;
  for (int i = 0; i < nx; ++i) {
    const cd phase = std::polar(1.0, -(m * u * g.x(i) + 0.5 * m * u * u * t) / hbar);
    for (int j = 0; j < np; ++j) data[g.index(i, j)] *= phase;
  }
  return field.with_values(std::move(data));
}

}  // namespace phasewave
