#pragma once

#include <complex>
#include <span>
#include <vector>

#include "phasewave/detail/fft.hpp"

namespace phasewave::detail {

// Spectral derivatives on the periodic grid. The Nyquist bin is dropped (see
// Axis::wavenumber), which keeps first derivatives skew-adjoint.

inline std::vector<cd> d_dx(std::span<const cd> f, const PhaseGrid& grid) {
  std::vector<cd> out(f.begin(), f.end());
  fft_x(out, grid, kForward);
  const int nx = grid.nx(), np = grid.np();
  const double norm = 1.0 / nx;
  parallel_for(nx, [&](std::size_t k) {
    const cd factor(0.0, grid.x_axis().wavenumber(static_cast<int>(k)) * norm);
    cd* line = out.data() + k * np;
    for (int j = 0; j < np; ++j) line[j] *= factor;
  });
  fft_x(out, grid, kBackward);
  return out;
}

inline std::vector<cd> d_dp(std::span<const cd> f, const PhaseGrid& grid) {
  std::vector<cd> out(f.begin(), f.end());
  fft_p(out, grid, kForward);
  const int nx = grid.nx(), np = grid.np();
  std::vector<cd> factor(np);
  for (int k = 0; k < np; ++k) factor[k] = cd(0.0, grid.p_axis().wavenumber(k) / np);
  parallel_for(nx, [&](std::size_t i) {
    cd* line = out.data() + i * np;
    for (int k = 0; k < np; ++k) line[k] *= factor[k];
  });
  fft_p(out, grid, kBackward);
  return out;
}

inline std::vector<cd> d2_dp2(std::span<const cd> f, const PhaseGrid& grid) {
  std::vector<cd> out(f.begin(), f.end());
  fft_p(out, grid, kForward);
  const int nx = grid.nx(), np = grid.np();
  std::vector<double> factor(np);
  for (int k = 0; k < np; ++k) {
    const double kappa = grid.p_axis().wavenumber(k);
    factor[k] = -kappa * kappa / np;
  }
  parallel_for(nx, [&](std::size_t i) {
    cd* line = out.data() + i * np;
    for (int k = 0; k < np; ++k) line[k] *= factor[k];
  });
  fft_p(out, grid, kBackward);
  return out;
}

/// First derivative of a real periodic sample vector.
inline std::vector<double> derivative_1d(std::span<const double> f, const Axis& axis) {
  std::vector<cd> work(f.begin(), f.end());
  fft_1d(work, kForward);
  const int n = axis.size();
  for (int k = 0; k < n; ++k) work[k] *= cd(0.0, axis.wavenumber(k) / n);
  fft_1d(work, kBackward);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = work[i].real();
  return out;
}

/// Periodic Gaussian convolution of real samples (standard deviation sigma).
inline std::vector<double> gaussian_smooth_1d(std::span<const double> f, const Axis& axis,
                                              double sigma) {
  std::vector<cd> work(f.begin(), f.end());
  fft_1d(work, kForward);
  const int n = axis.size();
  for (int k = 0; k < n; ++k) {
    const double s = axis.raw_wavenumber(k);
    work[k] *= std::exp(-0.5 * sigma * sigma * s * s) / n;
  }
  fft_1d(work, kBackward);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = work[i].real();
  return out;
}

/// f(x - delta) for band-limited periodic complex samples.
inline std::vector<cd> shift_1d(std::span<const cd> f, const Axis& axis, double delta) {
  std::vector<cd> work(f.begin(), f.end());
  fft_1d(work, kForward);
  const int n = axis.size();
  for (int k = 0; k < n; ++k) work[k] *= std::polar(1.0 / n, -axis.wavenumber(k) * delta);
  fft_1d(work, kBackward);
  return work;
}

}  // namespace phasewave::detail
