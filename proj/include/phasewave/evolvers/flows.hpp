#pragma once

// Exact sub-flows used by the splitting integrators. Every routine advances
// data in place. The x-drift and the momentum relaxation act on x-Fourier
// data (bin k, sample j at k*np + j); the kick acts on ordinary samples.

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "phasewave/core/grid.hpp"
#include "phasewave/detail/fft.hpp"

namespace phasewave::detail {

/// Multipliers for f(x - p tau/m, p), optionally with the free phase
/// exp(i tau p^2 / (2 m hbar)), on x-Fourier data. `scale` folds in a
/// normalization constant.
inline std::vector<cd> drift_table(const PhaseGrid& g, double mass, double hbar, double tau,
                                   bool with_phase, double scale = 1.0) {
  const int nx = g.nx(), np = g.np();
  std::vector<cd> table(g.size());
  parallel_for(nx, [&](std::size_t kk) {
    const int k = static_cast<int>(kk);
    const double s = g.x_axis().wavenumber(k);
    for (int j = 0; j < np; ++j) {
      const double p = g.p(j);
      double angle = -s * p * tau / mass;
      if (with_phase) angle += tau * p * p / (2.0 * mass * hbar);
      table[g.index(k, j)] = std::polar(scale, angle);
    }
  });
  return table;
}

inline void multiply(std::span<cd> data, std::span<const cd> table) {
  parallel_chunks(data.size(), 4096, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) data[i] *= table[i];
  });
}

/// f(x, p + V'(x) tau), then multiplication by exp(-i tau (V(x) + rest) / hbar)
/// when `phase` is non-empty (phase[i] = V(x_i) + rest). Acts on samples.
inline void kick_p(std::span<cd> data, const PhaseGrid& g, std::span<const double> gradient,
                   std::span<const double> phase, double hbar, double tau) {
  const int nx = g.nx(), np = g.np();
  fft_p(data, g, kForward);
  std::vector<double> kappa(np);
  for (int j = 0; j < np; ++j) kappa[j] = g.p_axis().wavenumber(j);
  parallel_for(nx, [&](std::size_t i) {
    cd* line = data.data() + i * np;
    const double shift = gradient[i] * tau;
    for (int j = 0; j < np; ++j) line[j] *= std::polar(1.0 / np, kappa[j] * shift);
  });
  fft_p(data, g, kBackward);
  if (phase.empty()) return;
  parallel_for(nx, [&](std::size_t i) {
    const cd rot = std::polar(1.0, -tau * phase[i] / hbar);
    cd* line = data.data() + i * np;
    for (int j = 0; j < np; ++j) line[j] *= rot;
  });
}

/// Exact Ornstein-Uhlenbeck relaxation in p,
///   d f/dt = gamma d/dp[(p - c) f + D d f/dp],
/// over a time tau for a batch of contiguous p-lines, line l relaxing towards
/// centre c_l. In Fourier variables F(kappa) -> exp(-i kappa c (1 - alpha))
/// exp(-D kappa^2 (1 - alpha^2) / 2) F(alpha kappa) with alpha = exp(-gamma tau).
/// F(alpha kappa) at the off-grid frequencies comes from a chirp-z transform.
class OuKernel {
 public:
  OuKernel(const Axis& p, std::vector<double> centres, double diffusion, double gamma_tau)
      : n_(p.size()), m_(2 * p.size()), lines_(centres.size()) {
    const int n = n_;
    const double alpha = std::exp(-gamma_tau);
    identity_ = alpha == 1.0;
    if (identity_) return;
    const double theta = 2.0 * std::numbers::pi * alpha / n;
    const int k0 = -(n / 2);
    const double dk = 2.0 * std::numbers::pi / p.length();

    chirp_.resize(n);
    for (int j = 0; j < n; ++j) chirp_[j] = std::polar(1.0, -0.5 * theta * double(j) * j);

    filter_.assign(m_, cd(0.0));
    for (int m = -(n - 1); m <= n - 1; ++m) {
      const double q = m + k0;
      filter_[m >= 0 ? m : m_ + m] = std::polar(1.0 / m_, 0.5 * theta * q * q);
    }
    fft_1d(filter_, kForward);

    post_.resize(lines_ * n);
    for (std::size_t l = 0; l < lines_; ++l) {
      for (int mm = 0; mm < n; ++mm) {
        const int k = k0 + mm;
        const double kappa = k * dk;
        const double envelope =
            std::exp(-0.5 * diffusion * kappa * kappa * (1.0 - alpha * alpha)) / n;
        const double angle =
            kappa * (1.0 - alpha) * (p.min() - centres[l]) - 0.5 * theta * double(k) * k;
        post_[l * n + mm] = std::polar(envelope, angle);
      }
    }
    unshift_.resize(n);
    for (int j = 0; j < n; ++j)
      unshift_[j] = std::polar(1.0, 2.0 * std::numbers::pi * k0 * double(j) / n);
  }

  bool identity() const { return identity_; }
  std::size_t lines() const { return lines_; }

  /// data holds lines() contiguous lines of length n.
  void apply(std::span<cd> data) const {
    if (identity_) return;
    const int n = n_, m = m_;
    std::vector<cd> work(lines_ * m);
    parallel_for(lines_, [&](std::size_t l) {
      const cd* in = data.data() + l * n;
      cd* w = work.data() + l * m;
      for (int j = 0; j < n; ++j) w[j] = in[j] * chirp_[j];
      for (int j = n; j < m; ++j) w[j] = 0.0;
    });
    fft_lines(work.data(), m, lines_, 1, m, kForward);
    parallel_for(lines_, [&](std::size_t l) {
      cd* w = work.data() + l * m;
      for (int j = 0; j < m; ++j) w[j] *= filter_[j];
    });
    fft_lines(work.data(), m, lines_, 1, m, kBackward);
    parallel_for(lines_, [&](std::size_t l) {
      const cd* w = work.data() + l * m;
      const cd* post = post_.data() + l * n;
      cd* out = data.data() + l * n;
      for (int j = 0; j < n; ++j) out[j] = w[j] * post[j];
    });
    fft_lines(data.data(), n, lines_, 1, n, kBackward);
    parallel_for(lines_, [&](std::size_t l) {
      cd* out = data.data() + l * n;
      for (int j = 0; j < n; ++j) out[j] *= unshift_[j];
    });
  }

 private:
  int n_;
  int m_;
  std::size_t lines_;
  bool identity_ = false;
  std::vector<cd> chirp_;
  std::vector<cd> filter_;
  std::vector<cd> post_;
  std::vector<cd> unshift_;
};

/// Momentum centres hbar*s for every x-wavenumber bin of the grid.
inline std::vector<double> mode_centres(const PhaseGrid& g, double hbar) {
  std::vector<double> c(g.nx());
  for (int k = 0; k < g.nx(); ++k) c[k] = hbar * g.x_axis().wavenumber(k);
  return c;
}

/// Exact flow of the legacy diffusion operator per x-wavenumber s:
///   b^2 d^2/dp^2 - (a/hbar)^2 (p - hbar s)^2 + a b / hbar,
/// factorized as Gaussian weight, p-diffusion, Gaussian weight.
class LegacyKernel {
 public:
  LegacyKernel(const PhaseGrid& g, double hbar, double a, double b, double tau)
      : nx_(g.nx()), np_(g.np()) {
    const double omega = a / (hbar * b);
    const double t = 2.0 * b * b * tau;
    const double f = 0.5 * omega * std::tanh(0.5 * omega * t);
    const double v = std::sinh(omega * t) / omega;
    const double growth = std::exp(0.5 * a * b * tau / hbar);
    weight_.resize(g.size());
    for (int k = 0; k < nx_; ++k) {
      const double centre = hbar * g.x_axis().wavenumber(k);
      for (int j = 0; j < np_; ++j) {
        const double q = g.p(j) - centre;
        weight_[g.index(k, j)] = growth * std::exp(-f * q * q);
      }
    }
    spread_.resize(np_);
    for (int j = 0; j < np_; ++j) {
      const double kappa = g.p_axis().wavenumber(j);
      spread_[j] = kappa == 0.0 ? 1.0 / np_ : std::exp(-0.5 * v * kappa * kappa) / np_;
    }
  }

  void apply(std::span<cd> data) const {
    const std::size_t lines = nx_;
    auto weigh = [&] {
      parallel_chunks(data.size(), 4096, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) data[i] *= weight_[i];
      });
    };
    weigh();
    fft_lines(data.data(), np_, lines, 1, np_, kForward);
    parallel_for(lines, [&](std::size_t l) {
      cd* line = data.data() + l * np_;
      for (int j = 0; j < np_; ++j) line[j] *= spread_[j];
    });
    fft_lines(data.data(), np_, lines, 1, np_, kBackward);
    weigh();
  }

 private:
  int nx_;
  int np_;
  std::vector<double> weight_;
  std::vector<double> spread_;
};

inline bool all_finite(std::span<const cd> data) {
  for (const cd& z : data)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

}  // namespace phasewave::detail
