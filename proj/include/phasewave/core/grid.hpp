#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>

#include "phasewave/core/errors.hpp"

namespace phasewave {

/// One periodic axis: n samples covering [min, max), sample i at min + i*step.
class Axis {
 public:
  Axis() = default;
  Axis(int n, double min, double max) : n_(n), min_(min), max_(max) {
    if (n < 1) throw ValidationError("axis needs at least one sample, got " + std::to_string(n));
    if (!std::isfinite(min) || !std::isfinite(max) || !(max > min))
      throw ValidationError("axis extent must be finite and ordered, got [" + std::to_string(min) +
                            ", " + std::to_string(max) + ")");
  }

  int size() const { return n_; }
  double min() const { return min_; }
  double max() const { return max_; }
  double length() const { return max_ - min_; }
  double step() const { return (max_ - min_) / n_; }
  double at(int i) const { return min_ + i * step(); }

  /// Angular wavenumber of DFT bin k (FFTW ordering). The Nyquist bin of an
  /// even-length axis maps to zero: derivative-generated operators leave it alone.
  double wavenumber(int k) const {
    if (n_ % 2 == 0 && k == n_ / 2) return 0.0;
    const int signed_k = k <= (n_ - 1) / 2 ? k : k - n_;
    return 2.0 * std::numbers::pi * signed_k / length();
  }

  /// Wavenumber of bin k without the Nyquist convention (Nyquist is -n/2).
  double raw_wavenumber(int k) const {
    const int signed_k = k < (n_ + 1) / 2 ? k : k - n_;
    return 2.0 * std::numbers::pi * signed_k / length();
  }

  bool operator==(const Axis&) const = default;

 private:
  int n_ = 1;
  double min_ = 0.0;
  double max_ = 1.0;
};

/// Uniform periodic discretization of the (x, p) plane. Storage is row-major
/// with x outer and p inner: index(i, j) = i * np + j.
class PhaseGrid {
 public:
  static constexpr int kMinSamples = 8;

  PhaseGrid() : PhaseGrid(kMinSamples, kMinSamples, 0.0, 1.0, 0.0, 1.0) {}
  PhaseGrid(int nx, int np, double x_min, double x_max, double p_min, double p_max) {
    if (nx < kMinSamples)
      throw ValidationError("grid nx must be >= 8, got " + std::to_string(nx));
    if (np < kMinSamples)
      throw ValidationError("grid np must be >= 8, got " + std::to_string(np));
    if (!(x_max > x_min)) throw ValidationError("grid x extent is degenerate");
    if (!(p_max > p_min)) throw ValidationError("grid p extent is degenerate");
    x_ = Axis(nx, x_min, x_max);
    p_ = Axis(np, p_min, p_max);
  }

  const Axis& x_axis() const { return x_; }
  const Axis& p_axis() const { return p_; }
  int nx() const { return x_.size(); }
  int np() const { return p_.size(); }
  double dx() const { return x_.step(); }
  double dp() const { return p_.step(); }
  double cell() const { return dx() * dp(); }
  double x(int i) const { return x_.at(i); }
  double p(int j) const { return p_.at(j); }
  std::size_t size() const { return static_cast<std::size_t>(nx()) * np(); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * np() + j; }

  /// Same sample counts, refined by an integer factor over the same extents.
  PhaseGrid refined(int factor) const {
    return {nx() * factor, np() * factor, x_.min(), x_.max(), p_.min(), p_.max()};
  }

  bool operator==(const PhaseGrid&) const = default;

 private:
  Axis x_;
  Axis p_;
};

inline PhaseGrid make_grid(int nx, int np, std::pair<double, double> x_extent,
                           std::pair<double, double> p_extent) {
  return {nx, np, x_extent.first, x_extent.second, p_extent.first, p_extent.second};
}

inline void require_same_grid(const PhaseGrid& a, const PhaseGrid& b, const char* what) {
  if (!(a == b)) throw ValidationError(std::string("grid mismatch: ") + what);
}

}  // namespace phasewave
