#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "phasewave/core/grid.hpp"
#include "phasewave/detail/fft.hpp"

namespace phasewave {

/// Complex samples of phi(x, p) at a time stamp; the model's state.
class WaveField {
 public:
  WaveField() = default;
  WaveField(PhaseGrid grid, std::vector<cd> values, double time = 0.0)
      : grid_(std::move(grid)), values_(std::move(values)), time_(time) {
    if (values_.size() != grid_.size())
      throw ValidationError("wave field has " + std::to_string(values_.size()) +
                            " samples, grid needs " + std::to_string(grid_.size()));
  }
  static WaveField zeros(const PhaseGrid& grid, double time = 0.0) {
    return {grid, std::vector<cd>(grid.size()), time};
  }

  const PhaseGrid& grid() const { return grid_; }
  std::span<const cd> values() const { return values_; }
  double time() const { return time_; }
  const cd& operator()(int i, int j) const { return values_[grid_.index(i, j)]; }

  std::vector<cd> take_values() && { return std::move(values_); }
  WaveField with_values(std::vector<cd> values) const { return {grid_, std::move(values), time_}; }
  WaveField with_time(double time) const { return {grid_, values_, time}; }

  bool is_finite() const {
    return std::all_of(values_.begin(), values_.end(),
                       [](const cd& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
  }

 private:
  PhaseGrid grid_;
  std::vector<cd> values_;
  double time_ = 0.0;
};

/// Real samples on the phase grid: classical densities, Wigner and Husimi output.
class RealField {
 public:
  RealField() = default;
  RealField(PhaseGrid grid, std::vector<double> values, double time = 0.0)
      : grid_(std::move(grid)), values_(std::move(values)), time_(time) {
    if (values_.size() != grid_.size())
      throw ValidationError("real field has " + std::to_string(values_.size()) +
                            " samples, grid needs " + std::to_string(grid_.size()));
  }

  const PhaseGrid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double time() const { return time_; }
  double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }

  std::vector<double> take_values() && { return std::move(values_); }
  RealField with_values(std::vector<double> values) const { return {grid_, std::move(values), time_}; }

  bool is_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }
  double min_value() const { return *std::min_element(values_.begin(), values_.end()); }
  /// Sum of values * dx * dp.
  double mass() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s * grid_.cell();
  }

 private:
  PhaseGrid grid_;
  std::vector<double> values_;
  double time_ = 0.0;
};

using DensityField = RealField;

/// psi(x) on the x-axis of a phase grid.
class ConfigWavefunction {
 public:
  ConfigWavefunction() = default;
  ConfigWavefunction(Axis axis, std::vector<cd> values, double time = 0.0)
      : axis_(axis), values_(std::move(values)), time_(time) {
    if (static_cast<int>(values_.size()) != axis_.size())
      throw ValidationError("wavefunction has " + std::to_string(values_.size()) +
                            " samples, axis needs " + std::to_string(axis_.size()));
  }

  const Axis& axis() const { return axis_; }
  std::span<const cd> values() const { return values_; }
  double time() const { return time_; }
  std::vector<cd> take_values() && { return std::move(values_); }
  ConfigWavefunction with_values(std::vector<cd> values) const { return {axis_, std::move(values), time_}; }

  double norm() const {
    double s = 0.0;
    for (const cd& z : values_) s += std::norm(z);
    return std::sqrt(s * axis_.step());
  }
  ConfigWavefunction normalized() const {
    const double n = norm();
    if (!(n > 0)) throw ValidationError("cannot normalize a zero wavefunction");
    std::vector<cd> v(values_);
    for (cd& z : v) z /= n;
    return {axis_, std::move(v), time_};
  }
  bool is_finite() const {
    return std::all_of(values_.begin(), values_.end(),
                       [](const cd& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
  }

 private:
  Axis axis_;
  std::vector<cd> values_;
  double time_ = 0.0;
};

/// Weighted mixture of wave fields sharing one grid and time stamp.
struct EnsembleMember {
  double weight = 1.0;
  WaveField field;
};

class Ensemble {
 public:
  explicit Ensemble(std::vector<EnsembleMember> members) : members_(std::move(members)) {
    if (members_.empty()) throw ValidationError("ensemble needs at least one member");
    for (const auto& m : members_) {
      if (!(m.weight > 0) || !std::isfinite(m.weight))
        throw ValidationError("ensemble weights must be finite and > 0");
      require_same_grid(m.field.grid(), members_.front().field.grid(), "ensemble member");
      if (m.field.time() != members_.front().field.time())
        throw ValidationError("ensemble members must share a time stamp");
    }
  }

  const std::vector<EnsembleMember>& members() const { return members_; }
  const PhaseGrid& grid() const { return members_.front().field.grid(); }
  double time() const { return members_.front().field.time(); }

 private:
  std::vector<EnsembleMember> members_;
};

// ---------------------------------------------------------------------------
// Field arithmetic and metrics. Reductions run serially in index order so the
// results do not depend on the worker count.

inline double squared_norm(std::span<const cd> v, double cell) {
  double s = 0.0;
  for (const cd& z : v) s += std::norm(z);
  return s * cell;
}

inline double l2_norm(const WaveField& f) { return std::sqrt(squared_norm(f.values(), f.grid().cell())); }

/// <a, b> = sum conj(a) b dx dp
inline cd inner(const WaveField& a, const WaveField& b) {
  require_same_grid(a.grid(), b.grid(), "inner product");
  cd s = 0.0;
  const auto va = a.values(), vb = b.values();
  for (std::size_t i = 0; i < va.size(); ++i) s += std::conj(va[i]) * vb[i];
  return s * a.grid().cell();
}

inline cd inner(const ConfigWavefunction& a, const ConfigWavefunction& b) {
  if (!(a.axis() == b.axis())) throw ValidationError("axis mismatch in inner product");
  cd s = 0.0;
  const auto va = a.values(), vb = b.values();
  for (std::size_t i = 0; i < va.size(); ++i) s += std::conj(va[i]) * vb[i];
  return s * a.axis().step();
}

inline WaveField scaled(const WaveField& f, cd c) {
  std::vector<cd> v(f.values().begin(), f.values().end());
  for (cd& z : v) z *= c;
  return f.with_values(std::move(v));
}

inline WaveField normalized(const WaveField& f) {
  const double n = l2_norm(f);
  if (!(n > 0)) throw ValidationError("cannot normalize a zero-norm wave field");
  return scaled(f, 1.0 / n);
}

/// a + c b
inline WaveField axpy(const WaveField& a, cd c, const WaveField& b) {
  require_same_grid(a.grid(), b.grid(), "field sum");
  std::vector<cd> v(a.values().begin(), a.values().end());
  const auto vb = b.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += c * vb[i];
  return a.with_values(std::move(v));
}

inline double distance(const WaveField& a, const WaveField& b) { return l2_norm(axpy(a, -1.0, b)); }

/// |z|^2 accumulated in extended precision and rounded once.
inline double sample_density(cd z) {
  const long double re = z.real(), im = z.imag();
  return static_cast<double>(re * re + im * im);
}

struct FieldMetrics {
  double l2_norm = 0.0;
  DensityField density;
  double mean_x = 0.0;
  double mean_p = 0.0;
};

inline FieldMetrics field_metrics(const WaveField& field) {
  if (!field.is_finite()) throw ValidationError("field_metrics: field has non-finite samples");
  const PhaseGrid& g = field.grid();
  std::vector<double> rho(g.size());
  const auto v = field.values();
  for (std::size_t k = 0; k < v.size(); ++k) rho[k] = sample_density(v[k]);
  double total = 0.0, mx = 0.0, mp = 0.0;
  for (int i = 0; i < g.nx(); ++i) {
    double row = 0.0, row_p = 0.0;
    for (int j = 0; j < g.np(); ++j) {
      const double r = rho[g.index(i, j)];
      row += r;
      row_p += r * g.p(j);
    }
    total += row;
    mx += row * g.x(i);
    mp += row_p;
  }
  FieldMetrics m;
  m.l2_norm = std::sqrt(total * g.cell());
  if (total > 0) {
    m.mean_x = mx / total;
    m.mean_p = mp / total;
  }
  m.density = DensityField(g, std::move(rho), field.time());
  return m;
}

/// min over theta of || a - e^{i theta} b ||
namespace detail {
inline double aligned_difference(std::span<const cd> a, std::span<const cd> b, cd overlap, double measure) {
  const cd c = std::abs(overlap) > 0 ? overlap / std::abs(overlap) : cd(1.0);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - c * b[i]);
  return std::sqrt(s * measure);
}
}  // namespace detail

inline double phase_aligned_distance(const ConfigWavefunction& a, const ConfigWavefunction& b) {
  const cd overlap = std::conj(inner(a, b));
  return detail::aligned_difference(a.values(), b.values(), overlap, a.axis().step());
}

inline double phase_aligned_distance(const WaveField& a, const WaveField& b) {
  const cd overlap = std::conj(inner(a, b));
  return detail::aligned_difference(a.values(), b.values(), overlap, a.grid().cell());
}

/// Sum |a - b| dx dp
inline double l1_distance(const RealField& a, const RealField& b) {
  require_same_grid(a.grid(), b.grid(), "L1 distance");
  double s = 0.0;
  const auto va = a.values(), vb = b.values();
  for (std::size_t i = 0; i < va.size(); ++i) s += std::abs(va[i] - vb[i]);
  return s * a.grid().cell();
}

}  // namespace phasewave
