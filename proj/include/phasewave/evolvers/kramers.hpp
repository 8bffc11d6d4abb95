#pragma once

// Splitting integrators for the wave-field equations: the modified Kramers
// equation d phi/dt = A phi + gamma B phi and the legacy diffusion model
// d phi/dt = (Hamiltonian part) + Delta_{a,b} phi.

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "phasewave/core/fields.hpp"
#include "phasewave/core/params.hpp"
#include "phasewave/core/potential.hpp"
#include "phasewave/evolvers/flows.hpp"
#include "phasewave/transforms.hpp"

namespace phasewave {

enum class Scheme { strang, lie };

struct EvolveSpec {
  double dt = 1e-3;
  double t_final = 0.0;
  Scheme scheme = Scheme::strang;
  int snapshot_stride = 1;
  bool renormalize = false;
  bool track_residual = false;

  /// Number of fixed steps covering [0, t_final]; the last one lands on t_final.
  std::size_t steps() const { return static_cast<std::size_t>(std::llround(t_final / dt)); }

  void validate() const {
    if (!(dt > 0) || !std::isfinite(dt)) throw ValidationError("dt must be > 0");
    if (!(t_final >= 0) || !std::isfinite(t_final)) throw ValidationError("t_final must be >= 0");
    if (t_final > 0 && dt > t_final) throw ValidationError("dt must not exceed t_final");
    if (snapshot_stride < 1) throw ValidationError("snapshot_stride must be >= 1");
    if (std::abs(steps() * dt - t_final) > 1e-9 * std::max(1.0, t_final))
      throw ValidationError("t_final must be an integer multiple of dt");
  }
};

struct StepDiagnostics {
  double time = 0.0;
  double norm = 0.0;
  double energy = 0.0;  // <p^2/2m + V> under |phi|^2
  double residual = std::numeric_limits<double>::quiet_NaN();
};

template <class Field>
struct Trajectory {
  std::vector<double> times;
  std::vector<Field> snapshots;
  std::vector<StepDiagnostics> diagnostics;  // one entry per step
};

using WaveTrajectory = Trajectory<WaveField>;

namespace detail {

/// Warns when one step moves a characteristic farther than one cell.
inline void check_resolution(const PhaseGrid& g, const PhysicalParams& params,
                             const PotentialSpec& spec, double dt, Diagnostics* diag) {
  const double pmax = std::max(std::abs(g.p_axis().min()), std::abs(g.p_axis().max()));
  if (pmax / params.mass * dt > g.dx())
    warn(diag, "resolution: max|p|/m*dt = " + std::to_string(pmax / params.mass * dt) +
                   " exceeds dx = " + std::to_string(g.dx()));
  const PotentialSample v = eval_potential(spec, g.x_axis(), 0.0);
  double gmax = 0.0;
  for (double x : v.gradient) gmax = std::max(gmax, std::abs(x));
  if (spec.drive) {
    const PotentialSample d = detail::sample_shape(*spec.drive, g.x_axis());
    for (std::size_t i = 0; i < d.gradient.size(); ++i)
      gmax = std::max(gmax, std::abs(v.gradient[i]) + std::abs(d.gradient[i]));
  }
  if (gmax * dt > g.dp())
    warn(diag, "resolution: max|dV/dx|*dt = " + std::to_string(gmax * dt) +
                   " exceeds dp = " + std::to_string(g.dp()));
  if (spec.time_dependent() && spec.omega * dt > 0.2)
    warn(diag, "resolution: omega*dt = " + std::to_string(spec.omega * dt) + " exceeds 0.2");
}

/// Warns when the field has not decayed below 1e-12 of its peak at the p-boundary.
inline void check_p_decay(std::span<const cd> v, const PhaseGrid& g, Diagnostics* diag) {
  double peak = 0.0, edge = 0.0;
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.np(); ++j) {
      const double a = std::abs(v[g.index(i, j)]);
      peak = std::max(peak, a);
      if (j == 0 || j == g.np() - 1) edge = std::max(edge, a);
    }
  if (peak > 0 && edge > 1e-12 * peak)
    warn(diag, "boundary: field at the p-boundary is " + std::to_string(edge / peak) +
                   " of its peak (needs < 1e-12)");
}

inline void require_finite(std::span<const cd> v, const char* substep, double t) {
  if (!all_finite(v))
    throw NumericalError(std::string("non-finite values after ") + substep + " at t = " +
                         std::to_string(t));
}

}  // namespace detail

/// Which dissipative operator the stepper splits against the Hamiltonian part.
enum class WaveModel { modified_kramers, legacy_diffusion };

/// Reusable integrator for one (grid, params, potential, dt). Splitting per step:
///   D(dt/2) exact relaxation, then Hamiltonian part drift(dt/2) kick(dt) drift(dt/2),
///   then D(dt/2). The kick samples V at the step midpoint.
/// Not thread-safe; one stepper per evolution.
class WaveStepper {
 public:
  WaveStepper(const PhaseGrid& grid, const PhysicalParams& params, const PotentialSpec& spec,
              double dt, WaveModel model = WaveModel::modified_kramers, Scheme scheme = Scheme::strang,
              Diagnostics* diag = nullptr)
      : grid_(grid), params_(params), spec_(spec), dt_(dt), model_(model), scheme_(scheme) {
    if (model == WaveModel::legacy_diffusion) params.validate_legacy();
    else params.validate();
    validate_potential(spec, grid.x_axis());
    if (!(dt > 0) || !std::isfinite(dt)) throw ValidationError("dt must be > 0");
    detail::check_resolution(grid, params, spec, dt, diag);
    const double inv_nx = 1.0 / grid.nx();
    drift_ = detail::drift_table(grid, params.mass, params.hbar, 0.5 * dt, true);
    drift_scaled_ = detail::drift_table(grid, params.mass, params.hbar, 0.5 * dt, true, inv_nx);
    if (!spec.time_dependent()) static_kick_ = kick_tables(0.0);
  }

  const PhaseGrid& grid() const { return grid_; }
  double dt() const { return dt_; }

  /// One step from time t.
  WaveField step(const WaveField& field, double t) {
    require_same_grid(field.grid(), grid_, "stepper");
    std::vector<cd> data(field.values().begin(), field.values().end());
    run(data, t, 1, true);
    return WaveField(grid_, std::move(data), t + dt_);
  }

  /// n consecutive steps from time t; adjacent relaxation half-steps are merged.
  WaveField advance(const WaveField& field, double t, std::size_t n) {
    require_same_grid(field.grid(), grid_, "stepper");
    std::vector<cd> data(field.values().begin(), field.values().end());
    if (n > 0) run(data, t, n, false);
    return WaveField(grid_, std::move(data), t + n * dt_);
  }

 private:
  struct KickTables {
    std::vector<double> gradient;
    std::vector<double> phase;
  };

  KickTables kick_tables(double t) const {
    const PotentialSample v = eval_potential(spec_, grid_.x_axis(), t);
    KickTables k{v.gradient, v.value};
    for (double& x : k.phase) x += params_.rest_term();
    return k;
  }

  const detail::OuKernel* ou(double tau) {
    auto it = ou_.find(tau);
    if (it == ou_.end())
      it = ou_.emplace(tau, std::make_unique<detail::OuKernel>(
                                grid_.p_axis(), detail::mode_centres(grid_, params_.hbar),
                                params_.thermal_variance(), params_.gamma * tau))
               .first;
    return it->second.get();
  }

  const detail::LegacyKernel* legacy(double tau) {
    auto it = legacy_.find(tau);
    if (it == legacy_.end())
      it = legacy_.emplace(tau, std::make_unique<detail::LegacyKernel>(grid_, params_.hbar, params_.a,
                                                                       params_.b, tau))
               .first;
    return it->second.get();
  }

  /// Dissipative flow on x-Fourier data.
  void dissipate(std::vector<cd>& spec, double tau, double t) {
    if (tau == 0.0) return;
    if (model_ == WaveModel::legacy_diffusion) legacy(tau)->apply(spec);
    else if (params_.gamma > 0) ou(tau)->apply(spec);
    detail::require_finite(spec, "relaxation sub-step", t);
  }

  void kick(std::vector<cd>& data, double t_mid) {
    if (static_kick_) {
      detail::kick_p(data, grid_, static_kick_->gradient, static_kick_->phase, params_.hbar, dt_);
    } else {
      const KickTables k = kick_tables(t_mid);
      detail::kick_p(data, grid_, k.gradient, k.phase, params_.hbar, dt_);
    }
    detail::require_finite(data, "momentum kick sub-step", t_mid);
  }

  void run(std::vector<cd>& data, double t0, std::size_t n, bool unfused) {
    const double half = 0.5 * dt_;
    const bool lie = scheme_ == Scheme::lie;
    detail::fft_x(data, grid_, detail::kForward);
    dissipate(data, lie ? dt_ : half, t0);
    for (std::size_t s = 0; s < n; ++s) {
      const double t = t0 + s * dt_;
      detail::multiply(data, drift_scaled_);
      detail::fft_x(data, grid_, detail::kBackward);
      detail::require_finite(data, "drift sub-step", t);
      kick(data, t + half);
      detail::fft_x(data, grid_, detail::kForward);
      detail::multiply(data, drift_);
      detail::require_finite(data, "drift sub-step", t + dt_);
      if (lie) {
        if (s + 1 < n) dissipate(data, dt_, t + dt_);
      } else {
        dissipate(data, (s + 1 < n && !unfused) ? dt_ : half, t + dt_);
      }
    }
    const double inv = 1.0 / grid_.nx();
    for (cd& z : data) z *= inv;
    detail::fft_x(data, grid_, detail::kBackward);
  }

  PhaseGrid grid_;
  PhysicalParams params_;
  PotentialSpec spec_;
  double dt_;
  WaveModel model_;
  Scheme scheme_;
  std::vector<cd> drift_;
  std::vector<cd> drift_scaled_;
  std::optional<KickTables> static_kick_;
  std::map<double, std::unique_ptr<detail::OuKernel>> ou_;
  std::map<double, std::unique_ptr<detail::LegacyKernel>> legacy_;
};

inline WaveField step_modified_kramers(const WaveField& field, const PhysicalParams& params,
                                       const PotentialSpec& spec, double dt,
                                       Diagnostics* diag = nullptr) {
  WaveStepper stepper(field.grid(), params, spec, dt, WaveModel::modified_kramers, Scheme::strang, diag);
  return stepper.step(field, field.time());
}

inline WaveField step_legacy_diffusion(const WaveField& field, const PhysicalParams& params,
                                       const PotentialSpec& spec, double dt,
                                       Diagnostics* diag = nullptr) {
  WaveStepper stepper(field.grid(), params, spec, dt, WaveModel::legacy_diffusion, Scheme::strang, diag);
  return stepper.step(field, field.time());
}

/// Density-weighted mean of p^2/2m + V(x, t).
inline double mean_energy(const WaveField& field, const PhysicalParams& params,
                          const PotentialSpec& spec, double t) {
  const PhaseGrid& g = field.grid();
  const PotentialSample v = eval_potential(spec, g.x_axis(), t);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.np(); ++j) {
      const double r = std::norm(field(i, j));
      const double p = g.p(j);
      num += r * (p * p / (2.0 * params.mass) + v.value[i]);
      den += r;
    }
  return den > 0 ? num / den : 0.0;
}

/// Called after every step with the step index (1-based) and the new field.
using WaveObserver = std::function<void(std::size_t, const WaveField&)>;

/// Fixed-step loop around WaveStepper. Snapshots at step 0, every
/// snapshot_stride steps, and the final step.
inline WaveTrajectory evolve(const WaveField& initial, const PhysicalParams& params,
                             const PotentialSpec& spec, const EvolveSpec& ev,
                             const std::vector<WaveObserver>& observers = {},
                             Diagnostics* diag = nullptr,
                             WaveModel model = WaveModel::modified_kramers) {
  ev.validate();
  if (!initial.is_finite()) throw ValidationError("initial field has non-finite samples");
  detail::check_p_decay(initial.values(), initial.grid(), diag);
  WaveTrajectory traj;
  traj.times.push_back(initial.time());
  traj.snapshots.push_back(initial);
  const std::size_t n = ev.steps();
  if (n == 0) return traj;
  WaveStepper stepper(initial.grid(), params, spec, ev.dt, model, ev.scheme, diag);
  const StationaryModel smodel =
      model == WaveModel::legacy_diffusion ? StationaryModel::legacy : StationaryModel::kramers;
  WaveField state = initial;
  const double t0 = initial.time();
  traj.diagnostics.reserve(n);
  for (std::size_t s = 1; s <= n; ++s) {
    try {
      state = stepper.step(state, t0 + (s - 1) * ev.dt);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " (step " + std::to_string(s) + ")");
    }
    state = state.with_time(t0 + s * ev.dt);
    if (ev.renormalize) state = normalized(state);
    StepDiagnostics d;
    d.time = state.time();
    d.norm = l2_norm(state);
    d.energy = mean_energy(state, params, spec, d.time);
    if (ev.track_residual) d.residual = stationary_residual(state, params, smodel);
    traj.diagnostics.push_back(d);
    for (const auto& obs : observers) obs(s, state);
    if (s % ev.snapshot_stride == 0 || s == n) {
      traj.times.push_back(state.time());
      traj.snapshots.push_back(state);
    }
  }
  return traj;
}

}  // namespace phasewave
