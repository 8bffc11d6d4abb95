#pragma once

// Classical reference equations for phase-space densities: the Kramers
// Fokker-Planck equation and its friction-free limit, the Liouville equation.

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "phasewave/core/fields.hpp"
#include "phasewave/core/params.hpp"
#include "phasewave/core/potential.hpp"
#include "phasewave/evolvers/flows.hpp"
#include "phasewave/evolvers/kramers.hpp"

namespace phasewave {

/// Strang splitting: OU(dt/2) in p towards p = 0, drift(dt/2), kick(dt),
/// drift(dt/2), OU(dt/2). Each sub-flow conserves the zero Fourier mode, so
/// mass is conserved to rounding.
class DensityStepper {
 public:
  DensityStepper(const PhaseGrid& grid, const PhysicalParams& params, const PotentialSpec& spec,
                 double dt, bool friction, Diagnostics* diag = nullptr)
      : grid_(grid), params_(params), spec_(spec), dt_(dt), friction_(friction && params.gamma > 0) {
    params.validate();
    validate_potential(spec, grid.x_axis());
    if (!(dt > 0) || !std::isfinite(dt)) throw ValidationError("dt must be > 0");
    detail::check_resolution(grid, params, spec, dt, diag);
    drift_ = detail::drift_table(grid, params.mass, params.hbar, 0.5 * dt, false, 1.0 / grid.nx());
    if (friction_)
      ou_ = std::make_unique<detail::OuKernel>(grid.p_axis(), std::vector<double>(grid.nx(), 0.0),
                                               params.thermal_variance(), params.gamma * 0.5 * dt);
  }

  DensityField step(const DensityField& rho, double t) {
    require_same_grid(rho.grid(), grid_, "density stepper");
    std::vector<cd> data(rho.values().begin(), rho.values().end());
    const double before = rho.mass();
    if (ou_) ou_->apply(data);
    drift(data);
    const PotentialSample v = eval_potential(spec_, grid_.x_axis(), t + 0.5 * dt_);
    detail::kick_p(data, grid_, v.gradient, {}, params_.hbar, dt_);
    drift(data);
    if (ou_) ou_->apply(data);
    detail::require_finite(data, "density step", t);
    std::vector<double> out(data.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = data[i].real();
    DensityField next(grid_, std::move(out), t + dt_);
    const double after = next.mass();
    if (std::abs(after - before) > 1e-8 * std::max(1.0, std::abs(before)))
      throw NumericalError("density mass drifted from " + std::to_string(before) + " to " +
                           std::to_string(after) + " in one step at t = " + std::to_string(t));
    return next;
  }

 private:
  void drift(std::vector<cd>& data) const {
    detail::fft_x(data, grid_, detail::kForward);
    detail::multiply(data, drift_);
    detail::fft_x(data, grid_, detail::kBackward);
  }

  PhaseGrid grid_;
  PhysicalParams params_;
  PotentialSpec spec_;
  double dt_;
  bool friction_;
  std::vector<cd> drift_;
  std::unique_ptr<detail::OuKernel> ou_;
};

inline DensityField step_kramers_fp(const DensityField& rho, const PhysicalParams& params,
                                    const PotentialSpec& spec, double dt, Diagnostics* diag = nullptr) {
  DensityStepper stepper(rho.grid(), params, spec, dt, true, diag);
  return stepper.step(rho, rho.time());
}

inline DensityField step_liouville(const DensityField& rho, const PhysicalParams& params,
                                   const PotentialSpec& spec, double dt, Diagnostics* diag = nullptr) {
  DensityStepper stepper(rho.grid(), params, spec, dt, false, diag);
  return stepper.step(rho, rho.time());
}

using DensityTrajectory = Trajectory<DensityField>;

/// Fixed-step density evolution; `friction` selects Kramers (true) or Liouville.
inline DensityTrajectory evolve_density(const DensityField& initial, const PhysicalParams& params,
                                        const PotentialSpec& spec, const EvolveSpec& ev, bool friction,
                                        Diagnostics* diag = nullptr) {
  ev.validate();
  DensityTrajectory traj;
  traj.times.push_back(initial.time());
  traj.snapshots.push_back(initial);
  const std::size_t n = ev.steps();
  if (n == 0) return traj;
  DensityStepper stepper(initial.grid(), params, spec, ev.dt, friction, diag);
  DensityField state = initial;
  const double t0 = initial.time();
  for (std::size_t s = 1; s <= n; ++s) {
    state = stepper.step(state, t0 + (s - 1) * ev.dt);
    StepDiagnostics d;
    d.time = state.time();
    d.norm = state.mass();
    traj.diagnostics.push_back(d);
    if (s % ev.snapshot_stride == 0 || s == n) {
      traj.times.push_back(state.time());
      traj.snapshots.push_back(state);
    }
  }
  return traj;
}

}  // namespace phasewave
