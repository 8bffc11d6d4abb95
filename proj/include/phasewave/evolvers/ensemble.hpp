#pragma once

// Mixed waves: weighted ensembles of wave fields with a common trace
// normalization, and the dense density-operator evolution on tiny grids.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <string>
#include <vector>

#include "phasewave/core/fields.hpp"
#include "phasewave/evolvers/kramers.hpp"
#include "phasewave/operators.hpp"

namespace phasewave {

/// sum weight * ||field||^2
inline double ensemble_trace(const Ensemble& ens) {
  double t = 0.0;
  for (const auto& m : ens.members()) t += m.weight * squared_norm(m.field.values(), m.field.grid().cell());
  return t;
}

/// Every member multiplied by one positive factor so the trace is 1.
inline Ensemble normalize_trace(const Ensemble& ens) {
  const double tr = ensemble_trace(ens);
  if (!(tr > 0) || !std::isfinite(tr)) throw NumericalError("ensemble trace collapsed to " + std::to_string(tr));
  const double f = 1.0 / std::sqrt(tr);
  std::vector<EnsembleMember> members;
  for (const auto& m : ens.members()) members.push_back({m.weight, scaled(m.field, f)});
  return Ensemble(std::move(members));
}

/// rho(x, p) = sum weight |field|^2 / trace
inline DensityField mixed_density(const Ensemble& ens) {
  const PhaseGrid& g = ens.grid();
  std::vector<double> rho(g.size(), 0.0);
  for (const auto& m : ens.members()) {
    const auto v = m.field.values();
    for (std::size_t k = 0; k < rho.size(); ++k) rho[k] += m.weight * std::norm(v[k]);
  }
  const double tr = ensemble_trace(ens);
  for (double& r : rho) r /= tr;
  return DensityField(g, std::move(rho), ens.time());
}

struct EnsembleTrajectory {
  std::vector<double> times;
  std::vector<Ensemble> snapshots;
  std::vector<double> traces;  // after each step's renormalization
};

/// Each member advanced by the modified Kramers stepper, then the whole
/// ensemble rescaled to unit trace.
inline EnsembleTrajectory evolve_ensemble(const Ensemble& ens, const PhysicalParams& params,
                                          const PotentialSpec& spec, const EvolveSpec& ev,
                                          Diagnostics* diag = nullptr) {
  ev.validate();
  EnsembleTrajectory traj;
  Ensemble state = normalize_trace(ens);
  traj.times.push_back(state.time());
  traj.snapshots.push_back(state);
  const std::size_t n = ev.steps();
  if (n == 0) return traj;
  WaveStepper stepper(ens.grid(), params, spec, ev.dt, WaveModel::modified_kramers, ev.scheme, diag);
  const double t0 = state.time();
  for (std::size_t s = 1; s <= n; ++s) {
    std::vector<EnsembleMember> next;
    for (const auto& m : state.members())
      next.push_back({m.weight, stepper.step(m.field, t0 + (s - 1) * ev.dt).with_time(t0 + s * ev.dt)});
    state = normalize_trace(Ensemble(std::move(next)));
    traj.traces.push_back(ensemble_trace(state));
    if (s % ev.snapshot_stride == 0 || s == n) {
      traj.times.push_back(state.time());
      traj.snapshots.push_back(state);
    }
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Density operator on a tiny grid. The kernel rho(z, z') is stored as a dense
// matrix over flattened grid indices; the trace is dx*dp*sum_i K_ii.

struct SmallDensityMatrix {
  static constexpr std::size_t kMaxSize = 4096;

  PhaseGrid grid;
  Eigen::MatrixXcd matrix;
  double time = 0.0;

  double trace() const { return matrix.diagonal().real().sum() * grid.cell(); }

  /// |phi><phi| / ||phi||^2
  static SmallDensityMatrix pure(const WaveField& phi) {
    check_size(phi.grid());
    const Eigen::Map<const Eigen::VectorXcd> v(phi.values().data(), phi.values().size());
    SmallDensityMatrix rho{phi.grid(), v * v.adjoint(), phi.time()};
    rho.matrix /= rho.trace();
    return rho;
  }

  static void check_size(const PhaseGrid& g) {
    if (g.size() > kMaxSize)
      throw ValidationError("density matrix grid has " + std::to_string(g.size()) +
                            " points, limit is 4096");
  }

  /// Largest deviation from Hermiticity.
  double hermiticity_error() const { return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff(); }
};

/// Dense matrix of phi -> A phi + gamma B phi on the grid, V sampled at t.
inline Eigen::MatrixXcd build_generator(const PhaseGrid& grid, const PhysicalParams& params,
                                        const PotentialSpec& spec, double t = 0.0) {
  SmallDensityMatrix::check_size(grid);
  const std::size_t n = grid.size();
  Eigen::MatrixXcd d(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<cd> e(n, cd(0.0));
    e[c] = 1.0;
    const WaveField unit(grid, std::move(e));
    const WaveField a = apply_A(unit, params, spec, t);
    const WaveField b = apply_B(unit, params);
    for (std::size_t r = 0; r < n; ++r) d(r, c) = a.values()[r] + params.gamma * b.values()[r];
  }
  return d;
}

/// Propagator exp(D dt) for repeated steps with a fixed generator.
inline Eigen::MatrixXcd generator_propagator(const Eigen::MatrixXcd& generator, double dt) {
  return (generator * dt).exp();
}

/// rho <- M rho M^H / Tr with M = exp(D dt): the exact flow of
/// d rho/dt = D rho + rho D^H - rho Tr(D rho + rho D^H), then Hermitian symmetrization.
inline SmallDensityMatrix step_density_matrix_propagator(const SmallDensityMatrix& rho,
                                                         const Eigen::MatrixXcd& propagator, double dt) {
  if (propagator.rows() != rho.matrix.rows()) throw ValidationError("propagator size mismatch");
  SmallDensityMatrix out{rho.grid, propagator * rho.matrix * propagator.adjoint(), rho.time + dt};
  const double tr = out.trace();
  if (!(tr > 0) || !std::isfinite(tr))
    throw NumericalError("density matrix trace collapsed to " + std::to_string(tr) + "; reduce dt");
  out.matrix /= tr;
  out.matrix = 0.5 * (out.matrix + out.matrix.adjoint()).eval();
  return out;
}

inline SmallDensityMatrix step_density_matrix_small(const SmallDensityMatrix& rho,
                                                    const Eigen::MatrixXcd& generator, double dt) {
  if (!(dt > 0)) throw ValidationError("dt must be > 0");
  return step_density_matrix_propagator(rho, generator_propagator(generator, dt), dt);
}

}  // namespace phasewave
