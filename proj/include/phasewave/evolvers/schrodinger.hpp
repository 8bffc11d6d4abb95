#pragma once

// Configuration-space reference: i hbar psi_t = (-hbar^2/2m psi_xx + V_sigma) psi,
// with V_sigma the potential convolved with a Gaussian of deviation sigma.

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <vector>

#include "phasewave/core/fields.hpp"
#include "phasewave/core/params.hpp"
#include "phasewave/core/potential.hpp"

namespace phasewave {

/// Strang split-step: potential half-steps around a kinetic step, with V
/// sampled at the step midpoint.
class SchrodingerStepper {
 public:
  SchrodingerStepper(const Axis& axis, const PhysicalParams& params, const PotentialSpec& spec,
                     double dt, double sigma = 0.0)
      : axis_(axis), params_(params), spec_(spec), dt_(dt), sigma_(sigma) {
    params.validate();
    validate_potential(spec, axis);
    if (!(dt > 0) || !std::isfinite(dt)) throw ValidationError("dt must be > 0");
    if (!(sigma >= 0) || !std::isfinite(sigma)) throw ValidationError("smoothing sigma must be >= 0");
    const int n = axis.size();
    kinetic_.resize(n);
    for (int k = 0; k < n; ++k) {
      const double s = axis.wavenumber(k);
      kinetic_[k] = std::polar(1.0 / n, -params.hbar * s * s * dt / (2.0 * params.mass));
    }
    if (!spec.time_dependent()) static_half_ = potential_half(0.0);
  }

  ConfigWavefunction step(const ConfigWavefunction& psi, double t) const {
    if (!(psi.axis() == axis_)) throw ValidationError("wavefunction axis does not match stepper");
    std::vector<cd> v(psi.values().begin(), psi.values().end());
    const std::vector<cd> half = static_half_ ? *static_half_ : potential_half(t + 0.5 * dt_);
    const int n = axis_.size();
    for (int i = 0; i < n; ++i) v[i] *= half[i];
    detail::fft_1d(v, detail::kForward);
    for (int k = 0; k < n; ++k) v[k] *= kinetic_[k];
    detail::fft_1d(v, detail::kBackward);
    for (int i = 0; i < n; ++i) v[i] *= half[i];
    return ConfigWavefunction(axis_, std::move(v), t + dt_);
  }

  ConfigWavefunction advance(ConfigWavefunction psi, std::size_t n) const {
    const double t0 = psi.time();
    for (std::size_t s = 0; s < n; ++s) psi = step(psi, t0 + s * dt_);
    return psi;
  }

 private:
  std::vector<cd> potential_half(double t) const {
    const PotentialSample v = eval_potential(spec_, axis_, t, sigma_);
    std::vector<cd> h(v.value.size());
    for (std::size_t i = 0; i < h.size(); ++i)
      h[i] = std::polar(1.0, -0.5 * dt_ * (v.value[i] + params_.rest_term()) / params_.hbar);
    return h;
  }

  Axis axis_;
  PhysicalParams params_;
  PotentialSpec spec_;
  double dt_;
  double sigma_;
  std::vector<cd> kinetic_;
  std::optional<std::vector<cd>> static_half_;
};

inline ConfigWavefunction step_schrodinger(const ConfigWavefunction& psi, const PhysicalParams& params,
                                           const PotentialSpec& spec, double dt,
                                           double smoothing_sigma = 0.0) {
  return SchrodingerStepper(psi.axis(), params, spec, dt, smoothing_sigma).step(psi, psi.time());
}

struct Eigenstates {
  std::vector<double> energies;
  std::vector<ConfigWavefunction> states;  // unit norm, largest component real positive
};

/// Lowest `count` eigenpairs of the spectral Hamiltonian on the x-grid, with
/// the potential sampled at time t and smoothed by sigma.
inline Eigenstates eigenstates(const Axis& axis, const PhysicalParams& params,
                               const PotentialSpec& spec, int count, double sigma = 0.0,
                               double t = 0.0) {
  params.validate();
  const int n = axis.size();
  if (count < 1 || count > n) throw ValidationError("eigenstate count out of range");
  const PotentialSample v = eval_potential(spec, axis, t, sigma);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  const double c = params.hbar * params.hbar / (2.0 * params.mass);
  std::vector<double> k2(n);
  for (int k = 0; k < n; ++k) k2[k] = axis.wavenumber(k) * axis.wavenumber(k);
  std::vector<double> kernel(n, 0.0);  // kinetic entry as a function of i - j
  for (int d = 0; d < n; ++d) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += k2[k] * std::cos(axis.wavenumber(k) * d * axis.step());
    kernel[d] = c * s / n;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) h(i, j) = kernel[(i - j + n) % n];
    h(i, i) += v.value[i] + params.rest_term();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success) throw NumericalError("eigenstates: diagonalization failed");
  Eigenstates out;
  const double scale = 1.0 / std::sqrt(axis.step());
  for (int m = 0; m < count; ++m) {
    Eigen::VectorXd vec = solver.eigenvectors().col(m);
    Eigen::Index arg = 0;
    vec.cwiseAbs().maxCoeff(&arg);
    if (vec(arg) < 0) vec = -vec;
    std::vector<cd> vals(n);
    for (int i = 0; i < n; ++i) vals[i] = vec(i) * scale;
    out.energies.push_back(solver.eigenvalues()(m));
    out.states.emplace_back(axis, std::move(vals), t);
  }
  return out;
}

}  // namespace phasewave
