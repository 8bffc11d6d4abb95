#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <optional>
#include <random>

#include "phasewave/operators.hpp"
#include "phasewave/transforms.hpp"

using namespace phasewave;

namespace {

constexpr double kPi = std::numbers::pi;

const PhaseGrid kGrid = make_grid(128, 128, {-10.0, 10.0}, {-10.0, 10.0});

ConfigWavefunction gaussian_psi(const Axis& axis, double x0, double k0, double sigma) {
  std::vector<cd> v(axis.size());
  for (int i = 0; i < axis.size(); ++i) {
    const double x = axis.at(i) - x0;
    v[i] = std::polar(std::exp(-x * x / (4.0 * sigma * sigma)), k0 * axis.at(i));
  }
  return ConfigWavefunction(axis, std::move(v)).normalized();
}

ConfigWavefunction cat_state(const Axis& axis, double x0) {
  std::vector<cd> v(axis.size());
  for (int i = 0; i < axis.size(); ++i) {
    const double x = axis.at(i);
    v[i] = std::exp(-0.5 * (x - x0) * (x - x0)) + std::exp(-0.5 * (x + x0) * (x + x0));
  }
  return ConfigWavefunction(axis, std::move(v)).normalized();
}

// Random combination of the lowest |s| <= 8 Fourier modes.
ConfigWavefunction band_limited_psi(const Axis& axis, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<cd> v(axis.size(), cd(0.0));
  for (int m = -8; m <= 8; ++m) {
    const cd c(n(rng), n(rng));
    const double s = 2.0 * kPi * m / axis.length();
    for (int i = 0; i < axis.size(); ++i) v[i] += c * std::polar(1.0, s * axis.at(i));
  }
  return ConfigWavefunction(axis, std::move(v)).normalized();
}

double sum_cell(const RealField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s * f.grid().cell();
}

double min_value(const RealField& f) { return f.min_value(); }

double second_moment_x(const RealField& f) {
  const PhaseGrid& g = f.grid();
  double m = 0.0, s = 0.0, s2 = 0.0;
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.np(); ++j) {
      const double r = f(i, j);
      m += r;
      s += r * g.x(i);
      s2 += r * g.x(i) * g.x(i);
    }
  return s2 / m - (s / m) * (s / m);
}

}  // namespace

TEST(Lift, PlaneWaveIsSingleMode) {
  const PhaseGrid g = make_grid(32, 64, {0.0, 2.0 * kPi}, {-8.0, 8.0});
  PhysicalParams params;
  params.hbar = 0.8;
  params.kT = 1.3;
  const int s0 = 3;
  std::vector<cd> v(g.nx());
  for (int i = 0; i < g.nx(); ++i) v[i] = std::polar(1.0, s0 * g.x(i));
  const WaveField phi = lift_to_phase_space(ConfigWavefunction(g.x_axis(), v), params, g);
  std::vector<cd> o(g.size());
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.np(); ++j) {
      const double q = g.p(j) - params.hbar * s0;
      o[g.index(i, j)] = std::polar(std::exp(-q * q / (2.0 * params.thermal_variance())), s0 * g.x(i));
    }
  const WaveField oracle = normalized(WaveField(g, std::move(o)));
  EXPECT_NEAR(l2_norm(phi), 1.0, 1e-14);
  EXPECT_LE(phase_aligned_distance(phi, oracle), 1e-12);
}

TEST(Lift, AnnihilatedByB) {
  const PhaseGrid g = make_grid(128, 128, {-10.0, 10.0}, {-12.0, 12.0});
  const PhysicalParams params;
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const WaveField phi = lift_to_phase_space(band_limited_psi(g.x_axis(), rng), params, g);
    EXPECT_LE(l2_norm(apply_B(phi, params)) / l2_norm(phi), 1e-8);
  }
}

TEST(Lift, CentroidOfGaussian) {
  PhysicalParams params;
  params.hbar = 0.7;
  const ConfigWavefunction psi = gaussian_psi(kGrid.x_axis(), 1.0, 0.8, 0.9);
  const FieldMetrics m = field_metrics(lift_to_phase_space(psi, params, kGrid));
  EXPECT_NEAR(m.mean_x, 1.0, 1e-8);
  EXPECT_NEAR(m.mean_p, params.hbar * 0.8, 1e-8);
}

TEST(Lift, ZeroTemperatureRejected) {
  PhysicalParams params;
  params.kT = 0.0;
  EXPECT_THROW(lift_to_phase_space(gaussian_psi(kGrid.x_axis(), 0.0, 0.0, 1.0), params, kGrid), ValidationError);
}

TEST(Lift, AxisMismatchRejected) {
  const PhysicalParams params;
  EXPECT_THROW(lift_to_phase_space(gaussian_psi(Axis(64, -10.0, 10.0), 0.0, 0.0, 1.0), params, kGrid),
               ValidationError);
}

TEST(Project, IdempotentOnLiftedStates) {
  PhysicalParams params;
  params.kT = 0.7;
  const ConfigWavefunction psi = gaussian_psi(kGrid.x_axis(), -1.0, 0.5, 0.8);
  const WaveField phi = lift_to_phase_space(psi, params, kGrid);
  const Projection p = project_stationary(phi, params);
  EXPECT_LE(p.residual, 1e-10);
  EXPECT_LE(distance(p.projected, phi) / l2_norm(phi), 1e-10);
  EXPECT_LE(phase_aligned_distance(p.psi, psi), 1e-10);
}

TEST(Project, HermiteExcitationIsOrthogonal) {
  const PhysicalParams params;
  std::vector<cd> v(kGrid.size());
  for (int i = 0; i < kGrid.nx(); ++i) {
    const double s = kGrid.x_axis().wavenumber(5);
    for (int j = 0; j < kGrid.np(); ++j) {
      const double q = kGrid.p(j) - params.hbar * s;
      v[kGrid.index(i, j)] = q * std::exp(-q * q / 2.0) * std::polar(1.0, s * kGrid.x(i));
    }
  }
  EXPECT_NEAR(project_stationary(WaveField(kGrid, v), params).residual, 1.0, 1e-10);
}

TEST(Project, ZeroFieldRejected) {
  EXPECT_THROW(project_stationary(WaveField::zeros(kGrid), PhysicalParams{}), ValidationError);
}

// Property: projecting twice equals projecting once.
TEST(ProjectProperty, Idempotent) {
  const PhysicalParams params;
  std::mt19937_64 rng(23);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<cd> v(kGrid.size());
    for (cd& z : v) z = {n(rng), n(rng)};
    const Projection once = project_stationary(WaveField(kGrid, v), params);
    const Projection twice = project_stationary(once.projected, params);
    EXPECT_LE(distance(twice.projected, once.projected) / l2_norm(once.projected), 1e-12);
  }
}

// Property: psi -> lift -> project -> psi' recovers psi up to a unit scalar.
TEST(ProjectProperty, LiftRoundTrip) {
  const PhaseGrid g = make_grid(128, 128, {-10.0, 10.0}, {-12.0, 12.0});
  const PhysicalParams params;
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const ConfigWavefunction psi = band_limited_psi(g.x_axis(), rng);
    const Projection p = project_stationary(lift_to_phase_space(psi, params, g), params);
    const cd c = inner(psi, p.psi);
    EXPECT_NEAR(std::abs(c), 1.0, 1e-10);
    EXPECT_LE(phase_aligned_distance(p.psi, psi), 1e-10);
  }
}

// Property: the p-marginal of |lift(psi)|^2 is |psi|^2 smoothed in x with variance hbar^2 / (2 kT m).
TEST(LiftProperty, MarginalIsSmoothedDensity) {
  const PhaseGrid g = make_grid(128, 128, {-10.0, 10.0}, {-12.0, 12.0});
  PhysicalParams params;
  params.kT = 0.8;
  params.hbar = 0.9;
  const ConfigWavefunction psi = gaussian_psi(g.x_axis(), 0.5, 1.0, 0.6);
  const WaveField phi = lift_to_phase_space(psi, params, g);
  const double var = params.hbar * params.hbar / (2.0 * params.thermal_variance());
  double worst = 0.0;
  for (int i = 0; i < g.nx(); ++i) {
    double marginal = 0.0;
    for (int j = 0; j < g.np(); ++j) marginal += std::norm(phi(i, j)) * g.dp();
    double smoothed = 0.0;
    for (int k = 0; k < g.nx(); ++k) {
      const double d = g.x(i) - g.x(k);
      smoothed += std::norm(psi.values()[k]) * std::exp(-d * d / (2.0 * var)) / std::sqrt(2.0 * kPi * var) * g.dx();
    }
    worst = std::max(worst, std::abs(marginal - smoothed));
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(Wigner, GaussianMatchesClosedForm) {
  const PhysicalParams params;
  const ConfigWavefunction psi = gaussian_psi(kGrid.x_axis(), 0.0, 0.0, std::sqrt(0.5));
  const WignerResult w = wigner(psi, params, kGrid);
  double worst = 0.0;
  for (int i = 0; i < kGrid.nx(); ++i)
    for (int j = 0; j < kGrid.np(); ++j) {
      const double x = kGrid.x(i), p = kGrid.p(j);
      worst = std::max(worst, std::abs(w.wigner(i, j) - std::exp(-x * x - p * p) / kPi));
    }
  EXPECT_LE(worst, 1e-8);
  EXPECT_LE(w.imaginary_residue, 1e-10);
}

TEST(Wigner, MassEqualsNorm) {
  PhysicalParams params;
  params.hbar = 0.6;
  const ConfigWavefunction psi = gaussian_psi(kGrid.x_axis(), 1.0, 1.5, 0.7);
  EXPECT_NEAR(sum_cell(wigner(psi, params, kGrid).wigner), 1.0, 1e-8);
}

TEST(Wigner, CatStateIsNegative) {
  const ConfigWavefunction psi = cat_state(kGrid.x_axis(), 3.0);
  EXPECT_LT(min_value(wigner(psi, PhysicalParams{}, kGrid).wigner), -0.01);
}

TEST(Husimi, CatStateNonnegative) {
  const PhysicalParams params;
  const ConfigWavefunction psi = cat_state(kGrid.x_axis(), 3.0);
  const RealField q = husimi(psi, params, std::sqrt(0.5), kGrid);
  EXPECT_GE(min_value(q), -1e-9);
  EXPECT_NEAR(sum_cell(q), sum_cell(wigner(psi, params, kGrid).wigner), 1e-8);
}

TEST(Husimi, GaussianVariancesAdd) {
  const PhysicalParams params;
  const double sigma = 0.8, sx = 0.6;
  const ConfigWavefunction psi = gaussian_psi(kGrid.x_axis(), 0.0, 0.0, sigma);
  const RealField q = husimi(psi, params, sx, kGrid);
  EXPECT_NEAR(second_moment_x(q), sigma * sigma + sx * sx, 1e-6);
}

TEST(Husimi, DefaultSigma) {
  PhysicalParams params;
  params.hbar = 0.5;
  params.a = 2.0;
  params.b = 4.0;
  EXPECT_DOUBLE_EQ(default_husimi_sigma(params), 0.125);
}

TEST(Husimi, RejectsNonPositiveSigma) {
  const ConfigWavefunction psi = gaussian_psi(kGrid.x_axis(), 0.0, 0.0, 1.0);
  EXPECT_THROW(husimi(psi, PhysicalParams{}, 0.0, kGrid), ValidationError);
  EXPECT_THROW(husimi(psi, PhysicalParams{}, -1.0, kGrid), ValidationError);
}

// Property: Wigner of cat states goes negative while their Husimi stays nonnegative.
TEST(WignerHusimiProperty, Dichotomy) {
  const PhysicalParams params;
  for (double x0 : {2.0, 3.0, 4.0}) {
    const ConfigWavefunction psi = cat_state(kGrid.x_axis(), x0);
    EXPECT_LT(min_value(wigner(psi, params, kGrid).wigner), 0.0) << "x0 = " << x0;
    for (double sx : {0.4, std::sqrt(0.5), 1.2})
      EXPECT_GE(min_value(husimi(psi, params, sx, kGrid)), -1e-9) << "x0 = " << x0 << ", sigma = " << sx;
  }
}

TEST(Boost, ZeroVelocityIsIdentity) {
  const PhysicalParams params;
  const WaveField phi = lift_to_phase_space(gaussian_psi(kGrid.x_axis(), 1.0, 0.5, 0.8), params, kGrid);
  const WaveField out = galileo_boost(phi, 0.0, params, 0.7);
  for (std::size_t k = 0; k < phi.values().size(); ++k) {
    const cd a = phi.values()[k], b = out.values()[k];
    EXPECT_LE(std::abs(a.real() - b.real()), std::abs(std::nextafter(a.real(), INFINITY) - a.real()));
    EXPECT_LE(std::abs(a.imag() - b.imag()), std::abs(std::nextafter(a.imag(), INFINITY) - a.imag()));
  }
}

TEST(Boost, NormPreserved) {
  PhysicalParams params;
  params.mass = 1.4;
  const WaveField phi = lift_to_phase_space(gaussian_psi(kGrid.x_axis(), 0.0, 0.0, 0.8), params, kGrid);
  for (double u : {-1.5, 0.3, 1.0, 2.0}) EXPECT_NEAR(l2_norm(galileo_boost(phi, u, params, 0.5)), 1.0, 1e-12);
}

TEST(Boost, ComposesAtTimeZero) {
  const PhysicalParams params;
  const WaveField phi = lift_to_phase_space(gaussian_psi(kGrid.x_axis(), 0.5, 0.0, 0.8), params, kGrid);
  const WaveField twice = galileo_boost(galileo_boost(phi, 0.7, params, 0.0), 0.6, params, 0.0);
  const WaveField once = galileo_boost(phi, 1.3, params, 0.0);
  const RealField da = field_metrics(twice).density, db = field_metrics(once).density;
  double worst = 0.0, peak = 0.0;
  for (std::size_t k = 0; k < da.values().size(); ++k) {
    worst = std::max(worst, std::abs(da.values()[k] - db.values()[k]));
    peak = std::max(peak, db.values()[k]);
  }
  EXPECT_LE(worst, 1e-10);
  // The remaining phase is uniform wherever the field is not negligible.
  double phase_spread = 0.0;
  std::optional<double> first;
  for (std::size_t k = 0; k < da.values().size(); ++k) {
    if (db.values()[k] < 1e-6 * peak) continue;
    const double ph = std::arg(twice.values()[k] / once.values()[k]);
    if (!first) first = ph;
    phase_spread = std::max(phase_spread, std::abs(std::remainder(ph - *first, 2.0 * kPi)));
  }
  EXPECT_LE(phase_spread, 1e-8);
}

TEST(Boost, LargeShiftWarns) {
  const PhysicalParams params;
  Diagnostics diag;
  const WaveField phi = lift_to_phase_space(gaussian_psi(kGrid.x_axis(), 0.0, 0.0, 0.8), params, kGrid);
  galileo_boost(phi, 15.0, params, 1.0, &diag);
  EXPECT_FALSE(diag.warnings.empty());
}
