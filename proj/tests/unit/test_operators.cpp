#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "phasewave/operators.hpp"
#include "phasewave/transforms.hpp"

using namespace phasewave;

namespace {

const PhaseGrid kGrid = make_grid(256, 256, {-20.0, 20.0}, {-20.0, 20.0});
const PhaseGrid kSmall = make_grid(64, 64, {-10.0, 10.0}, {-10.0, 10.0});
const PotentialSpec kHarmonic{shape::Harmonic{1.0}, std::nullopt, 0.0};

using Fn = std::function<cd(double, double)>;

// exp(-(x-1)^2/2 - (p+0.5)^2/2 + 0.7 i x)
cd test_gaussian(double x, double p) {
  return std::exp(cd(-0.5 * (x - 1.0) * (x - 1.0) - 0.5 * (p + 0.5) * (p + 0.5), 0.7 * x));
}

WaveField sample(const PhaseGrid& g, const Fn& f) {
  std::vector<cd> v(g.size());
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.np(); ++j) v[g.index(i, j)] = f(g.x(i), g.p(j));
  return WaveField(g, std::move(v));
}

// Fourth-order centered differences of the closed-form function.
cd fd_x(const Fn& f, double x, double p, double h) {
  return (f(x - 2 * h, p) - 8.0 * f(x - h, p) + 8.0 * f(x + h, p) - f(x + 2 * h, p)) / (12.0 * h);
}
cd fd_p(const Fn& f, double x, double p, double h) {
  return (f(x, p - 2 * h) - 8.0 * f(x, p - h) + 8.0 * f(x, p + h) - f(x, p + 2 * h)) / (12.0 * h);
}
cd fd_xx(const Fn& f, double x, double p, double h) {
  return (-f(x - 2 * h, p) + 16.0 * f(x - h, p) - 30.0 * f(x, p) + 16.0 * f(x + h, p) - f(x + 2 * h, p)) /
         (12.0 * h * h);
}
cd fd_pp(const Fn& f, double x, double p, double h) {
  return (-f(x, p - 2 * h) + 16.0 * f(x, p - h) - 30.0 * f(x, p) + 16.0 * f(x, p + h) - f(x, p + 2 * h)) /
         (12.0 * h * h);
}

double relative_error(const WaveField& a, const WaveField& b) { return distance(a, b) / l2_norm(b); }

WaveField random_field(const PhaseGrid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<cd> v(g.size());
  for (cd& z : v) z = {n(rng), n(rng)};
  return WaveField(g, std::move(v));
}

}  // namespace

TEST(ApplyA, ConstantFieldGivesKineticPhase) {
  PhysicalParams params;
  params.mass = 2.0;
  const WaveField one(kSmall, std::vector<cd>(kSmall.size(), cd(1.0)));
  const WaveField out = apply_A(one, params, PotentialSpec{}, 0.0);
  for (int i = 0; i < kSmall.nx(); ++i)
    for (int j = 0; j < kSmall.np(); ++j) {
      const double p = kSmall.p(j);
      EXPECT_NEAR(std::abs(out(i, j) - cd(0.0, p * p / 4.0)), 0.0, 1e-12);
    }
}

TEST(ApplyA, MomentumOnlyFieldHasNoTransport) {
  const PhysicalParams params;
  const WaveField phi = sample(kSmall, [](double, double p) { return cd(std::exp(-p * p / 2.0)); });
  const WaveField out = apply_A(phi, params, PotentialSpec{}, 0.0);
  for (int i = 0; i < kSmall.nx(); ++i)
    for (int j = 0; j < kSmall.np(); ++j) {
      const double p = kSmall.p(j);
      EXPECT_NEAR(std::abs(out(i, j) - cd(0.0, p * p / 2.0) * phi(i, j)), 0.0, 1e-12);
    }
}

TEST(ApplyA, MatchesFiniteDifferenceOracle) {
  PhysicalParams params;
  params.mass = 1.3;
  const WaveField out = apply_A(sample(kGrid, test_gaussian), params, kHarmonic, 0.0);
  const double h = 1e-3;
  const WaveField oracle = sample(kGrid, [&](double x, double p) {
    const cd phase(0.0, -(0.5 * x * x - p * p / (2.0 * params.mass)));
    return x * fd_p(test_gaussian, x, p, h) - (p / params.mass) * fd_x(test_gaussian, x, p, h) +
           phase * test_gaussian(x, p);
  });
  EXPECT_LE(relative_error(out, oracle), 1e-6);
}

TEST(ApplyB, AnnihilatesMaxwellFactor) {
  PhysicalParams params;
  params.kT = 0.8;
  params.mass = 1.5;
  const double w = params.thermal_variance();
  const WaveField phi = sample(kSmall, [w](double, double p) { return cd(std::exp(-p * p / (2.0 * w))); });
  EXPECT_LE(l2_norm(apply_B(phi, params)), 1e-10);
}

TEST(ApplyB, ConstantFieldGivesOne) {
  const PhysicalParams params;
  const WaveField one(kSmall, std::vector<cd>(kSmall.size(), cd(1.0)));
  const WaveField out = apply_B(one, params);
  for (const cd& z : out.values()) EXPECT_NEAR(std::abs(z - 1.0), 0.0, 1e-12);
}

TEST(ApplyB, AnnihilatesResonantModes) {
  PhysicalParams params;
  params.hbar = 0.7;
  for (int k : {1, 3, -5, 9}) {
    const double s = 2.0 * std::numbers::pi * k / kSmall.x_axis().length();
    const double w = params.thermal_variance();
    const WaveField phi = sample(kSmall, [&](double x, double p) {
      const double q = p - params.hbar * s;
      return std::polar(std::exp(-q * q / (2.0 * w)), s * x);
    });
    EXPECT_LE(l2_norm(apply_B(phi, params)), 1e-10) << "k = " << k;
  }
}

TEST(ApplyB, MatchesFiniteDifferenceOracle) {
  PhysicalParams params;
  params.kT = 0.6;
  const double w = params.thermal_variance();
  const WaveField out = apply_B(sample(kGrid, test_gaussian), params);
  const double h = 1e-2;
  const Fn dphi_dx = [&](double x, double p) { return fd_x(test_gaussian, x, p, h); };
  const WaveField oracle = sample(kGrid, [&](double x, double p) {
    return test_gaussian(x, p) + p * fd_p(test_gaussian, x, p, h) + cd(0.0, 1.0) * fd_p(dphi_dx, x, p, h) +
           w * fd_pp(test_gaussian, x, p, h);
  });
  EXPECT_LE(relative_error(out, oracle), 1e-6);
}

TEST(ApplyDeltaAB, ConstantFieldSingleWavenumber) {
  PhysicalParams params;
  params.a = 0.8;
  params.b = 1.3;
  params.hbar = 1.1;
  const WaveField one(kSmall, std::vector<cd>(kSmall.size(), cd(1.0)));
  const WaveField out = apply_delta_ab(one, params);
  for (int i = 0; i < kSmall.nx(); ++i)
    for (int j = 0; j < kSmall.np(); ++j) {
      const double p = kSmall.p(j);
      const double expected = -params.a * params.a * p * p / (params.hbar * params.hbar) +
                              params.a * params.b / params.hbar;
      EXPECT_NEAR(std::abs(out(i, j) - expected), 0.0, 1e-12);
    }
}

TEST(ApplyDeltaAB, ResonantRidgeHasNoDecay) {
  // phi = e^{isx} on the slice p = hbar s: the a^2 term vanishes there.
  PhysicalParams params;
  params.a = 1.0;
  params.b = 0.0 + 1.0;
  const PhaseGrid g = make_grid(16, 16, {0.0, 2.0 * std::numbers::pi}, {-8.0, 8.0});
  const double s = 2.0;  // p = 2 is the sample j = 10
  const WaveField phi = sample(g, [s](double x, double) { return std::polar(1.0, s * x); });
  const WaveField out = apply_delta_ab(phi, params);
  for (int i = 0; i < g.nx(); ++i) EXPECT_NEAR(std::abs(out(i, 10) - params.a * params.b * phi(i, 10)), 0.0, 1e-12);
}

TEST(ApplyDeltaAB, MatchesFiniteDifferenceOracle) {
  PhysicalParams params;
  params.a = 0.8;
  params.b = 1.3;
  const WaveField out = apply_delta_ab(sample(kGrid, test_gaussian), params);
  const double h = 1e-2;
  const WaveField oracle = sample(kGrid, [&](double x, double p) {
    const cd coordinate = fd_xx(test_gaussian, x, p, h) - cd(0.0, 2.0 * p) * fd_x(test_gaussian, x, p, h) -
                          p * p * test_gaussian(x, p);
    return 0.64 * coordinate + 1.69 * fd_pp(test_gaussian, x, p, h) + 0.8 * 1.3 * test_gaussian(x, p);
  });
  EXPECT_LE(relative_error(out, oracle), 1e-6);
}

TEST(ApplyDeltaAB, RequiresPositiveAB) {
  const PhysicalParams params;
  EXPECT_THROW(apply_delta_ab(WaveField::zeros(kSmall), params), ValidationError);
}

TEST(GeneralizedRhs, KramersPotentialsReproduceAPlusGammaB) {
  PhysicalParams params;
  params.gamma = 2.5;
  params.kT = 0.7;
  const WaveField phi = sample(kGrid, test_gaussian);
  const WaveField rhs = apply_generalized_rhs(phi, kramers_potentials(kGrid, params, kHarmonic, 0.0), params,
                                              kHarmonic, 0.0);
  const WaveField direct = axpy(apply_A(phi, params, kHarmonic, 0.0), params.gamma, apply_B(phi, params));
  EXPECT_LE(relative_error(rhs, direct), 1e-12);
}

TEST(GeneralizedRhs, GammaZeroIsPureA) {
  const PhysicalParams params;
  const WaveField phi = sample(kGrid, test_gaussian);
  const WaveField rhs = apply_generalized_rhs(phi, kramers_potentials(kGrid, params, kHarmonic, 0.0), params,
                                              kHarmonic, 0.0);
  EXPECT_LE(relative_error(rhs, apply_A(phi, params, kHarmonic, 0.0)), 1e-12);
}

TEST(GeneralizedRhs, StaticGaugeMultipliesOutput) {
  PhysicalParams params;
  params.gamma = 1.0;
  const WaveField phi = sample(kGrid, test_gaussian);
  const AnalyticGauge g{[](double x, double p, double) { return GaugeSample{0.3 * x * p, 0.0, 0.3 * p, 0.3 * x}; }};
  const GaugePotentials pots = kramers_potentials(kGrid, params, kHarmonic, 0.0);
  const WaveField rate = apply_generalized_rhs(phi, pots, params, kHarmonic, 0.0);
  const WaveField rate2 = apply_generalized_rhs(gauge_transform(phi, g, 0.0, GaugeDirection::forward),
                                                gauge_shift_potentials(pots, g, 0.0), params, kHarmonic, 0.0);
  EXPECT_LE(relative_error(rate2, gauge_transform(rate, g, 0.0, GaugeDirection::forward)), 1e-10);
}

TEST(GeneralizedRhs, TimeDependentGaugeAddsRateTerm) {
  PhysicalParams params;
  params.gamma = 0.5;
  params.hbar = 0.9;
  const WaveField phi = sample(kGrid, test_gaussian);
  const double t = 0.4;
  const AnalyticGauge g{[](double x, double p, double t) {
    return GaugeSample{0.2 * t * x + 0.1 * std::sin(p), 0.2 * x, 0.2 * t, 0.1 * std::cos(p)};
  }};
  const GaugePotentials pots = kramers_potentials(kGrid, params, kHarmonic, t);
  const WaveField rate = apply_generalized_rhs(phi, pots, params, kHarmonic, t);
  const WaveField rate2 = apply_generalized_rhs(gauge_transform(phi, g, t, GaugeDirection::forward, params.hbar),
                                                gauge_shift_potentials(pots, g, t), params, kHarmonic, t);
  const GaugeTables tab = sample_gauge(g, kGrid, t);
  std::vector<cd> expected(kGrid.size());
  for (std::size_t k = 0; k < expected.size(); ++k)
    expected[k] = std::polar(1.0, -tab.g[k] / params.hbar) *
                  (rate.values()[k] - cd(0.0, 1.0 / params.hbar) * tab.dt[k] * phi.values()[k]);
  EXPECT_LE(relative_error(rate2, phi.with_values(expected)), 1e-9);
}

TEST(GeneralizedRhs, RejectsMismatchedTables) {
  const PhysicalParams params;
  GaugePotentials pots = kramers_potentials(kSmall, params, PotentialSpec{}, 0.0);
  pots.ax.pop_back();
  EXPECT_THROW(apply_generalized_rhs(WaveField::zeros(kSmall), pots, params, PotentialSpec{}, 0.0), ValidationError);
}

TEST(Gauge, ZeroGaugeIsIdentity) {
  const PhysicalParams params;
  const WaveField phi = sample(kSmall, test_gaussian);
  const AnalyticGauge zero{[](double, double, double) { return GaugeSample{}; }};
  const WaveField out = gauge_transform(phi, zero, 0.3, GaugeDirection::forward);
  for (std::size_t k = 0; k < phi.values().size(); ++k) EXPECT_EQ(out.values()[k], phi.values()[k]);
  const GaugePotentials pots = kramers_potentials(kSmall, params, kHarmonic, 0.0);
  const GaugePotentials shifted = gauge_shift_potentials(pots, zero, 0.3);
  EXPECT_EQ(shifted.a0, pots.a0);
  EXPECT_EQ(shifted.ax, pots.ax);
  EXPECT_EQ(shifted.bp, pots.bp);
}

TEST(Gauge, ModulusPreservedWithinOneUlp) {
  const WaveField phi = random_field(kSmall, 3);
  const AnalyticGauge g{[](double x, double p, double t) {
    return GaugeSample{std::sin(x) * p + t, 1.0, std::cos(x) * p, std::sin(x)};
  }};
  const WaveField out = gauge_transform(phi, g, 0.8, GaugeDirection::forward);
  for (std::size_t k = 0; k < phi.values().size(); ++k) {
    const double a = std::abs(phi.values()[k]), b = std::abs(out.values()[k]);
    EXPECT_LE(std::abs(a - b), std::nextafter(std::max(a, b), INFINITY) - std::max(a, b));
  }
}

TEST(Gauge, ForwardThenInverseRecovers) {
  const WaveField phi = random_field(kSmall, 4);
  const AnalyticGauge g{[](double x, double p, double) { return GaugeSample{x * p + 0.5 * x * x, 0.0, p + x, x}; }};
  const WaveField back = gauge_transform(gauge_transform(phi, g, 0.0, GaugeDirection::forward, 0.7), g, 0.0,
                                         GaugeDirection::inverse, 0.7);
  EXPECT_LE(relative_error(back, phi), 1e-14);
}

TEST(Gauge, TabulatedPartialsSpectral) {
  const PhaseGrid g = make_grid(32, 32, {0.0, 2.0 * std::numbers::pi}, {0.0, 2.0 * std::numbers::pi});
  std::vector<double> values(g.size());
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.np(); ++j) values[g.index(i, j)] = std::sin(g.x(i)) * std::cos(2.0 * g.p(j));
  const GaugeTables tab = sample_gauge(TabulatedGauge{g, values, {}}, g, 0.0);
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.np(); ++j) {
      const std::size_t k = g.index(i, j);
      EXPECT_NEAR(tab.dx[k], std::cos(g.x(i)) * std::cos(2.0 * g.p(j)), 1e-12);
      EXPECT_NEAR(tab.dp[k], -2.0 * std::sin(g.x(i)) * std::sin(2.0 * g.p(j)), 1e-12);
      EXPECT_EQ(tab.dt[k], 0.0);
    }
}

// Property: the operators are complex-linear.
TEST(OperatorsProperty, Linearity) {
  PhysicalParams params;
  params.a = 0.5;
  params.b = 0.9;
  params.gamma = 1.5;
  const GaugePotentials pots = kramers_potentials(kSmall, params, kHarmonic, 0.0);
  std::vector<std::function<WaveField(const WaveField&)>> ops{
      [&](const WaveField& f) { return apply_A(f, params, kHarmonic, 0.0); },
      [&](const WaveField& f) { return apply_B(f, params); },
      [&](const WaveField& f) { return apply_delta_ab(f, params); },
      [&](const WaveField& f) { return apply_generalized_rhs(f, pots, params, kHarmonic, 0.0); }};
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  for (std::size_t o = 0; o < ops.size(); ++o)
    for (int trial = 0; trial < 5; ++trial) {
      const WaveField u = random_field(kSmall, 100 + trial), v = random_field(kSmall, 200 + trial);
      const cd a(n(rng), n(rng)), b(n(rng), n(rng));
      const WaveField lhs = ops[o](axpy(scaled(u, a), b, v));
      const WaveField rhs = axpy(scaled(ops[o](u), a), b, ops[o](v));
      EXPECT_LE(relative_error(lhs, rhs), 1e-12) << "operator " << o;
    }
}

// Property: Re<phi, A phi> = 0 for smooth, well-resolved phi.
TEST(OperatorsProperty, ASkewSymmetric) {
  PhysicalParams params;
  params.rest_energy = 2.0;
  for (bool rest : {false, true}) {
    params.include_rest_phase = rest;
    for (double shift : {0.0, 0.7, -1.3}) {
      const WaveField phi = sample(kGrid, [shift](double x, double p) { return test_gaussian(x - shift, p + shift); });
      const double re = inner(phi, apply_A(phi, params, kHarmonic, 0.0)).real();
      EXPECT_LE(std::abs(re), 1e-10 * std::pow(l2_norm(phi), 2));
    }
  }
}

// Property: covariance under random analytic gauges.
TEST(OperatorsProperty, GaugeCovarianceRandom) {
  PhysicalParams params;
  params.gamma = 1.0;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> c(-0.3, 0.3);
  const WaveField phi = sample(kGrid, test_gaussian);
  const double t = 0.6;
  for (int trial = 0; trial < 3; ++trial) {
    const double c1 = c(rng), c2 = c(rng), c3 = c(rng);
    const AnalyticGauge g{[=](double x, double p, double t) {
      return GaugeSample{c1 * x * p + c2 * std::sin(x) + c3 * t * p, c3 * p, c1 * p + c2 * std::cos(x), c1 * x + c3 * t};
    }};
    const GaugePotentials pots = kramers_potentials(kGrid, params, kHarmonic, t);
    const WaveField rate = apply_generalized_rhs(phi, pots, params, kHarmonic, t);
    const WaveField rate2 = apply_generalized_rhs(gauge_transform(phi, g, t, GaugeDirection::forward),
                                                  gauge_shift_potentials(pots, g, t), params, kHarmonic, t);
    const GaugeTables tab = sample_gauge(g, kGrid, t);
    std::vector<cd> expected(kGrid.size());
    for (std::size_t k = 0; k < expected.size(); ++k)
      expected[k] = std::polar(1.0, -tab.g[k]) * (rate.values()[k] - cd(0.0, 1.0) * tab.dt[k] * phi.values()[k]);
    EXPECT_LE(relative_error(rate2, phi.with_values(expected)), 1e-9);
  }
}
