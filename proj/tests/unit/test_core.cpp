#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "phasewave/core/fields.hpp"
#include "phasewave/core/grid.hpp"
#include "phasewave/core/params.hpp"
#include "phasewave/core/potential.hpp"

using namespace phasewave;

namespace {

const PhaseGrid kGrid256 = make_grid(256, 256, {-20.0, 20.0}, {-20.0, 20.0});

WaveField gaussian_field(const PhaseGrid& g, double x0 = 0.0, double p0 = 0.0) {
  std::vector<cd> v(g.size());
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.np(); ++j) {
      const double x = g.x(i) - x0, p = g.p(j) - p0;
      v[g.index(i, j)] = std::exp(-(x * x + p * p) / 2.0);
    }
  return WaveField(g, std::move(v));
}

}  // namespace

TEST(Grid, SpacingOf256Grid) {
  EXPECT_DOUBLE_EQ(kGrid256.dx(), 0.15625);
  EXPECT_DOUBLE_EQ(kGrid256.dp(), 0.15625);
}

TEST(Grid, MinimalGrid) {
  const PhaseGrid g = make_grid(8, 8, {0.0, 1.0}, {0.0, 1.0});
  EXPECT_DOUBLE_EQ(g.dx(), 0.125);
  EXPECT_DOUBLE_EQ(g.dp(), 0.125);
}

TEST(Grid, RejectsTooFewSamples) {
  EXPECT_THROW(make_grid(4, 256, {-20.0, 20.0}, {-20.0, 20.0}), ValidationError);
  EXPECT_THROW(make_grid(256, 7, {-20.0, 20.0}, {-20.0, 20.0}), ValidationError);
}

TEST(Grid, RejectsDegenerateExtents) {
  EXPECT_THROW(make_grid(16, 16, {1.0, 1.0}, {0.0, 1.0}), ValidationError);
  EXPECT_THROW(make_grid(16, 16, {0.0, 1.0}, {2.0, -2.0}), ValidationError);
}

TEST(Grid, SpacingRecomputable) {
  const PhaseGrid g = make_grid(96, 40, {-3.3, 7.1}, {-2.0, 5.5});
  EXPECT_NEAR(g.dx() * g.nx(), 7.1 + 3.3, 1e-13);
  EXPECT_NEAR(g.dp() * g.np(), 5.5 + 2.0, 1e-13);
}

TEST(Grid, WavenumbersPeriodicWithNyquistZero) {
  const Axis a(8, 0.0, 2.0 * std::numbers::pi);
  EXPECT_DOUBLE_EQ(a.wavenumber(1), 1.0);
  EXPECT_DOUBLE_EQ(a.wavenumber(7), -1.0);
  EXPECT_DOUBLE_EQ(a.wavenumber(4), 0.0);
  EXPECT_DOUBLE_EQ(a.raw_wavenumber(4), -4.0);
}

TEST(Params, ValidatesRanges) {
  PhysicalParams p;
  EXPECT_NO_THROW(p.validate());
  p.gamma = -1.0;
  EXPECT_THROW(p.validate(), ValidationError);
  p = {};
  p.hbar = 0.0;
  EXPECT_THROW(p.validate(), ValidationError);
  p = {};
  EXPECT_THROW(p.validate_legacy(), ValidationError);
  p.a = p.b = 1.0;
  EXPECT_NO_THROW(p.validate_legacy());
}

TEST(Params, RestTermOnlyWithFlag) {
  PhysicalParams p;
  p.rest_energy = 3.0;
  EXPECT_EQ(p.rest_term(), 0.0);
  p.include_rest_phase = true;
  EXPECT_EQ(p.rest_term(), 3.0);
}

TEST(Potential, Harmonic) {
  const PotentialSpec spec{shape::Harmonic{1.0}, std::nullopt, 0.0};
  const PotentialSample v = eval_potential(spec, kGrid256.x_axis(), 12.3);
  for (int i = 0; i < kGrid256.nx(); ++i) {
    const double x = kGrid256.x(i);
    EXPECT_DOUBLE_EQ(v.value[i], 0.5 * x * x);
    EXPECT_DOUBLE_EQ(v.gradient[i], x);
  }
}

TEST(Potential, DriveAtZeroAndQuarterPeriod) {
  const PotentialSpec spec{shape::Zero{}, shape::Harmonic{1.0}, 10.0};
  const PotentialSample at0 = eval_potential(spec, kGrid256.x_axis(), 0.0);
  const PotentialSample atq = eval_potential(spec, kGrid256.x_axis(), std::numbers::pi / 20.0);
  for (int i = 0; i < kGrid256.nx(); ++i) {
    const double x = kGrid256.x(i);
    EXPECT_DOUBLE_EQ(at0.value[i], 0.5 * x * x);
    EXPECT_NEAR(atq.value[i], 0.0, 1e-13);
  }
}

TEST(Potential, StaticSpecIndependentOfTime) {
  const PotentialSpec spec{shape::DoubleWell{1.0, 2.0}, shape::Quartic{0.3}, 0.0};
  const PotentialSample a = eval_potential(spec, kGrid256.x_axis(), 0.0);
  const PotentialSample b = eval_potential(spec, kGrid256.x_axis(), 17.25);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.gradient, b.gradient);
}

TEST(Potential, TabulatedGradientSpectral) {
  const Axis axis(64, 0.0, 2.0 * std::numbers::pi);
  std::vector<double> samples(64);
  for (int i = 0; i < 64; ++i) samples[i] = std::sin(3.0 * axis.at(i));
  const PotentialSpec spec{shape::Tabulated{samples}, std::nullopt, 0.0};
  const PotentialSample v = eval_potential(spec, axis, 0.0);
  for (int i = 0; i < 64; ++i) EXPECT_NEAR(v.gradient[i], 3.0 * std::cos(3.0 * axis.at(i)), 1e-12);
}

TEST(Potential, TabulatedWrongSizeRejected) {
  const PotentialSpec spec{shape::Tabulated{std::vector<double>(10, 0.0)}, std::nullopt, 0.0};
  EXPECT_THROW(eval_potential(spec, kGrid256.x_axis(), 0.0), ValidationError);
}

TEST(Fields, ConstantFieldNorm) {
  const WaveField f(kGrid256, std::vector<cd>(kGrid256.size(), cd(1.0)));
  EXPECT_NEAR(std::pow(l2_norm(f), 2), 1600.0, 1e-9);
}

TEST(Fields, SingleSampleNorm) {
  std::vector<cd> v(kGrid256.size());
  v[kGrid256.index(17, 99)] = std::polar(1.0, 0.4);
  const WaveField f(kGrid256, std::move(v));
  EXPECT_NEAR(std::pow(l2_norm(f), 2), kGrid256.dx() * kGrid256.dp(), 1e-15);
}

TEST(Fields, GaussianCentroidAtOrigin) {
  const FieldMetrics m = field_metrics(normalized(gaussian_field(kGrid256)));
  EXPECT_NEAR(m.mean_x, 0.0, 1e-12);
  EXPECT_NEAR(m.mean_p, 0.0, 1e-12);
}

TEST(Fields, DensityIntegratesToSquaredNorm) {
  const WaveField f = gaussian_field(kGrid256, 1.5, -2.0);
  const FieldMetrics m = field_metrics(f);
  EXPECT_NEAR(m.density.mass() / (m.l2_norm * m.l2_norm), 1.0, 1e-12);
}

TEST(Fields, RejectsWrongSampleCount) {
  EXPECT_THROW(WaveField(kGrid256, std::vector<cd>(10)), ValidationError);
}

// Property: ||c w|| = |c| ||w|| for random complex scalars and fields.
TEST(FieldsProperty, NormHomogeneous) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 1.0);
  const PhaseGrid g = make_grid(32, 24, {-3.0, 3.0}, {-4.0, 4.0});
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<cd> v(g.size());
    for (cd& z : v) z = {n(rng), n(rng)};
    const WaveField w(g, std::move(v));
    const cd c(n(rng), n(rng));
    EXPECT_NEAR(l2_norm(scaled(w, c)), std::abs(c) * l2_norm(w), 1e-12 * std::abs(c) * l2_norm(w));
  }
}

TEST(Fields, PhaseAlignedDistanceIgnoresGlobalPhase) {
  const WaveField a = normalized(gaussian_field(kGrid256, 1.0, 0.5));
  EXPECT_NEAR(phase_aligned_distance(a, scaled(a, std::polar(1.0, 2.1))), 0.0, 1e-12);
}

TEST(Fields, EnsembleRequiresCommonGrid) {
  const PhaseGrid g2 = make_grid(16, 16, {-1.0, 1.0}, {-1.0, 1.0});
  std::vector<EnsembleMember> m{{1.0, WaveField::zeros(kGrid256)}, {1.0, WaveField::zeros(g2)}};
  EXPECT_THROW(Ensemble{m}, ValidationError);
  EXPECT_THROW(Ensemble(std::vector<EnsembleMember>{}), ValidationError);
}
