#pragma once

// Resolved run configuration shared by the CLI, the config file reader and
// the experiment harness.

#include <cstdint>
#include <string>
#include <vector>

#include "phasewave/core/grid.hpp"
#include "phasewave/core/params.hpp"
#include "phasewave/core/potential.hpp"
#include "phasewave/evolvers/kramers.hpp"

namespace phasewave {

enum class ExperimentKind {
  none,
  relaxation,
  schrodinger_agreement,
  invariance,
  classical_limit,
  decoherence,
  oscillating_potential,
};

enum class InitialKind { gaussian, eigenstate, superposition, file };

/// Equation advanced by the `evolve` subcommand.
enum class EvolveModel { modified_kramers, legacy, kramers_fp, liouville, schrodinger };

/// Initial state. gaussian: psi ~ exp(-(x-x0)^2/(4 sigma^2) + i p0 x / hbar);
/// eigenstate: level `level` of the (smoothed) Schrodinger Hamiltonian;
/// superposition: equal-weight sum of `levels`; file: snapshot at `path`.
/// With lift = true psi is lifted into the stationary subspace. Otherwise a
/// gaussian becomes psi(x) * exp(-(p-p0)^2/(4 sigma_p^2)).
struct InitialSpec {
  InitialKind kind = InitialKind::gaussian;
  double x0 = 0.0;
  double p0 = 0.0;
  double sigma = 1.0;
  double sigma_p = 0.5;
  int level = 0;
  std::vector<int> levels{0, 1};
  std::string path;
  bool lift = true;
  double smoothing_sigma = 0.0;

  bool operator==(const InitialSpec&) const = default;
};

/// Experiment-specific knobs with calibrated defaults.
struct ExperimentKnobs {
  std::vector<double> gamma_sweep{5.0, 10.0, 20.0};
  std::vector<double> ab_sweep{1.0, 2.0};
  std::vector<double> omega_sweep{0.0, 5.0, 20.0, 80.0};
  std::vector<double> sigma_fit{0.0, 0.1, 0.2, 0.3, 0.5};
  double perturbation = 0.5;     // relaxation: amplitude of the p-tilt
  double fit_floor = 1e-3;       // relaxation: fit window ends when residual < floor * residual(0)
  double boost_u = 1.0;          // invariance: Galileo velocity
  int refine = 2;                // invariance: refinement factor for the second resolution
  double gauge_alpha = 0.3;      // invariance: g = alpha x p
  std::uint64_t seed = 12345;    // invariance: random gauges
  double companion_quartic = 0.1;  // agreement, decoherence, oscillating: anharmonic c4

  bool operator==(const ExperimentKnobs&) const = default;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::none;
  EvolveModel model = EvolveModel::modified_kramers;
  PhaseGrid grid;
  PhysicalParams params;
  PotentialSpec potential;
  InitialSpec initial;
  EvolveSpec evolve;
  ExperimentKnobs knobs;
};

inline const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::none: return "none";
    case ExperimentKind::relaxation: return "relaxation";
    case ExperimentKind::schrodinger_agreement: return "schrodinger_agreement";
    case ExperimentKind::invariance: return "invariance";
    case ExperimentKind::classical_limit: return "classical_limit";
    case ExperimentKind::decoherence: return "decoherence";
    case ExperimentKind::oscillating_potential: return "oscillating_potential";
  }
  return "none";
}

inline const char* to_string(EvolveModel m) {
  switch (m) {
    case EvolveModel::modified_kramers: return "modified_kramers";
    case EvolveModel::legacy: return "legacy";
    case EvolveModel::kramers_fp: return "kramers_fp";
    case EvolveModel::liouville: return "liouville";
    case EvolveModel::schrodinger: return "schrodinger";
  }
  return "modified_kramers";
}

inline const char* to_string(InitialKind k) {
  switch (k) {
    case InitialKind::gaussian: return "gaussian";
    case InitialKind::eigenstate: return "eigenstate";
    case InitialKind::superposition: return "superposition";
    case InitialKind::file: return "file";
  }
  return "gaussian";
}

inline const char* to_string(Scheme s) { return s == Scheme::lie ? "lie" : "strang"; }

}  // namespace phasewave
