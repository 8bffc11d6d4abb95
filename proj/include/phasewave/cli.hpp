#pragma once

// Command-line front end. Subcommands:
//   validate <config>
//   evolve <config> --out DIR
//   experiment <config> --out REPORT.json [--tables DIR]
//   transform wigner|husimi|lift|project|boost --config C --in IN --out OUT
// Exit codes: 0 success, 1 invalid input, 2 numerical failure. Diagnostics go
// to standard error; data products are written only after a run succeeds.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "phasewave/evolvers/classical.hpp"
#include "phasewave/evolvers/kramers.hpp"
#include "phasewave/evolvers/schrodinger.hpp"
#include "phasewave/experiments/experiments.hpp"
#include "phasewave/io/config_file.hpp"
#include "phasewave/io/files.hpp"
#include "phasewave/transforms.hpp"

namespace phasewave {

/// Files produced by a command, held in memory until the command succeeds.
struct OutputSet {
  std::vector<std::pair<std::filesystem::path, std::string>> files;
  void add(std::filesystem::path path, std::string bytes) { files.emplace_back(std::move(path), std::move(bytes)); }
  void commit() const {
    for (const auto& [path, bytes] : files) {
      if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
      write_file_atomic(path, bytes);
    }
  }
};

inline ExperimentConfig load_config(const std::filesystem::path& path) { return parse_config(read_file(path)); }

inline void print_warnings(const Diagnostics& diag) {
  for (const auto& w : diag.warnings) std::cerr << "warning: " << w << '\n';
}

inline std::string snapshot_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshot_%06zu.pswf", index);
  return buf;
}

/// Runs the configured model; snapshots plus diagnostics.csv under `dir`.
inline OutputSet run_evolve_command(const ExperimentConfig& cfg, const std::filesystem::path& dir, Diagnostics& diag) {
  OutputSet out;
  const EvolveSpec& ev = cfg.evolve;
  switch (cfg.model) {
    case EvolveModel::modified_kramers:
    case EvolveModel::legacy: {
      const WaveModel model =
          cfg.model == EvolveModel::legacy ? WaveModel::legacy_diffusion : WaveModel::modified_kramers;
      const WaveTrajectory traj = evolve(initial_field(cfg, &diag), cfg.params, cfg.potential, ev, {}, &diag, model);
      for (std::size_t k = 0; k < traj.snapshots.size(); ++k)
        out.add(dir / snapshot_name(k), encode_snapshot(traj.snapshots[k]));
      CsvTable csv{{"t", "norm", "energy", "residual"}, {}};
      for (const auto& d : traj.diagnostics) csv.add_row({d.time, d.norm, d.energy, d.residual});
      out.add(dir / "diagnostics.csv", csv.str());
      break;
    }
    case EvolveModel::kramers_fp:
    case EvolveModel::liouville: {
      const WaveField phi = initial_field(cfg, &diag);
      std::vector<double> rho(phi.values().size());
      for (std::size_t k = 0; k < rho.size(); ++k) rho[k] = std::norm(phi.values()[k]);
      const DensityTrajectory traj = evolve_density(DensityField(cfg.grid, std::move(rho), phi.time()), cfg.params,
                                                    cfg.potential, ev, cfg.model == EvolveModel::kramers_fp, &diag);
      for (std::size_t k = 0; k < traj.snapshots.size(); ++k)
        out.add(dir / snapshot_name(k), encode_snapshot(traj.snapshots[k]));
      CsvTable csv{{"t", "mass"}, {}};
      for (const auto& d : traj.diagnostics) csv.add_row({d.time, d.norm});
      out.add(dir / "diagnostics.csv", csv.str());
      break;
    }
    case EvolveModel::schrodinger: {
      ev.validate();
      SchrodingerStepper stepper(cfg.grid.x_axis(), cfg.params, cfg.potential, ev.dt, cfg.initial.smoothing_sigma);
      ConfigWavefunction psi = initial_wavefunction(cfg, cfg.potential, &diag);
      const std::size_t n = ev.steps();
      std::size_t index = 0;
      out.add(dir / snapshot_name(index++), encode_snapshot(psi));
      CsvTable csv{{"t", "norm"}, {}};
      for (std::size_t s = 1; s <= n; ++s) {
        psi = stepper.step(psi, (s - 1) * ev.dt);
        if (!psi.is_finite()) throw NumericalError("schrodinger step produced non-finite values (step " + std::to_string(s) + ")");
        csv.add_row({psi.time(), psi.norm()});
        if (s % ev.snapshot_stride == 0 || s == n) out.add(dir / snapshot_name(index++), encode_snapshot(psi));
      }
      out.add(dir / "diagnostics.csv", csv.str());
      break;
    }
  }
  return out;
}

inline OutputSet run_experiment_command(const ExperimentConfig& cfg, const std::filesystem::path& report_path,
                                        const std::string& tables_dir) {
  const Report report = run_experiment(cfg);
  OutputSet out;
  out.add(report_path, to_json(report).dump(2) + "\n");
  if (!tables_dir.empty())
    for (const Table& t : report.tables) {
      CsvTable csv{t.columns, t.rows};
      out.add(std::filesystem::path(tables_dir) / (t.name + ".csv"), csv.str());
    }
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& c : report.criteria)
    std::cerr << (c.pass ? "PASS " : "FAIL ") << c.name << " value=" << c.value << " tolerance=" << c.tolerance << '\n';
  return out;
}

inline OutputSet run_transform_command(const std::string& kind, const ExperimentConfig& cfg,
                                       const std::filesystem::path& in, const std::filesystem::path& out_path,
                                       std::optional<double> sigma, std::optional<double> u, Diagnostics& diag) {
  OutputSet out;
  if (kind == "wigner" || kind == "husimi" || kind == "lift") {
    const ConfigWavefunction psi = read_field_as<ConfigWavefunction>(in, &diag);
    if (kind == "wigner") {
      out.add(out_path, encode_snapshot(wigner(psi, cfg.params, cfg.grid, &diag).wigner));
    } else if (kind == "husimi") {
      const double s = sigma ? *sigma : default_husimi_sigma(cfg.params);
      out.add(out_path, encode_snapshot(husimi(psi, cfg.params, s, cfg.grid, &diag)));
    } else {
      out.add(out_path, encode_snapshot(lift_to_phase_space(psi, cfg.params, cfg.grid)));
    }
  } else if (kind == "project") {
    const Projection p = project_stationary(read_field_as<WaveField>(in, &diag), cfg.params);
    std::cerr << "projection residual " << p.residual << '\n';
    out.add(out_path, encode_snapshot(p.psi));
  } else if (kind == "boost") {
    const WaveField phi = read_field_as<WaveField>(in, &diag);
    out.add(out_path, encode_snapshot(galileo_boost(phi, u ? *u : cfg.knobs.boost_u, cfg.params, phi.time(), &diag)));
  } else {
    throw ValidationError("unknown transform '" + kind + "'");
  }
  return out;
}

/// Entry point; returns the process exit code.
inline int cli_main(int argc, const char* const* argv) {
  CLI::App app{"phasewave: phase-space wave equations with dissipation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", PHASEWAVE_VERSION);

  std::string config_path, out_path, in_path, tables_dir, transform_kind;
  double sigma = 0.0, u = 0.0;

  auto* validate = app.add_subcommand("validate", "Parse and check a configuration");
  validate->add_option("config", config_path, "Configuration file")->required();

  auto* evolve_cmd = app.add_subcommand("evolve", "Run the configured evolver");
  evolve_cmd->add_option("config", config_path, "Configuration file")->required();
  evolve_cmd->add_option("-o,--out", out_path, "Output directory for snapshots and diagnostics.csv")->required();

  auto* experiment = app.add_subcommand("experiment", "Run the configured experiment and write a report");
  experiment->add_option("config", config_path, "Configuration file")->required();
  experiment->add_option("-o,--out", out_path, "Report file (JSON)")->required();
  experiment->add_option("--tables", tables_dir, "Directory for the report's tables as CSV");

  auto* transform = app.add_subcommand("transform", "One-shot transform between snapshot files");
  transform->add_option("kind", transform_kind, "wigner | husimi | lift | project | boost")
      ->required()
      ->check(CLI::IsMember({"wigner", "husimi", "lift", "project", "boost"}));
  transform->add_option("-c,--config", config_path, "Configuration with grid and parameters")->required();
  transform->add_option("-i,--in", in_path, "Input snapshot")->required();
  transform->add_option("-o,--out", out_path, "Output snapshot")->required();
  auto* sigma_opt = transform->add_option("--sigma", sigma, "Husimi smoothing deviation in x");
  auto* u_opt = transform->add_option("--u", u, "Boost velocity");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, std::cerr, std::cerr);
    return code == 0 ? 0 : 1;
  }

  Diagnostics diag;
  try {
    const ExperimentConfig cfg = load_config(config_path);
    OutputSet out;
    if (*validate) {
      std::cerr << "config ok, digest " << config_digest(cfg) << '\n';
    } else if (*evolve_cmd) {
      out = run_evolve_command(cfg, out_path, diag);
    } else if (*experiment) {
      out = run_experiment_command(cfg, out_path, tables_dir);
    } else if (*transform) {
      out = run_transform_command(transform_kind, cfg, in_path, out_path,
                                  sigma_opt->count() ? std::optional<double>(sigma) : std::nullopt,
                                  u_opt->count() ? std::optional<double>(u) : std::nullopt, diag);
    }
    print_warnings(diag);
    out.commit();
    return 0;
  } catch (const ValidationError& e) {
    print_warnings(diag);
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    print_warnings(diag);
    std::cerr << "numerical error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    print_warnings(diag);
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace phasewave
