#pragma once

// Plain-text run configuration: INI-style sections with `key = value` lines,
// `#` comments, and comma-separated lists. The schema is strict: unknown
// sections or keys, duplicates, missing required keys and out-of-range values
// are reported with their line numbers.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "phasewave/experiments/config.hpp"

namespace phasewave {

struct ConfigIssue {
  int line = 0;  // 0 when the problem has no single source line
  std::string key;
  std::string reason;
};

class ConfigError : public ValidationError {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues)
      : ValidationError(format(issues)), issues_(std::move(issues)) {}
  const std::vector<ConfigIssue>& issues() const { return issues_; }

 private:
  static std::string format(const std::vector<ConfigIssue>& issues) {
    std::string out;
    for (const auto& i : issues) {
      if (!out.empty()) out += '\n';
      out += (i.line > 0 ? "line " + std::to_string(i.line) + ": " : std::string()) + i.key + ": " +
             i.reason;
    }
    return out;
  }
  std::vector<ConfigIssue> issues_;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string format_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_double(v[i]);
  return out;
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ValidationError("expected a number, got '" + s + "'");
  if (!std::isfinite(v)) throw ValidationError("value must be finite");
  return v;
}

inline long long parse_int(const std::string& s) {
  long long v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ValidationError("expected an integer, got '" + s + "'");
  return v;
}

inline bool parse_bool(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw ValidationError("expected true or false, got '" + s + "'");
}

inline std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item)));
  if (out.empty()) throw ValidationError("list must not be empty");
  return out;
}

inline PotentialShape make_shape(const std::string& kind) {
  if (kind == "zero") return shape::Zero{};
  if (kind == "harmonic") return shape::Harmonic{};
  if (kind == "quartic") return shape::Quartic{};
  if (kind == "double_well") return shape::DoubleWell{};
  if (kind == "tabulated") return shape::Tabulated{};
  throw ValidationError("unknown potential kind '" + kind + "'");
}

inline std::string shape_name(const PotentialShape& s) {
  static const char* names[] = {"zero", "harmonic", "quartic", "double_well", "tabulated"};
  return names[s.index()];
}

}  // namespace detail

/// Parses and validates a configuration. Throws ConfigError listing every problem.
inline ExperimentConfig parse_config(std::string_view text) {
  struct Entry {
    std::string value;
    int line;
  };
  std::vector<ConfigIssue> issues;
  std::map<std::string, Entry> entries;  // "section.key"
  std::string section;
  static const std::set<std::string> sections{"grid", "params", "potential", "initial", "evolve", "experiment"};

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string line = detail::trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        issues.push_back({line_no, line, "malformed section header"});
        continue;
      }
      section = detail::trim(std::string_view(line).substr(1, line.size() - 2));
      if (!sections.count(section)) issues.push_back({line_no, section, "unknown section"});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      issues.push_back({line_no, line, "expected 'key = value'"});
      continue;
    }
    const std::string key = detail::trim(std::string_view(line).substr(0, eq));
    const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    if (section.empty()) {
      issues.push_back({line_no, key, "key outside of a section"});
      continue;
    }
    const std::string full = section + "." + key;
    if (entries.count(full)) {
      issues.push_back({line_no, full, "duplicate key (first set on line " +
                                            std::to_string(entries[full].line) + ")"});
      continue;
    }
    entries[full] = {value, line_no};
  }

  ExperimentConfig cfg;
  std::set<std::string> used;
  auto line_of = [&](const std::string& k) { return entries.count(k) ? entries[k].line : 0; };

  // Reads `key` through `apply` when present; records failures with location.
  auto field = [&](const std::string& key, auto&& apply) {
    auto it = entries.find(key);
    if (it == entries.end()) return false;
    used.insert(key);
    try {
      apply(it->second.value);
    } catch (const ValidationError& e) {
      issues.push_back({it->second.line, key, e.what()});
    }
    return true;
  };
  auto require = [&](const std::string& key, auto&& apply) {
    if (!field(key, apply)) issues.push_back({0, key, "missing required key"});
  };
  auto num = [](double& out, auto check) {
    return [&out, check](const std::string& v) {
      out = detail::parse_double(v);
      check(out);
    };
  };
  auto any = [](double) {};
  auto nonneg = [](const char* name) {
    return [name](double v) {
      if (v < 0) throw ValidationError(std::string(name) + " must be >= 0");
    };
  };
  auto positive = [](const char* name) {
    return [name](double v) {
      if (!(v > 0)) throw ValidationError(std::string(name) + " must be > 0");
    };
  };

  // [grid]
  int nx = 0, np = 0;
  double x_min = 0, x_max = 0, p_min = 0, p_max = 0;
  auto grid_count = [](int& out, const char* name) {
    return [&out, name](const std::string& v) {
      const long long n = detail::parse_int(v);
      if (n < PhaseGrid::kMinSamples) throw ValidationError(std::string(name) + " must be >= 8");
      if (n > (1 << 16)) throw ValidationError(std::string(name) + " must be <= 65536");
      out = static_cast<int>(n);
    };
  };
  require("grid.nx", grid_count(nx, "nx"));
  require("grid.np", grid_count(np, "np"));
  require("grid.x_min", num(x_min, any));
  require("grid.x_max", num(x_max, any));
  require("grid.p_min", num(p_min, any));
  require("grid.p_max", num(p_max, any));
  const std::size_t before_grid = issues.size();
  if (entries.count("grid.x_min") && entries.count("grid.x_max") && !(x_max > x_min))
    issues.push_back({line_of("grid.x_max"), "grid.x_max", "x_max must be > x_min"});
  if (entries.count("grid.p_min") && entries.count("grid.p_max") && !(p_max > p_min))
    issues.push_back({line_of("grid.p_max"), "grid.p_max", "p_max must be > p_min"});
  bool grid_ok = issues.empty() || issues.size() == before_grid;
  for (const auto& i : issues)
    if (i.key.rfind("grid.", 0) == 0) grid_ok = false;
  if (grid_ok) cfg.grid = PhaseGrid(nx, np, x_min, x_max, p_min, p_max);

  // [params]
  PhysicalParams& pr = cfg.params;
  field("params.hbar", num(pr.hbar, positive("hbar")));
  field("params.mass", num(pr.mass, positive("mass")));
  field("params.kT", num(pr.kT, nonneg("kT")));
  field("params.gamma", num(pr.gamma, nonneg("gamma")));
  field("params.rest_energy", num(pr.rest_energy, nonneg("rest_energy")));
  field("params.a", num(pr.a, nonneg("a")));
  field("params.b", num(pr.b, nonneg("b")));
  field("params.include_rest_phase", [&](const std::string& v) { pr.include_rest_phase = detail::parse_bool(v); });

  // [potential]
  auto shape_fields = [&](const std::string& prefix, PotentialShape& s) {
    std::visit(
        [&](auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, shape::Harmonic>) {
            field("potential." + prefix + "_k", num(v.k, any));
          } else if constexpr (std::is_same_v<T, shape::Quartic>) {
            field("potential." + prefix + "_c4", num(v.c4, any));
          } else if constexpr (std::is_same_v<T, shape::DoubleWell>) {
            field("potential." + prefix + "_h", num(v.h, any));
            field("potential." + prefix + "_d", num(v.d, [](double d) {
                    if (d == 0) throw ValidationError("double_well d must be nonzero");
                  }));
          } else if constexpr (std::is_same_v<T, shape::Tabulated>) {
            require("potential." + prefix + "_samples",
                    [&](const std::string& text) { v.samples = detail::parse_list(text); });
          }
        },
        s);
  };
  field("potential.base", [&](const std::string& v) { cfg.potential.base = detail::make_shape(v); });
  shape_fields("base", cfg.potential.base);
  field("potential.drive", [&](const std::string& v) {
    if (v != "none") cfg.potential.drive = detail::make_shape(v);
  });
  if (cfg.potential.drive) shape_fields("drive", *cfg.potential.drive);
  field("potential.omega", num(cfg.potential.omega, nonneg("omega")));
  if (grid_ok) {
    try {
      validate_potential(cfg.potential, cfg.grid.x_axis());
    } catch (const ValidationError& e) {
      issues.push_back({line_of("potential.base_samples"), "potential", e.what()});
    }
  }

  // [initial]
  InitialSpec& in = cfg.initial;
  field("initial.kind", [&](const std::string& v) {
    if (v == "gaussian") in.kind = InitialKind::gaussian;
    else if (v == "eigenstate") in.kind = InitialKind::eigenstate;
    else if (v == "superposition") in.kind = InitialKind::superposition;
    else if (v == "file") in.kind = InitialKind::file;
    else throw ValidationError("unknown initial kind '" + v + "'");
  });
  field("initial.x0", num(in.x0, any));
  field("initial.p0", num(in.p0, any));
  field("initial.sigma", num(in.sigma, positive("sigma")));
  field("initial.sigma_p", num(in.sigma_p, positive("sigma_p")));
  field("initial.level", [&](const std::string& v) {
    const long long n = detail::parse_int(v);
    if (n < 0) throw ValidationError("level must be >= 0");
    in.level = static_cast<int>(n);
  });
  field("initial.levels", [&](const std::string& v) {
    in.levels.clear();
    for (double d : detail::parse_list(v)) {
      if (d < 0 || d != std::floor(d)) throw ValidationError("levels must be nonnegative integers");
      in.levels.push_back(static_cast<int>(d));
    }
  });
  field("initial.path", [&](const std::string& v) { in.path = v; });
  field("initial.lift", [&](const std::string& v) { in.lift = detail::parse_bool(v); });
  field("initial.smoothing_sigma", num(in.smoothing_sigma, nonneg("smoothing_sigma")));
  if (in.kind == InitialKind::file && in.path.empty())
    issues.push_back({line_of("initial.kind"), "initial.path", "file initial state needs a path"});

  // [evolve]
  EvolveSpec& ev = cfg.evolve;
  require("evolve.dt", num(ev.dt, positive("dt")));
  require("evolve.t_final", num(ev.t_final, nonneg("t_final")));
  field("evolve.scheme", [&](const std::string& v) {
    if (v == "strang") ev.scheme = Scheme::strang;
    else if (v == "lie") ev.scheme = Scheme::lie;
    else throw ValidationError("scheme must be strang or lie");
  });
  field("evolve.snapshot_stride", [&](const std::string& v) {
    const long long n = detail::parse_int(v);
    if (n < 1) throw ValidationError("snapshot_stride must be >= 1");
    ev.snapshot_stride = static_cast<int>(n);
  });
  field("evolve.renormalize", [&](const std::string& v) { ev.renormalize = detail::parse_bool(v); });
  field("evolve.track_residual", [&](const std::string& v) { ev.track_residual = detail::parse_bool(v); });
  field("evolve.model", [&](const std::string& v) {
    if (v == "modified_kramers") cfg.model = EvolveModel::modified_kramers;
    else if (v == "legacy") cfg.model = EvolveModel::legacy;
    else if (v == "kramers_fp") cfg.model = EvolveModel::kramers_fp;
    else if (v == "liouville") cfg.model = EvolveModel::liouville;
    else if (v == "schrodinger") cfg.model = EvolveModel::schrodinger;
    else throw ValidationError("unknown model '" + v + "'");
  });
  if (entries.count("evolve.dt") && entries.count("evolve.t_final")) {
    try {
      ev.validate();
    } catch (const ValidationError& e) {
      issues.push_back({line_of("evolve.t_final"), "evolve.t_final", e.what()});
    }
  }

  // [experiment]
  ExperimentKnobs& kn = cfg.knobs;
  field("experiment.kind", [&](const std::string& v) {
    static const std::map<std::string, ExperimentKind> kinds{
        {"none", ExperimentKind::none},
        {"relaxation", ExperimentKind::relaxation},
        {"schrodinger_agreement", ExperimentKind::schrodinger_agreement},
        {"invariance", ExperimentKind::invariance},
        {"classical_limit", ExperimentKind::classical_limit},
        {"decoherence", ExperimentKind::decoherence},
        {"oscillating_potential", ExperimentKind::oscillating_potential}};
    auto it = kinds.find(v);
    if (it == kinds.end()) throw ValidationError("unknown experiment kind '" + v + "'");
    cfg.kind = it->second;
  });
  auto list = [](std::vector<double>& out, auto check) {
    return [&out, check](const std::string& v) {
      out = detail::parse_list(v);
      for (double x : out) check(x);
    };
  };
  field("experiment.gamma_sweep", list(kn.gamma_sweep, positive("gamma_sweep entries")));
  field("experiment.ab_sweep", list(kn.ab_sweep, positive("ab_sweep entries")));
  field("experiment.omega_sweep", list(kn.omega_sweep, nonneg("omega_sweep entries")));
  field("experiment.sigma_fit", list(kn.sigma_fit, nonneg("sigma_fit entries")));
  field("experiment.perturbation", num(kn.perturbation, positive("perturbation")));
  field("experiment.fit_floor", num(kn.fit_floor, [](double v) {
          if (!(v > 0 && v < 1)) throw ValidationError("fit_floor must be in (0, 1)");
        }));
  field("experiment.boost_u", num(kn.boost_u, any));
  field("experiment.refine", [&](const std::string& v) {
    const long long n = detail::parse_int(v);
    if (n < 1 || n > 8) throw ValidationError("refine must be in [1, 8]");
    kn.refine = static_cast<int>(n);
  });
  field("experiment.gauge_alpha", num(kn.gauge_alpha, any));
  field("experiment.seed", [&](const std::string& v) {
    const long long n = detail::parse_int(v);
    if (n < 0) throw ValidationError("seed must be >= 0");
    kn.seed = static_cast<std::uint64_t>(n);
  });
  field("experiment.companion_quartic", num(kn.companion_quartic, nonneg("companion_quartic")));

  for (const auto& [key, e] : entries)
    if (!used.count(key) && sections.count(key.substr(0, key.find('.'))))
      issues.push_back({e.line, key, "unknown key"});

  if (cfg.model == EvolveModel::legacy && (!(pr.a > 0) || !(pr.b > 0)))
    issues.push_back({line_of("evolve.model"), "params.a", "legacy model needs a > 0 and b > 0"});

  if (!issues.empty()) {
    std::stable_sort(issues.begin(), issues.end(),
                     [](const ConfigIssue& a, const ConfigIssue& b) { return a.line < b.line; });
    throw ConfigError(std::move(issues));
  }
  return cfg;
}

/// Canonical text form with every key, defaults included.
inline std::string serialize_config(const ExperimentConfig& cfg) {
  using detail::format_double;
  std::ostringstream o;
  const PhaseGrid& g = cfg.grid;
  o << "[grid]\n"
    << "nx = " << g.nx() << "\nnp = " << g.np() << "\nx_min = " << format_double(g.x_axis().min())
    << "\nx_max = " << format_double(g.x_axis().max()) << "\np_min = " << format_double(g.p_axis().min())
    << "\np_max = " << format_double(g.p_axis().max()) << "\n\n";
  const PhysicalParams& p = cfg.params;
  o << "[params]\n"
    << "hbar = " << format_double(p.hbar) << "\nmass = " << format_double(p.mass)
    << "\nkT = " << format_double(p.kT) << "\ngamma = " << format_double(p.gamma)
    << "\nrest_energy = " << format_double(p.rest_energy) << "\na = " << format_double(p.a)
    << "\nb = " << format_double(p.b) << "\ninclude_rest_phase = " << (p.include_rest_phase ? "true" : "false")
    << "\n\n";
  auto shape_lines = [&](const std::string& prefix, const PotentialShape& s) {
    o << prefix << " = " << detail::shape_name(s) << '\n';
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, shape::Harmonic>) o << prefix << "_k = " << format_double(v.k) << '\n';
          else if constexpr (std::is_same_v<T, shape::Quartic>) o << prefix << "_c4 = " << format_double(v.c4) << '\n';
          else if constexpr (std::is_same_v<T, shape::DoubleWell>)
            o << prefix << "_h = " << format_double(v.h) << '\n' << prefix << "_d = " << format_double(v.d) << '\n';
          else if constexpr (std::is_same_v<T, shape::Tabulated>)
            o << prefix << "_samples = " << detail::format_list(v.samples) << '\n';
        },
        s);
  };
  o << "[potential]\n";
  shape_lines("base", cfg.potential.base);
  if (cfg.potential.drive) shape_lines("drive", *cfg.potential.drive);
  else o << "drive = none\n";
  o << "omega = " << format_double(cfg.potential.omega) << "\n\n";
  const InitialSpec& in = cfg.initial;
  std::vector<double> levels(in.levels.begin(), in.levels.end());
  o << "[initial]\n"
    << "kind = " << to_string(in.kind) << "\nx0 = " << format_double(in.x0) << "\np0 = " << format_double(in.p0)
    << "\nsigma = " << format_double(in.sigma) << "\nsigma_p = " << format_double(in.sigma_p)
    << "\nlevel = " << in.level << "\nlevels = " << detail::format_list(levels) << '\n';
  if (!in.path.empty()) o << "path = " << in.path << '\n';
  o << "lift = " << (in.lift ? "true" : "false") << "\nsmoothing_sigma = " << format_double(in.smoothing_sigma)
    << "\n\n";
  const EvolveSpec& ev = cfg.evolve;
  o << "[evolve]\n"
    << "model = " << to_string(cfg.model) << "\ndt = " << format_double(ev.dt)
    << "\nt_final = " << format_double(ev.t_final) << "\nscheme = " << to_string(ev.scheme)
    << "\nsnapshot_stride = " << ev.snapshot_stride << "\nrenormalize = " << (ev.renormalize ? "true" : "false")
    << "\ntrack_residual = " << (ev.track_residual ? "true" : "false") << "\n\n";
  const ExperimentKnobs& k = cfg.knobs;
  o << "[experiment]\n"
    << "kind = " << to_string(cfg.kind) << "\ngamma_sweep = " << detail::format_list(k.gamma_sweep)
    << "\nab_sweep = " << detail::format_list(k.ab_sweep) << "\nomega_sweep = " << detail::format_list(k.omega_sweep)
    << "\nsigma_fit = " << detail::format_list(k.sigma_fit) << "\nperturbation = " << format_double(k.perturbation)
    << "\nfit_floor = " << format_double(k.fit_floor) << "\nboost_u = " << format_double(k.boost_u)
    << "\nrefine = " << k.refine << "\ngauge_alpha = " << format_double(k.gauge_alpha) << "\nseed = " << k.seed
    << "\ncompanion_quartic = " << format_double(k.companion_quartic) << '\n';
  return o.str();
}

/// 64-bit FNV-1a of a byte string, as 16 hex digits.
inline std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string config_digest(const ExperimentConfig& cfg) { return fnv1a_hex(serialize_config(cfg)); }

}  // namespace phasewave
