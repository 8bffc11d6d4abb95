#pragma once

// Experiment reports: named pass/fail criteria with tolerances, ordered
// scalars, time-series tables and the resolved configuration echo. Reports
// serialize to JSON.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "phasewave/experiments/config.hpp"
#include "phasewave/io/config_file.hpp"

#ifndef PHASEWAVE_VERSION
#define PHASEWAVE_VERSION "0.0.0"
#endif

namespace phasewave {

/// One checked claim. `value` is the measured quantity compared against `tolerance`.
struct Criterion {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string note;
  bool control = false;  // control legs gate the other criteria
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Report {
  ExperimentKind kind = ExperimentKind::none;
  std::string digest;
  std::string version = PHASEWAVE_VERSION;
  std::string config_echo;
  std::vector<std::pair<std::string, double>> scalars;
  std::vector<std::pair<std::string, std::string>> labels;
  std::vector<Criterion> criteria;
  std::vector<Table> tables;
  std::vector<std::string> warnings;

  explicit Report(const ExperimentConfig& cfg = {})
      : kind(cfg.kind), digest(config_digest(cfg)), config_echo(serialize_config(cfg)) {}

  void scalar(std::string name, double value) { scalars.emplace_back(std::move(name), value); }
  void label(std::string name, std::string value) { labels.emplace_back(std::move(name), std::move(value)); }

  /// Records `value <= tolerance` (or an explicit verdict via `pass`).
  Criterion& check(std::string name, bool pass, double value, double tolerance, std::string note = {}) {
    criteria.push_back({std::move(name), pass, value, tolerance, std::move(note), false});
    return criteria.back();
  }
  Criterion& check_le(std::string name, double value, double tolerance, std::string note = {}) {
    return check(std::move(name), std::isfinite(value) && value <= tolerance, value, tolerance, std::move(note));
  }
  Criterion& control_le(std::string name, double value, double tolerance, std::string note = {}) {
    Criterion& c = check_le(std::move(name), value, tolerance, std::move(note));
    c.control = true;
    return c;
  }

  Table& table(std::string name, std::vector<std::string> columns) {
    tables.push_back({std::move(name), std::move(columns), {}});
    return tables.back();
  }

  const Criterion* criterion(const std::string& name) const {
    for (const auto& c : criteria)
      if (c.name == name) return &c;
    return nullptr;
  }
  double scalar_value(const std::string& name) const {
    for (const auto& [n, v] : scalars)
      if (n == name) return v;
    return std::nan("");
  }
  bool controls_passed() const {
    for (const auto& c : criteria)
      if (c.control && !c.pass) return false;
    return true;
  }
  bool passed() const {
    for (const auto& c : criteria)
      if (!c.pass) return false;
    return true;
  }

  /// A failed control leg withholds every non-control verdict.
  void gate_on_controls() {
    if (controls_passed()) return;
    for (auto& c : criteria)
      if (!c.control && c.pass) {
        c.pass = false;
        c.note += c.note.empty() ? "withheld: a control leg failed" : "; withheld: a control leg failed";
      }
  }
};

inline nlohmann::ordered_json to_json(const Report& r) {
  using nlohmann::ordered_json;
  auto number = [](double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); };
  ordered_json j;
  j["kind"] = to_string(r.kind);
  j["digest"] = r.digest;
  j["version"] = r.version;
  j["passed"] = r.passed();
  ordered_json scalars = ordered_json::object();
  for (const auto& [n, v] : r.scalars) scalars[n] = number(v);
  j["scalars"] = scalars;
  ordered_json labels = ordered_json::object();
  for (const auto& [n, v] : r.labels) labels[n] = v;
  j["labels"] = labels;
  ordered_json crit = ordered_json::array();
  for (const auto& c : r.criteria)
    crit.push_back({{"name", c.name},
                    {"pass", c.pass},
                    {"value", number(c.value)},
                    {"tolerance", number(c.tolerance)},
                    {"control", c.control},
                    {"note", c.note}});
  j["criteria"] = crit;
  ordered_json tables = ordered_json::array();
  for (const auto& t : r.tables) {
    ordered_json rows = ordered_json::array();
    for (const auto& row : t.rows) {
      ordered_json jr = ordered_json::array();
      for (double v : row) jr.push_back(number(v));
      rows.push_back(jr);
    }
    tables.push_back({{"name", t.name}, {"columns", t.columns}, {"rows", rows}});
  }
  j["tables"] = tables;
  j["warnings"] = r.warnings;
  j["config"] = r.config_echo;
  return j;
}

// ---------------------------------------------------------------------------
// Exponential decay fit

struct ExpFit {
  double rate = std::nan("");       // r in y ~ C exp(-r t)
  double intercept = std::nan("");  // log C
  double r_squared = std::nan("");
  std::size_t points = 0;
  bool conclusive() const { return points >= 3 && std::isfinite(rate) && r_squared >= 0.9; }
};

/// Least-squares line through (t, log y) over the leading samples with
/// y >= floor * y[0]. Non-positive samples end the window.
inline ExpFit fit_exponential_decay(const std::vector<double>& t, const std::vector<double>& y,
                                    double floor_fraction) {
  if (t.size() != y.size()) throw ValidationError("fit: time and value series differ in length");
  ExpFit fit;
  if (y.empty() || !(y[0] > 0)) return fit;
  const double stop = floor_fraction * y[0];
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (; n < y.size() && y[n] > 0 && y[n] >= stop && std::isfinite(y[n]); ++n) {
    const double ly = std::log(y[n]);
    sx += t[n];
    sy += ly;
    sxx += t[n] * t[n];
    sxy += t[n] * ly;
  }
  fit.points = n;
  if (n < 3) return fit;
  const double denom = n * sxx - sx * sx;
  if (!(denom > 0)) return fit;
  const double slope = (n * sxy - sx * sy) / denom;
  fit.rate = -slope;
  fit.intercept = (sy - slope * sx) / n;
  const double mean = sy / n;
  double ss_tot = 0, ss_res = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double ly = std::log(y[k]);
    const double model = fit.intercept + slope * t[k];
    ss_tot += (ly - mean) * (ly - mean);
    ss_res += (ly - model) * (ly - model);
  }
  fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace phasewave
