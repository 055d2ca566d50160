#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fibrelab/adiabatic.hpp"
#include "fibrelab/eigensolve.hpp"
#include "fibrelab/geometry.hpp"
#include "fibrelab/operators.hpp"

namespace fibrelab {

struct StudyConfig {
  std::string name = "study";
  BundleGeometry geometry;
  std::vector<double> epsilons;
  GridSpec grid;
  int refine = 2;
  SolveConfig solver;
  int mode_index = 0;
  std::vector<std::string> checks;
  std::map<std::string, double> thresholds;
  std::string out;
  /// Verbatim config text, echoed into the report.
  std::string source;
};

/// Parses and validates a JSON study config. Throws Error(ConfigError).
StudyConfig parse_config(const std::string& json_text);
StudyConfig load_config(const std::filesystem::path& path);

/// The fine grid used for the discretisation-error estimate. Dirichlet fibres
/// keep nested nodes: (n_f + 1) r - 1 interior points.
GridSpec refined_grid(const BundleGeometry& geom, const GridSpec& grid, int refine);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double constant = 0.0;
  double r_squared = 0.0;
  std::vector<double> used;
  std::vector<double> excluded;
};

/// Least squares on (log eps, log e). Points whose error is not at least ten
/// times its floor (or not positive) are excluded. Throws InsufficientPoints
/// with fewer than three usable points.
RateFit fit_rate(const std::vector<double>& eps, const std::vector<double>& err,
                 const std::vector<double>& floor = {});

struct StudyRecord {
  DiscrepancyRecord record;
  NodalReport nodal;
  std::vector<int> courant_coarse;
  bool ok = false;
  std::string error;
};

struct CheckResult {
  std::string name;
  std::string verdict;  // "pass", "fail" or "skipped"
  double threshold = 0.0;
  double theory = 0.0;
  std::string detail;
  std::optional<RateFit> fit;
};

struct StudyReport {
  StudyConfig config;
  std::vector<StudyRecord> records;
  std::map<std::string, std::optional<RateFit>> fits;
  std::vector<CheckResult> checks;
  std::vector<double> seconds;

  bool passed() const;
};

/// One eps at one grid: effective model, prediction, full solve, measurement.
Measurement evaluate_case(const BundleGeometry& geom, Epsilon eps, const GridSpec& grid,
                          int mode, const SolveConfig& solver, EigenPairSet* full_out = nullptr);

StudyReport run_study(const StudyConfig& cfg);

/// Re-evaluates fits and checks from the records (also the test hook for
/// synthetic records).
void evaluate_checks(StudyReport& report);

/// report.json, records.csv and one SVG per measured quantity. Timings are
/// left out so that identical configs give identical bytes.
void emit_report(const StudyReport& report, const std::filesystem::path& dir);

std::string report_json(const StudyReport& report);
std::string records_csv(const StudyReport& report);

}  // namespace fibrelab
