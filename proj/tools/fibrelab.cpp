#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "fibrelab/adiabatic.hpp"
#include "fibrelab/eigensolve.hpp"
#include "fibrelab/error.hpp"
#include "fibrelab/nodal.hpp"
#include "fibrelab/selfcheck.hpp"
#include "fibrelab/study.hpp"

using namespace fibrelab;

namespace {

constexpr int kConfigExit = 1;
constexpr int kSolverExit = 2;
constexpr int kAssertExit = 3;

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::ConfigError:
    case ErrorKind::InvalidArgument:
    case ErrorKind::TubeDegenerate:
    case ErrorKind::GridTooCoarse:
    case ErrorKind::IoError:
      return kConfigExit;
    default:
      return kSolverExit;
  }
}

// Solves the full pencil, shifting just below the predicted bottom unless the
// config names a shift.
EigenPairSet solve_full(const StudyConfig& cfg, double eps_value, int k) {
  const Epsilon eps(eps_value);
  const DiscreteOperator op = assemble_full(cfg.geometry, eps, cfg.grid);
  SolveConfig solver = cfg.solver;
  solver.k = k;
  if (!solver.shift) {
    const EffectiveOperator1D eff = assemble_effective(cfg.geometry, cfg.grid);
    SolveConfig one;
    one.k = 1;
    const double mu0 = smallest_eigenpairs(eff.op, one).values[0];
    solver.shift = eff.lambda0_discrete + eps_value * eps_value * (mu0 - 1.0);
  }
  return smallest_eigenpairs(op, solver);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fibrelab: adiabatic-limit spectral lab"};
  app.require_subcommand(1);

  std::string config_path, out_dir, matrix_path;
  bool assert_checks = false;
  double eps = 0.0;
  int k = 6, mode = 0;

  auto* study = app.add_subcommand("study", "run an eps sweep and write a report");
  study->add_option("--config", config_path)->required();
  study->add_option("--out", out_dir, "output directory (overrides study.out)");
  study->add_flag("--assert", assert_checks, "exit 3 when a configured check fails");

  auto* solve = app.add_subcommand("solve", "print the smallest eigenvalues");
  solve->add_option("--config", config_path)->required();
  solve->add_option("--epsilon", eps)->required();
  solve->add_option("--k", k)->check(CLI::PositiveNumber);
  solve->add_option("--dump-matrix", matrix_path, "write K as coordinate triplets");

  auto* nodal = app.add_subcommand("nodal", "write the nodal set of one eigenfunction as CSV");
  nodal->add_option("--config", config_path)->required();
  nodal->add_option("--epsilon", eps)->required();
  nodal->add_option("--mode", mode)->check(CLI::NonNegativeNumber);
  nodal->add_option("--out", out_dir, "CSV file (stdout when absent)");

  auto* check = app.add_subcommand("check", "run the built-in invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  try {
    if (check->parsed()) return run_self_checks(std::cout) ? 0 : 1;

    const StudyConfig cfg = load_config(config_path);

    if (study->parsed()) {
      const StudyReport report = run_study(cfg);
      const std::string dir = !out_dir.empty() ? out_dir : (!cfg.out.empty() ? cfg.out : "out");
      emit_report(report, dir);
      for (std::size_t i = 0; i < report.records.size(); ++i) {
        const StudyRecord& r = report.records[i];
        if (r.ok)
          std::printf("eps=%-8g eig_gap=%.3e supnorm=%.3e hausdorff=%.3e  %.2fs\n", r.record.epsilon,
                      r.record.eig_gap, r.record.supnorm, r.record.hausdorff, report.seconds[i]);
        else
          std::printf("eps=%-8g failed: %s\n", r.record.epsilon, r.error.c_str());
      }
      for (const CheckResult& c : report.checks)
        std::printf("%-15s %-7s %s\n", c.name.c_str(), c.verdict.c_str(), c.detail.c_str());
      std::printf("report written to %s\n", dir.c_str());
      return assert_checks && !report.passed() ? kAssertExit : 0;
    }

    if (solve->parsed()) {
      if (!matrix_path.empty()) {
        std::ofstream mf(matrix_path);
        if (!mf) throw Error(ErrorKind::IoError, "cannot write " + matrix_path);
        write_triplets(mf, assemble_full(cfg.geometry, Epsilon(eps), cfg.grid).K);
      }
      const EigenPairSet pairs = solve_full(cfg, eps, k);
      for (std::size_t i = 0; i < pairs.values.size(); ++i)
        std::printf("%zu %.17g %.3e\n", i, pairs.values[i], pairs.residuals[i]);
      return 0;
    }

    if (nodal->parsed()) {
      const EigenPairSet pairs = solve_full(cfg, eps, std::max(cfg.solver.k, mode + 1));
      const ScalarField field =
          field_from_vector(cfg.geometry, cfg.grid, pairs.vectors.col(mode));
      const NodalSet set = extract_nodal_set(field);
      if (out_dir.empty()) {
        write_nodal_csv(std::cout, set);
      } else {
        std::ofstream f(out_dir);
        if (!f) throw Error(ErrorKind::IoError, "cannot write " + out_dir);
        write_nodal_csv(f, set);
      }
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", to_string(e.kind()), e.what());
    return exit_code(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kSolverExit;
  }
  return 0;
}
