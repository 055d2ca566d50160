#include "fibrelab/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <ostream>
#include <string>

#include "fibrelab/adiabatic.hpp"
#include "fibrelab/eigensolve.hpp"
#include "fibrelab/error.hpp"
#include "fibrelab/operators.hpp"
#include "fibrelab/study.hpp"

namespace fibrelab {

namespace {

constexpr double pi = std::numbers::pi;

double asymmetry(const SparseMatrix& k) {
  const SparseMatrix d = SparseMatrix(k.transpose()) - k;
  double m = 0.0;
  for (int c = 0; c < d.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(d, c); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

WarpedTorusGeometry warped(std::vector<double> cos_amps, std::vector<double> sin_mod = {}) {
  WarpedTorusGeometry g;
  g.warp.profile.constant = 1.0;
  g.warp.profile.cosine_amps = std::move(cos_amps);
  g.modulation.sine_amps = std::move(sin_mod);
  return g;
}

WaveguideGeometry guide(std::vector<double> cos_amps) {
  WaveguideGeometry g;
  g.curvature.constant = 1.0;
  g.curvature.cosine_amps = std::move(cos_amps);
  return g;
}

using Check = std::pair<std::string, std::function<std::string(bool&)>>;

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

}  // namespace

bool run_self_checks(std::ostream& out) {
  std::vector<Check> checks;

  checks.emplace_back("assembly symmetry", [](bool& ok) {
    double worst = 0.0;
    const GridSpec spec{32, 32, 4, 0.5};
    worst = std::max(worst, asymmetry(assemble_full(warped({0.3}, {0.5}), Epsilon(0.2), spec).K));
    worst = std::max(worst, asymmetry(assemble_full(guide({0.5}), Epsilon(0.2), {32, 33, 4, 0.5}).K));
    worst = std::max(worst, asymmetry(assemble_full(guide({0.5}), Epsilon(0.2), {32, 33, 2, 0.0}).K));
    ok = worst == 0.0;
    return fmt("max|K-K^T| = %.3g", worst);
  });

  checks.emplace_back("closed kernel", [](bool& ok) {
    const DiscreteOperator op = assemble_full(warped({0.3}, {0.5}), Epsilon(0.1), {32, 32, 4, 0.0});
    const Eigen::VectorXd r = op.K * Eigen::VectorXd::Ones(op.dim());
    const double scale = op.K.coeffs().cwiseAbs().maxCoeff();
    ok = r.cwiseAbs().maxCoeff() <= 1e-12 * scale;
    return fmt("max|K 1| / max|K| = %.3g", r.cwiseAbs().maxCoeff() / scale);
  });

  checks.emplace_back("flat tensor spectrum", [](bool& ok) {
    const GridSpec spec{32, 32, 4, 0.0};
    const double eps = 0.5;
    const DiscreteOperator op = assemble_full(warped({}), Epsilon(eps), spec);
    SolveConfig cfg;
    cfg.k = 8;
    cfg.tol = 1e-11;
    const EigenPairSet pairs = smallest_eigenpairs(op, cfg);
    const Grid g = make_grid(warped({}), spec);
    std::vector<double> sums;
    for (int m = -4; m <= 4; ++m)
      for (int n = -4; n <= 4; ++n)
        sums.push_back(eps * eps * stencil_symbol(4, m, g.h_s) + stencil_symbol(4, n, g.h_f));
    std::sort(sums.begin(), sums.end());
    double worst = 0.0;
    for (int i = 0; i < cfg.k; ++i) worst = std::max(worst, std::abs(pairs.values[i] - sums[i]));
    ok = worst <= 1e-10;
    return fmt("max deviation %.3g over 8 eigenvalues", worst);
  });

  checks.emplace_back("solver residuals and orthonormality", [](bool& ok) {
    const DiscreteOperator op = assemble_full(guide({0.5}), Epsilon(0.1), {64, 33, 4, 0.5});
    SolveConfig cfg;
    cfg.k = 6;
    cfg.tol = 1e-9;
    cfg.shift = pi * pi / 4 - 0.1;
    const EigenPairSet pairs = smallest_eigenpairs(op, cfg);
    const VerifyReport v = verify_pairs(op, pairs);
    ok = v.max_residual <= cfg.tol && v.orthonormality_error <= 1e-8;
    return fmt("residual %.3g, W-orthonormality %.3g", v.max_residual, v.orthonormality_error);
  });

  checks.emplace_back("fibre oracle", [](bool& ok) {
    const double v = lambda_eps_oracle(guide({}), Epsilon(0.1), 0.0);
    ok = std::abs(v - 2.464901) <= 1e-5;
    return fmt("Lambda_eps(kappa=1, eps=0.1) = %.9f", v);
  });

  checks.emplace_back("rate fit", [](bool& ok) {
    const RateFit a = fit_rate({0.2, 0.1, 0.05}, {0.04, 0.01, 0.0025});
    const RateFit b = fit_rate({0.2, 0.1, 0.05}, {0.2, 0.1, 0.05});
    ok = std::abs(a.slope - 2.0) < 1e-12 && std::abs(a.r_squared - 1.0) < 1e-12 &&
         std::abs(b.slope - 1.0) < 1e-12;
    return fmt("slopes %.15g and %.15g", a.slope, b.slope);
  });

  checks.emplace_back("report determinism", [](bool& ok) {
    StudyConfig cfg;
    cfg.name = "selfcheck";
    cfg.geometry = warped({});
    cfg.epsilons = {0.4, 0.2, 0.1};
    cfg.grid = {16, 16, 4, 0.5};
    cfg.solver.tol = 1e-10;
    cfg.checks = {"eig_rate", "courant"};
    const std::string a = report_json(run_study(cfg));
    const std::string b = report_json(run_study(cfg));
    ok = a == b;
    return std::string(ok ? "identical" : "differs");
  });

  bool all = true;
  for (auto& [name, fn] : checks) {
    bool ok = false;
    std::string detail;
    try {
      detail = fn(ok);
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    all = all && ok;
    out << (ok ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
  }
  return all;
}

}  // namespace fibrelab
