// One PASS/FAIL line per acceptance criterion, plus SUPP lines for the
// supplementary testbeds. Exit status is 1 when any primary line fails.
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <future>
#include <numbers>
#include <sstream>
#include <string>

#include "fibrelab/adiabatic.hpp"
#include "fibrelab/eigensolve.hpp"
#include "fibrelab/error.hpp"
#include "fibrelab/nodal.hpp"
#include "fibrelab/study.hpp"

using namespace fibrelab;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;

// Pinned tolerances.
constexpr double kFlatSpectrumTol = 1e-10;
constexpr double kFlatEffectiveTol = 1e-9;
constexpr double kTorusEigSlope = 1.7;
constexpr double kGuideEigSlope = 0.8;
constexpr double kSupnormSlope = 0.9;
constexpr double kHausdorffSlope = 0.9;
constexpr double kOracleSlope = 1.8;
constexpr double kOrthonormalityTol = 1e-8;
constexpr double kKernelTol = 1e-6;

int primary_failures = 0;

void line(const char* tag, bool ok, const std::string& name, const std::string& detail) {
  std::printf("%s [%s] %s: %s\n", ok ? "PASS" : "FAIL", tag, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok && std::string(tag) == "PRIMARY") ++primary_failures;
}

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

StudyConfig config(const std::string& name) {
  return load_config(fs::path(FIBRELAB_SOURCE_DIR) / "configs" / (name + ".json"));
}

struct Run {
  std::string name;
  StudyReport report;
};

Run study(const std::string& name) {
  StudyConfig cfg = config(name);
  Run r{name, run_study(cfg)};
  emit_report(r.report, fs::path("acceptance_out") / name);
  return r;
}

// Verdict for one quantity of one study against a pinned slope.
struct RateVerdict {
  bool ok = false;
  bool exact = false;
  std::string text;
};

RateVerdict rate(const Run& run, const char* quantity, double threshold) {
  RateVerdict v;
  std::ostringstream t;
  t << run.name << " ";
  for (const StudyRecord& r : run.report.records) {
    if (!r.ok) {
      t << "eps " << r.record.epsilon << " failed (" << r.error << ")";
      v.text = t.str();
      return v;
    }
  }
  const auto& fit = run.report.fits.at(quantity);
  if (!fit) {
    double worst = 0.0;
    for (const StudyRecord& r : run.report.records) {
      const double e = std::string(quantity) == "eig_gap" ? r.record.eig_gap
                       : std::string(quantity) == "supnorm" ? r.record.supnorm
                                                            : r.record.hausdorff;
      worst = std::max(worst, e);
    }
    v.exact = true;
    t << "no usable points, max " << quantity << " " << worst << " is at the discretisation floor";
    v.text = t.str();
    return v;
  }
  v.ok = fit->slope >= threshold;
  t << "slope " << fit->slope << " (need >= " << threshold << ", " << fit->used.size() << " pts)";
  v.text = t.str();
  return v;
}

// Domain counts of the first six eigenvectors; also checks symmetry,
// residuals and W-orthonormality on the way.
struct Audit {
  bool courant = true;
  double asym = 0.0;
  double residual = 0.0;
  double tol = 0.0;
  double ortho = 0.0;
};

Audit audit_operator(const StudyConfig& cfg, double eps, const GridSpec& grid) {
  const DiscreteOperator op = assemble_full(cfg.geometry, Epsilon(eps), grid);
  Audit a;
  const SparseMatrix d = SparseMatrix(op.K.transpose()) - op.K;
  for (int c = 0; c < d.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(d, c); it; ++it) a.asym = std::max(a.asym, std::abs(it.value()));
  SolveConfig solver = cfg.solver;
  solver.k = 6;
  const EffectiveOperator1D eff = assemble_effective(cfg.geometry, grid);
  SolveConfig one;
  one.k = 1;
  const double mu0 = smallest_eigenpairs(eff.op, one).values[0];
  solver.shift = eff.lambda0_discrete + eps * eps * (mu0 - 1.0);
  const EigenPairSet p = smallest_eigenpairs(op, solver);
  const VerifyReport v = verify_pairs(op, p);
  a.residual = v.max_residual;
  a.tol = solver.tol;
  a.ortho = v.orthonormality_error;
  for (int i = 0; i < 6; ++i) {
    const int domains = count_nodal_domains(field_from_vector(cfg.geometry, grid, p.vectors.col(i)));
    a.courant = a.courant && domains <= i + 1;
  }
  return a;
}

// Orthonormal real Fourier basis on n periodic points; column m has wave
// index wave[m].
Eigen::MatrixXd fourier_basis(int n, std::vector<int>& wave) {
  Eigen::MatrixXd q(n, n);
  wave.assign(n, 0);
  int col = 0;
  for (int i = 0; i < n; ++i) q(i, col) = 1.0 / std::sqrt(n);
  ++col;
  for (int m = 1; 2 * m < n; ++m) {
    for (int i = 0; i < n; ++i) {
      q(i, col) = std::sqrt(2.0 / n) * std::cos(2 * pi * m * i / n);
      q(i, col + 1) = std::sqrt(2.0 / n) * std::sin(2 * pi * m * i / n);
    }
    wave[col] = wave[col + 1] = m;
    col += 2;
  }
  if (n % 2 == 0) {
    for (int i = 0; i < n; ++i) q(i, col) = (i % 2 ? -1.0 : 1.0) / std::sqrt(n);
    wave[col] = n / 2;
  }
  return q;
}

struct FlatResult {
  double certified = 0.0;
  double dense = 0.0;
  double effective = 0.0;
};

// Periodic 1D stiffness D D^T for the staggered difference, times scale.
Eigen::MatrixXd circulant(int n, int order, double scale) {
  const std::vector<double> c = order == 2 ? std::vector<double>{2.0, -1.0}
                                           : std::vector<double>{365.0 / 144, -87.0 / 64, 3.0 / 32, -1.0 / 576};
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < static_cast<int>(c.size()); ++k) {
      m(i, (i + k) % n) = scale * c[k];
      m(i, (i - k + n) % n) = scale * c[k];
    }
  }
  return m;
}

// Weyl bound for a 1D circulant against its Fourier symbols:
// (||CQ - Q Theta||_2 + 2 delta ||Theta||) / (1 - delta), delta = ||Q^T Q - I||_2.
double circulant_bound(const Eigen::MatrixXd& c, int order, double scale, double h) {
  std::vector<int> wave;
  const Eigen::MatrixXd q = fourier_basis(static_cast<int>(c.rows()), wave);
  const int n = static_cast<int>(q.cols());
  Eigen::VectorXd theta(n);
  for (int m = 0; m < n; ++m) theta[m] = scale * stencil_symbol(order, wave[m], h);
  const Eigen::MatrixXd r = c * q - q * theta.asDiagonal();
  const double r_norm = Eigen::JacobiSVD<Eigen::MatrixXd>(r).singularValues()[0];
  const double delta = Eigen::JacobiSVD<Eigen::MatrixXd>(q.transpose() * q - Eigen::MatrixXd::Identity(n, n))
                           .singularValues()[0];
  return (r_norm + 2 * delta * theta.cwiseAbs().maxCoeff()) / (1 - delta);
}

// The flat operator is a Kronecker sum B = C_s (x) I + I (x) C_f of two
// circulants up to assembly rounding. Weyl: |lambda(A) - lambda(B)| <= ||A - B||_2
// <= sqrt(||A - B||_1 ||A - B||_inf), and the eigenvalues of B are the sums of
// the circulant eigenvalues, each certified against its symbol.
FlatResult flat_case(int order, double eps) {
  WarpedTorusGeometry flat;
  flat.warp.profile.constant = 1.0;
  const GridSpec spec{64, 64, order, 0.0};
  const Grid g = make_grid(flat, spec);
  const DiscreteOperator op = assemble_full(flat, Epsilon(eps), spec);
  const Eigen::VectorXd s = op.W.cwiseSqrt().cwiseInverse();
  const SparseMatrix a = s.asDiagonal() * op.K * s.asDiagonal();

  const double ss = eps * eps / (g.h_s * g.h_s), sf = 1.0 / (g.h_f * g.h_f);
  const Eigen::MatrixXd cs = circulant(g.n_s, order, ss), cf = circulant(g.n_f, order, sf);
  Eigen::MatrixXd diff(a);
  for (int i = 0; i < g.n_s; ++i) {
    for (int j = 0; j < g.n_f; ++j) {
      for (int i2 = 0; i2 < g.n_s; ++i2) diff(g.index(i, j), g.index(i2, j)) -= cs(i, i2);
      for (int j2 = 0; j2 < g.n_f; ++j2) diff(g.index(i, j), g.index(i, j2)) -= cf(j, j2);
    }
  }
  const double n1 = diff.cwiseAbs().colwise().sum().maxCoeff();
  const double ninf = diff.cwiseAbs().rowwise().sum().maxCoeff();
  diff.resize(0, 0);
  FlatResult out;
  out.certified = std::sqrt(n1 * ninf) + circulant_bound(cs, order, eps * eps, g.h_s) +
                  circulant_bound(cf, order, 1.0, g.h_f);

  std::vector<double> theta;
  for (int m = 0; m < g.n_s; ++m) {
    for (int n = 0; n < g.n_f; ++n) {
      const int km = std::min(m, g.n_s - m), kn = std::min(n, g.n_f - n);
      theta.push_back(eps * eps * stencil_symbol(order, km, g.h_s) + stencil_symbol(order, kn, g.h_f));
    }
  }

  // plain dense solve as a cross-check; its own backward error is about
  // n u ||A||
  std::sort(theta.begin(), theta.end());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(a), Eigen::EigenvaluesOnly);
  for (int i = 0; i < op.dim(); ++i) out.dense = std::max(out.dense, std::abs(es.eigenvalues()[i] - theta[i]));

  SolveConfig cfg;
  cfg.k = 3;
  cfg.tol = 1e-11;
  const EigenPairSet full = smallest_eigenpairs(op, cfg);
  const EigenPairSet mu = smallest_eigenpairs(assemble_effective(flat, spec).op, cfg);
  const double l0 = discrete_fiber_ground(flat, spec);
  for (int k = 0; k < 3; ++k)
    out.effective = std::max(out.effective, std::abs((full.values[k] - l0) / (eps * eps) - mu.values[k]));
  return out;
}

void flat_exactness() {
  FlatResult worst;
  for (int order : {2, 4}) {
    for (double eps : {0.5, 0.25}) {
      const FlatResult r = flat_case(order, eps);
      worst.certified = std::max(worst.certified, r.certified);
      worst.dense = std::max(worst.dense, r.dense);
      worst.effective = std::max(worst.effective, r.effective);
    }
  }
  line("PRIMARY", worst.certified <= kFlatSpectrumTol && worst.effective <= kFlatEffectiveTol, "flat exactness",
       fmt("full spectrum vs tensor sum within %.2e (Kronecker-sum Weyl bound, tol 1e-10; "
           "dense solver cross-check %.2e), rescaled vs effective %.2e (tol 1e-9)",
           worst.certified, worst.dense, worst.effective) +
           "; 64x64, eps 0.5 and 0.25, stencil orders 2 and 4");
}

void oracle_rate() {
  WaveguideGeometry g;
  g.curvature.constant = 1.0;
  g.curvature.cosine_amps = {0.5};
  const std::vector<double> eps{0.2, 0.1, 0.05, 0.025};
  bool ok = true;
  std::ostringstream d;
  for (double s : {0.0, pi / 2, pi}) {
    std::vector<double> err;
    for (double e : eps) {
      const double k = g.curvature.eval(s);
      err.push_back(std::abs((lambda_eps_oracle(g, Epsilon(e), s) - pi * pi / 4) / (e * e) + k * k / 4));
    }
    const RateFit f = fit_rate(eps, err);
    ok = ok && f.slope >= kOracleSlope;
    d << "s=" << s << " slope " << f.slope << "; ";
  }
  d << "need >= " << kOracleSlope;
  line("PRIMARY", ok, "effective-potential oracle", d.str());
}

}  // namespace

int main() {
  fs::create_directories("acceptance_out");

  flat_exactness();

  const char* names[] = {"torus_exp_j0",       "torus_exp_j1",         "waveguide_j0", "waveguide_j1",
                         "torus_modulated_j1", "waveguide_two_mode_j1"};
  std::map<std::string, Run> runs;
  for (const char* n : names) runs[n] = study(n);

  {
    const RateVerdict a = rate(runs["torus_exp_j0"], "eig_gap", kTorusEigSlope);
    const RateVerdict b = rate(runs["torus_exp_j1"], "eig_gap", kTorusEigSlope);
    line("PRIMARY", (a.ok || a.exact) && b.ok, "eigenvalue rate, closed case",
         "j=0: " + a.text + "; j=1: " + b.text +
             "; exp(0.3 cos s) has mu_1 = mu_2 (its partner warp is a translate), so no simple j=1 branch exists");
  }
  {
    const RateVerdict a = rate(runs["waveguide_j0"], "eig_gap", kGuideEigSlope);
    line("PRIMARY", a.ok, "eigenvalue rate, waveguide", a.text);
  }
  {
    const RateVerdict t0 = rate(runs["torus_exp_j0"], "supnorm", kSupnormSlope);
    const RateVerdict t1 = rate(runs["torus_exp_j1"], "supnorm", kSupnormSlope);
    const RateVerdict w0 = rate(runs["waveguide_j0"], "supnorm", kSupnormSlope);
    line("PRIMARY", (t0.ok || t0.exact) && t1.ok && w0.ok, "uniform convergence",
         "torus j=0: " + t0.text + "; torus j=1: " + t1.text + "; waveguide j=0: " + w0.text);
  }
  {
    const RateVerdict t = rate(runs["torus_exp_j1"], "hausdorff", kHausdorffSlope);
    const RateVerdict w = rate(runs["waveguide_j1"], "hausdorff", kHausdorffSlope);
    line("PRIMARY", t.ok && w.ok, "Hausdorff convergence",
         "torus: " + t.text + "; waveguide: " + w.text +
             "; every excited effective level of both testbeds is doubly degenerate, so no simple "
             "sign-changing mode exists");
  }
  for (const auto& [check, name] : {std::pair{"isotopy", "torus_exp_j1"}, std::pair{"boundary", "waveguide_j1"}}) {
    const StudyReport& rep = runs[name].report;
    const auto it = std::find_if(rep.checks.begin(), rep.checks.end(), [&](const CheckResult& c) { return c.name == check; });
    const bool ok = it != rep.checks.end() && it->verdict == "pass";
    line("PRIMARY", ok, std::string(check == std::string("isotopy") ? "isotopy structure" : "boundary contact"),
         std::string(name) + ": " + (it == rep.checks.end() ? "missing" : it->verdict + " (" + it->detail + ")"));
  }

  // Courant audit over every assembled full operator. Study records carry the
  // counts of both grids; operators whose study record failed before the
  // full solve are audited directly.
  Audit worst;
  int audited = 0;
  {
    bool courant = true;
    std::vector<std::future<Audit>> jobs;
    for (const auto& [name, run] : runs) {
      const StudyConfig& cfg = run.report.config;
      for (const StudyRecord& r : run.report.records) {
        if (r.ok) {
          ++audited;
          courant = courant && r.nodal.courant_ok;
          for (std::size_t i = 0; i < r.courant_coarse.size(); ++i)
            courant = courant && r.courant_coarse[i] <= static_cast<int>(i) + 1;
          continue;
        }
        for (const GridSpec& g : {cfg.grid, refined_grid(cfg.geometry, cfg.grid, cfg.refine)})
          jobs.push_back(std::async(std::launch::async, audit_operator, cfg, r.record.epsilon, g));
      }
    }
    for (auto& j : jobs) {
      const Audit a = j.get();
      courant = courant && a.courant;
      worst.asym = std::max(worst.asym, a.asym);
      worst.ortho = std::max(worst.ortho, a.ortho);
      worst.residual = std::max(worst.residual, a.residual / a.tol);
      ++audited;
    }
    line("PRIMARY", courant, "Courant audit",
         fmt("first 6 eigenfunctions, %.0f epsilon cases on both grids", audited));
  }

  oracle_rate();

  {
    // symmetry and kernel on every study operator, solver contract on the audit solves
    double asym = worst.asym, kernel = 0.0, ortho = worst.ortho, residual = worst.residual;
    for (const auto& [name, run] : runs) {
      const StudyConfig& cfg = run.report.config;
      for (double e : cfg.epsilons) {
        for (const GridSpec& g : {cfg.grid, refined_grid(cfg.geometry, cfg.grid, cfg.refine)}) {
          const DiscreteOperator op = assemble_full(cfg.geometry, Epsilon(e), g);
          const SparseMatrix d = SparseMatrix(op.K.transpose()) - op.K;
          for (int c = 0; c < d.outerSize(); ++c)
            for (SparseMatrix::InnerIterator it(d, c); it; ++it) asym = std::max(asym, std::abs(it.value()));
        }
      }
    }
    const StudyConfig tc = config("torus_exp_j0");
    const DiscreteOperator closed = assemble_full(tc.geometry, Epsilon(0.05), tc.grid);
    SolveConfig sc = tc.solver;
    sc.k = 6;
    const EigenPairSet kp = smallest_eigenpairs(closed, sc);
    const VerifyReport kv = verify_pairs(closed, kp);
    const Eigen::VectorXd x0 = kp.vectors.col(0);
    kernel = (x0.array() - x0.mean()).abs().maxCoeff() / std::abs(x0.mean());
    ortho = std::max(ortho, kv.orthonormality_error);
    residual = std::max(residual, kv.max_residual / sc.tol);
    const bool lambda0 = std::abs(kp.values[0]) <= sc.tol;

    const std::string first = report_json(runs["waveguide_j0"].report);
    const std::string again = report_json(run_study(config("waveguide_j0")));
    const bool same = first == again;
    const bool ok = asym == 0.0 && residual <= 1.0 && ortho <= kOrthonormalityTol && kernel <= kKernelTol &&
                    lambda0 && same;
    line("PRIMARY", ok, "solver and assembly invariants",
         fmt("max|K-K^T| %.1e, max residual/tol %.2f, W-orthonormality %.1e", asym, residual, ortho) +
             fmt(", kernel deviation %.1e, lambda_0 %.1e", kernel, kp.values[0]) +
             (same ? ", report.json byte-identical on rerun" : ", report.json differs on rerun"));
  }

  // Supplementary testbeds: non-degenerate stand-ins for the defective ones.
  {
    const Run& t = runs["torus_modulated_j1"];
    const Run& w = runs["waveguide_two_mode_j1"];
    const RateVerdict te = rate(t, "eig_gap", kTorusEigSlope), ts = rate(t, "supnorm", kSupnormSlope),
                      th = rate(t, "hausdorff", kHausdorffSlope);
    const RateVerdict ws = rate(w, "supnorm", kSupnormSlope), wh = rate(w, "hausdorff", kHausdorffSlope);
    line("SUPP", te.ok, "eigenvalue rate, modulated torus j=1", te.text);
    line("SUPP", ts.ok, "uniform convergence, modulated torus j=1", ts.text);
    line("SUPP", th.ok, "Hausdorff convergence, modulated torus j=1", th.text);
    line("SUPP", ws.ok, "uniform convergence, two-mode waveguide j=1", ws.text);
    line("SUPP", wh.ok, "Hausdorff convergence, two-mode waveguide j=1", wh.text);
    for (const auto& [run, check] : {std::pair{&t, "isotopy"}, std::pair{&w, "boundary"}, std::pair{&t, "courant"},
                                     std::pair{&w, "courant"}}) {
      const auto& checks = run->report.checks;
      const auto it = std::find_if(checks.begin(), checks.end(), [&](const CheckResult& c) { return c.name == check; });
      line("SUPP", it != checks.end() && it->verdict == "pass", std::string(check) + ", " + run->name,
           it == checks.end() ? "missing" : it->detail);
    }
  }

  std::printf("%d primary criteria failed\n", primary_failures);
  return primary_failures == 0 ? 0 : 1;
}
