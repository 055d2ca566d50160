#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <sstream>

#include "fibrelab/error.hpp"
#include "fibrelab/study.hpp"

namespace fibrelab {

namespace {

struct Quantity {
  const char* name;
  const char* check;
  double theory;
  double DiscrepancyRecord::*value;
  double DiscrepancyRecord::*floor;
};

constexpr Quantity kQuantities[] = {
    {"eig_gap", "eig_rate", 2.0, &DiscrepancyRecord::eig_gap, &DiscrepancyRecord::disc_err_eig},
    {"supnorm", "supnorm_rate", 1.0, &DiscrepancyRecord::supnorm,
     &DiscrepancyRecord::disc_err_supnorm},
    {"hausdorff", "hausdorff_rate", 1.0, &DiscrepancyRecord::hausdorff,
     &DiscrepancyRecord::disc_err_hausdorff},
};

bool usable(double e, double floor) { return std::isfinite(e) && e > 0.0 && e >= 10.0 * floor; }

std::string eps_list(const std::vector<double>& eps) {
  std::ostringstream out;
  for (std::size_t i = 0; i < eps.size(); ++i) out << (i ? ", " : "") << eps[i];
  return out.str();
}

CheckResult rate_check(const StudyReport& report, const Quantity& q) {
  CheckResult c;
  c.name = q.check;
  c.theory = q.theory;
  const auto it = report.config.thresholds.find(q.check);
  if (it != report.config.thresholds.end()) {
    c.threshold = it->second;
  } else {
    const bool guide = std::holds_alternative<WaveguideGeometry>(report.config.geometry);
    c.threshold = std::string(q.check) == "eig_rate" ? (guide ? 0.8 : 1.7) : 0.9;
  }
  int failed = 0;
  std::string first_error;
  for (const StudyRecord& r : report.records) {
    if (!r.ok) {
      if (failed++ == 0) first_error = r.error;
    }
  }
  if (failed > 0) {
    c.verdict = "fail";
    c.detail = std::to_string(failed) + " epsilon case(s) failed: " + first_error;
    return c;
  }
  const auto& fit = report.fits.at(q.name);
  std::vector<double> excluded;
  int good = 0;
  for (const StudyRecord& r : report.records) {
    if (usable(r.record.*q.value, r.record.*q.floor)) {
      ++good;
    } else {
      excluded.push_back(r.record.epsilon);
    }
  }
  if (good == 0) {
    c.verdict = "skipped";
    c.detail = "every point is below ten times its discretisation floor";
    return c;
  }
  if (!fit) {
    c.verdict = "fail";
    c.detail = "only " + std::to_string(good) + " usable point(s); excluded eps: " + eps_list(excluded);
    return c;
  }
  c.fit = fit;
  std::ostringstream d;
  d << "slope " << fit->slope << " over " << fit->used.size() << " point(s)";
  if (!fit->excluded.empty()) d << "; excluded eps: " << eps_list(fit->excluded);
  c.detail = d.str();
  c.verdict = fit->slope >= c.threshold ? "pass" : "fail";
  return c;
}

}  // namespace

GridSpec refined_grid(const BundleGeometry& geom, const GridSpec& grid, int refine) {
  GridSpec fine = grid;
  fine.n_s = grid.n_s * refine;
  fine.n_f = fiber_dirichlet(geom) ? (grid.n_f + 1) * refine - 1 : grid.n_f * refine;
  // Keep the physical node offset when the spacing shrinks.
  fine.s_offset = grid.s_offset * refine;
  return fine;
}

RateFit fit_rate(const std::vector<double>& eps, const std::vector<double>& err,
                 const std::vector<double>& floor) {
  if (eps.size() != err.size() || (!floor.empty() && floor.size() != eps.size())) {
    throw Error(ErrorKind::InvalidArgument, "fit_rate: mismatched lengths");
  }
  RateFit fit;
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (usable(err[i], floor.empty() ? 0.0 : floor[i])) {
      x.push_back(std::log(eps[i]));
      y.push_back(std::log(err[i]));
      fit.used.push_back(eps[i]);
    } else {
      fit.excluded.push_back(eps[i]);
    }
  }
  if (x.size() < 3) {
    throw Error(ErrorKind::InsufficientPoints, "need at least three usable points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::InsufficientPoints, "epsilons must differ");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.constant = std::exp(fit.intercept);
  fit.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return fit;
}

Measurement evaluate_case(const BundleGeometry& geom, Epsilon eps, const GridSpec& grid, int mode,
                          const SolveConfig& solver, EigenPairSet* full_out) {
  const EffectiveOperator1D eff = assemble_effective(geom, grid);
  const Prediction pred = build_prediction(geom, eps, eff, mode, grid);
  const DiscreteOperator op = assemble_full(geom, eps, grid);

  SolveConfig cfg = solver;
  cfg.k = std::min(op.dim(), std::max({solver.k, mode + 2, 6}));
  const double e2 = eps.value() * eps.value();
  const bool own_shift = !solver.shift.has_value();
  if (own_shift) cfg.shift = pred.lambda0_discrete + e2 * (pred.mu_lowest - 1.0);
  EigenPairSet full;
  for (int attempt = 0;; ++attempt) {
    try {
      full = smallest_eigenpairs(op, cfg);
      break;
    } catch (const Error& e) {
      // A predicted shift can land above the true bottom; step down and retry.
      if (e.kind() != ErrorKind::FactorizationFailed || !own_shift || attempt >= 6) throw;
      *cfg.shift -= e2 * std::pow(4.0, attempt);
    }
  }
  Measurement m = measure(full, pred, geom, eps);
  if (full_out) *full_out = std::move(full);
  return m;
}

StudyReport run_study(const StudyConfig& cfg) {
  StudyReport report;
  report.config = cfg;
  const GridSpec fine_grid = refined_grid(cfg.geometry, cfg.grid, cfg.refine);
  const double factor = std::pow(static_cast<double>(cfg.refine), cfg.grid.stencil_order) - 1.0;

  auto one = [&](double e) {
    const auto t0 = std::chrono::steady_clock::now();
    StudyRecord rec;
    try {
      const Epsilon eps(e);
      const Measurement coarse = evaluate_case(cfg.geometry, eps, cfg.grid, cfg.mode_index, cfg.solver);
      const Measurement fine = evaluate_case(cfg.geometry, eps, fine_grid, cfg.mode_index, cfg.solver);
      rec.record = fine.record;
      rec.nodal = fine.nodal;
      rec.courant_coarse = coarse.nodal.courant_counts;
      const DiscrepancyRecord& c = coarse.record;
      DiscrepancyRecord& f = rec.record;
      // Richardson estimate of the error left in the fine-grid values.
      f.disc_err_eig = std::abs((f.rescaled - f.mu_eff) - (c.rescaled - c.mu_eff)) / factor;
      f.disc_err_supnorm = std::abs(f.supnorm - c.supnorm) / factor;
      f.disc_err_hausdorff = std::abs(f.hausdorff - c.hausdorff) / factor;
      // A residual tol moves lambda by about tol, i.e. tol / eps^2 after
      // rescaling, and the eigenvector by tol over the spectral gap.
      const double e2 = e * e;
      const double vec_floor = cfg.solver.tol / (e2 * f.mu_gap);
      f.disc_err_eig = std::max(f.disc_err_eig, cfg.solver.tol / e2);
      f.disc_err_supnorm = std::max(f.disc_err_supnorm, vec_floor);
      f.disc_err_hausdorff = std::max(f.disc_err_hausdorff, vec_floor);
      rec.ok = true;
    } catch (const Error& err) {
      rec.record.epsilon = e;
      rec.record.mode = cfg.mode_index;
      rec.error = err.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return std::make_pair(rec, secs);
  };

  std::vector<std::future<std::pair<StudyRecord, double>>> jobs;
  for (double e : cfg.epsilons) jobs.push_back(std::async(std::launch::async, one, e));
  for (auto& job : jobs) {
    auto [rec, secs] = job.get();
    report.records.push_back(std::move(rec));
    report.seconds.push_back(secs);
  }
  evaluate_checks(report);
  return report;
}

void evaluate_checks(StudyReport& report) {
  report.fits.clear();
  for (const Quantity& q : kQuantities) {
    std::vector<double> eps, err, floor;
    for (const StudyRecord& r : report.records) {
      if (!r.ok) continue;
      eps.push_back(r.record.epsilon);
      err.push_back(r.record.*q.value);
      floor.push_back(r.record.*q.floor);
    }
    try {
      report.fits[q.name] = fit_rate(eps, err, floor);
    } catch (const Error&) {
      report.fits[q.name] = std::nullopt;
    }
  }

  report.checks.clear();
  const auto& recs = report.records;
  const bool all_ok = std::all_of(recs.begin(), recs.end(), [](const StudyRecord& r) { return r.ok; });
  for (const std::string& name : report.config.checks) {
    const Quantity* rate = nullptr;
    for (const Quantity& q : kQuantities) {
      if (name == q.check) rate = &q;
    }
    if (rate) {
      report.checks.push_back(rate_check(report, *rate));
      continue;
    }
    CheckResult c;
    c.name = name;
    std::ostringstream d;
    if (!all_ok || recs.empty()) {
      c.verdict = "fail";
      for (const StudyRecord& r : recs) {
        if (!r.ok) {
          d << "eps " << r.record.epsilon << " failed: " << r.error;
          break;
        }
      }
      c.detail = d.str();
      report.checks.push_back(c);
      continue;
    }
    if (name == "isotopy") {
      const StudyRecord& r = *std::min_element(recs.begin(), recs.end(), [](const auto& a, const auto& b) {
        return a.record.epsilon < b.record.epsilon;
      });
      const GraphCheck& g = r.nodal.graph;
      const bool ok = r.nodal.zeros > 0 && g.passed && r.nodal.components == r.nodal.zeros;
      d << "eps " << r.record.epsilon << ": zeros " << r.nodal.zeros << ", components "
        << r.nodal.components << ", inside tubes " << g.inside_tubes << ", single crossing "
        << g.single_crossing << ", tube radius " << r.nodal.tube_radius;
      c.verdict = ok ? "pass" : "fail";
    } else if (name == "boundary") {
      bool ok = true;
      for (const StudyRecord& r : recs) {
        ok = ok && r.nodal.zeros > 0 && r.nodal.boundary_components >= 2 * r.nodal.zeros;
        d << "eps " << r.record.epsilon << ": " << r.nodal.boundary_components << " >= 2*"
          << r.nodal.zeros << "; ";
      }
      c.verdict = ok ? "pass" : "fail";
    } else if (name == "courant") {
      bool ok = true;
      for (const StudyRecord& r : recs) {
        ok = ok && r.nodal.courant_ok;
        for (std::size_t i = 0; i < r.courant_coarse.size(); ++i) {
          ok = ok && r.courant_coarse[i] <= static_cast<int>(i) + 1;
        }
      }
      d << "first " << (recs.front().nodal.courant_counts.size()) << " eigenvectors, both grids";
      c.verdict = ok ? "pass" : "fail";
    }
    c.detail = d.str();
    report.checks.push_back(c);
  }
}

bool StudyReport::passed() const {
  return std::none_of(checks.begin(), checks.end(),
                      [](const CheckResult& c) { return c.verdict == "fail"; });
}

}  // namespace fibrelab
