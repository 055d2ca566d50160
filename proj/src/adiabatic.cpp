#include "fibrelab/adiabatic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fibrelab/error.hpp"

namespace fibrelab {

double theta(int d, double eps) {
  switch (d) {
    case 1: return 1.0;
    case 2: return std::sqrt(std::log(1.0 / eps));
    case 3: return 1.0 / std::sqrt(eps);
    default: throw Error(ErrorKind::InvalidArgument, "base dimension must be 1, 2 or 3");
  }
}

double fiber_ground_energy(const BundleGeometry& geom) {
  return fiber_dirichlet(geom) ? 0.25 * std::numbers::pi * std::numbers::pi : 0.0;
}

double fiber_ground_state(const BundleGeometry& geom, double s, double v) {
  if (fiber_dirichlet(geom)) return std::cos(0.5 * std::numbers::pi * v);
  return 1.0 / std::sqrt(fiber_volume(geom, s));
}

double lambda_eps_oracle(const WaveguideGeometry& geom, Epsilon eps, double s, int n_f) {
  const BundleGeometry any = geom;
  SolveConfig cfg;
  cfg.k = 1;
  cfg.tol = 1e-8;
  auto shifted = [&](int n) {
    const DiscreteOperator op = assemble_fiber(geom, eps, s, n, 4);
    const double flat = stencil_symbol(4, 0.5 * std::numbers::pi, 2.0 / (n + 1));
    return smallest_eigenpairs(op, cfg).values[0] - flat;
  };
  // Differences against the matched flat value carry only the eps-dependent
  // discretisation error, which is what the extrapolation removes.
  const double coarse = shifted(n_f);
  const double fine = shifted(2 * n_f + 1);
  return fiber_ground_energy(any) + fine + (fine - coarse) / 15.0;
}

Eigen::VectorXd reference_weights(const BundleGeometry& geom, const GridSpec& grid) {
  const Grid g = make_grid(geom, grid);
  Eigen::VectorXd w(g.size());
  for (int i = 0; i < g.n_s; ++i) {
    for (int j = 0; j < g.n_f; ++j) {
      w[g.index(i, j)] = reference_density(geom, g.s(i), g.f(j)) * g.h_s * g.h_f;
    }
  }
  return w;
}

Prediction build_prediction(const BundleGeometry& geom, Epsilon eps,
                            const EffectiveOperator1D& model, int j, const GridSpec& grid) {
  if (model.op.grid.n_s != grid.n_s || model.op.grid.s_offset != grid.s_offset) {
    throw Error(ErrorKind::InvalidArgument, "effective model and full grid differ in s");
  }
  SolveConfig cfg;
  cfg.k = std::min(j + 2, model.op.dim());
  cfg.tol = 1e-9;
  const EigenPairSet eff = smallest_eigenpairs(model.op, cfg);

  Prediction p;
  p.mode = j;
  p.grid = grid;
  p.mu = eff.values[j];
  p.mu_lowest = eff.values[0];
  p.mu_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(eff.values.size()); ++i) {
    if (i != j) p.mu_gap = std::min(p.mu_gap, std::abs(eff.values[i] - p.mu));
  }
  if (p.mu_gap <= 1e-8) {
    throw Error(ErrorKind::DegenerateEffectiveEigenvalue, "mu_j is not simple");
  }
  p.lambda0 = model.lambda0;
  p.lambda0_discrete = model.lambda0_discrete;
  p.predicted_full = p.lambda0_discrete + eps.value() * eps.value() * p.mu;

  const Grid g = make_grid(geom, grid);
  Eigen::VectorXd psi = eff.vectors.col(j) / std::sqrt(model.h * eff.vectors.col(j).squaredNorm());
  p.product.resize(g.size());
  for (int i = 0; i < g.n_s; ++i) {
    for (int q = 0; q < g.n_f; ++q) {
      p.product[g.index(i, q)] = psi[i] * fiber_ground_state(geom, g.s(i), g.f(q));
    }
  }
  const Eigen::VectorXd w = reference_weights(geom, grid);
  const double nrm = std::sqrt(p.product.dot(w.cwiseProduct(p.product)));
  p.product /= nrm;
  Eigen::Index at = 0;
  p.product.cwiseAbs().maxCoeff(&at);
  p.anchor = static_cast<int>(at);
  if (p.product[at] < 0.0) {
    p.product = -p.product;
    psi = -psi;
  }
  p.psi.assign(psi.data(), psi.data() + psi.size());
  p.zeros = zeros_of_base(p.psi, g.s_start, g.h_s, g.s_period);
  return p;
}

Measurement measure(const EigenPairSet& full, const Prediction& pred, const BundleGeometry& geom,
                    Epsilon eps, const MeasureOptions& options) {
  const int j = pred.mode;
  if (j >= static_cast<int>(full.values.size())) {
    throw Error(ErrorKind::InvalidArgument, "full solve has too few eigenpairs");
  }
  const double e2 = eps.value() * eps.value();
  int close = 0;
  for (double lam : full.values) {
    close += std::abs((lam - pred.lambda0_discrete) / e2 - pred.mu) < 1e-8;
  }
  if (close > 1) throw Error(ErrorKind::PairingAmbiguous, "two full eigenvalues match mu_j");

  const Grid g = make_grid(geom, pred.grid);
  Measurement m;
  DiscrepancyRecord& r = m.record;
  r.epsilon = eps.value();
  r.mode = j;
  r.lambda_full = full.values[j];
  r.rescaled = (r.lambda_full - pred.lambda0_discrete) / e2;
  r.mu_eff = pred.mu;
  r.mu_gap = pred.mu_gap;
  r.eig_gap = std::abs(r.rescaled - r.mu_eff);

  const Eigen::VectorXd w = reference_weights(geom, pred.grid);
  m.phi = full.vectors.col(j);
  m.phi /= std::sqrt(m.phi.dot(w.cwiseProduct(m.phi)));
  double anchor = m.phi[pred.anchor];
  if (anchor == 0.0) anchor = m.phi.dot(w.cwiseProduct(pred.product));
  if (anchor < 0.0) m.phi = -m.phi;
  r.supnorm = (m.phi - pred.product).cwiseAbs().maxCoeff();

  NodalReport& nr = m.nodal;
  const ScalarField field = field_from_vector(geom, pred.grid, m.phi);
  m.nodal_set = extract_nodal_set(field);
  nr.domains = count_nodal_domains(field);
  nr.components = m.nodal_set.component_count;
  nr.zeros = static_cast<int>(pred.zeros.size());

  std::vector<double> zs;
  for (const BaseZero& z : pred.zeros) zs.push_back(z.s);
  const double sampling = options.sampling > 0.0 ? options.sampling : 0.25 * g.h_s;
  if (zs.empty() && m.nodal_set.segments.empty()) {
    nr.hausdorff = 0.0;
  } else {
    nr.hausdorff = hausdorff_distance(m.nodal_set.segments, fiber_set(geom, zs, sampling), geom,
                                      sampling);
  }
  r.hausdorff = nr.hausdorff;

  // Tube radius 2 |phi - psi phi_0|_inf / (min |psi'| min phi_0), never below
  // half a base cell so that the discrete nodal segments fit.
  double min_slope = std::numeric_limits<double>::infinity();
  for (const BaseZero& z : pred.zeros) min_slope = std::min(min_slope, std::abs(z.slope));
  double min_phi0 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < g.n_s; ++i) {
    for (int q = 0; q < g.n_f; ++q) {
      min_phi0 = std::min(min_phi0, fiber_ground_state(geom, g.s(i), g.f(q)));
    }
  }
  nr.tube_radius = zs.empty() ? 0.0 : std::max(2.0 * r.supnorm / (min_slope * min_phi0), 0.5 * g.h_s);
  nr.graph = graph_over_fiber_check(m.nodal_set, zs, nr.tube_radius);
  nr.tube_constant = nr.graph.max_offset / eps.value();
  nr.boundary_components = boundary_trace_components(m.nodal_set);

  const int count = std::min<int>(options.courant_modes, static_cast<int>(full.values.size()));
  for (int i = 0; i < count; ++i) {
    const int domains = count_nodal_domains(field_from_vector(geom, pred.grid, full.vectors.col(i)));
    nr.courant_counts.push_back(domains);
    nr.courant_ok = nr.courant_ok && domains <= i + 1;
  }
  return m;
}

}  // namespace fibrelab
