#include "fibrelab/operators.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include "fibrelab/error.hpp"

namespace fibrelab {

namespace {

struct Tap {
  int node;
  double w;
};
using Stencil = std::vector<Tap>;

// Node-to-midpoint difference operators. Midpoint m sits between nodes m and m+1.
std::vector<Stencil> periodic_stencils(int n, double h, int order) {
  std::vector<Stencil> out(n);
  auto wrap = [n](int k) { return ((k % n) + n) % n; };
  for (int m = 0; m < n; ++m) {
    if (order == 2) {
      out[m] = {{m, -1.0 / h}, {wrap(m + 1), 1.0 / h}};
    } else {
      const double c = 1.0 / (24.0 * h);
      out[m] = {{wrap(m - 1), c}, {m, -27.0 * c}, {wrap(m + 1), 27.0 * c}, {wrap(m + 2), -c}};
    }
  }
  return out;
}

// One-sided estimates of the wall derivative from the cubic through the wall
// zero and the three nearest interior values.
Stencil left_wall_slope(int n, double h) {
  (void)n;
  return {{0, 3.0 / h}, {1, -1.5 / h}, {2, 1.0 / (3.0 * h)}};
}

Stencil right_wall_slope(int n, double h) {
  return {{n - 1, -3.0 / h}, {n - 2, 1.5 / h}, {n - 3, -1.0 / (3.0 * h)}};
}

// Dirichlet version over the n interior unknowns; wall-inclusive node k maps to
// unknown k-1 and the walls are nodes 0 and n+1. The fourth-order stencil
// reaches one node past each wall. That ghost uses the odd extension corrected
// by the wall relation c f'' + c' f' = 0, i.e.
//   f(wall - x) = -f(wall + x) - beta f'(wall) x^2,   beta = c'/c (inward sign).
std::vector<Stencil> dirichlet_stencils(int n, double h, int order, double beta_left,
                                        double beta_right) {
  const Stencil gl = left_wall_slope(n, h);
  const Stencil gr = right_wall_slope(n, h);
  std::vector<Stencil> out(n + 1);
  for (int m = 0; m <= n; ++m) {
    std::map<int, double> acc;
    auto put = [&](int k, double w) {
      if (k >= 1 && k <= n) {
        acc[k - 1] += w;
      } else if (k == -1) {
        acc[0] -= w;
        for (const Tap& t : gl) acc[t.node] -= w * beta_left * h * h * t.w;
      } else if (k == n + 2) {
        acc[n - 1] -= w;
        for (const Tap& t : gr) acc[t.node] -= w * beta_right * h * h * t.w;
      }
    };
    if (order == 2) {
      put(m, -1.0 / h);
      put(m + 1, 1.0 / h);
    } else {
      const double c = 1.0 / (24.0 * h);
      put(m - 1, c);
      put(m, -27.0 * c);
      put(m + 1, 27.0 * c);
      put(m + 2, -c);
    }
    for (const auto& [node, w] : acc) out[m].push_back({node, w});
  }
  return out;
}

// Collects the upper triangle only; the lower one is a verbatim mirror, so
// K == K^T holds bit for bit.
class SymmetricAssembler {
 public:
  explicit SymmetricAssembler(int n) : n_(n) {}

  template <class Map>
  void add_outer(const Stencil& st, double coef, Map&& to_global) {
    for (const Tap& a : st) {
      const int ga = to_global(a.node);
      for (const Tap& b : st) {
        const int gb = to_global(b.node);
        if (ga <= gb) triplets_.emplace_back(ga, gb, coef * (a.w * b.w));
      }
    }
  }

  void add_diagonal(int i, double v) { triplets_.emplace_back(i, i, v); }

  SparseMatrix finish() {
    SparseMatrix upper(n_, n_);
    upper.setFromTriplets(triplets_.begin(), triplets_.end());
    SparseMatrix full = upper.selfadjointView<Eigen::Upper>();
    full.makeCompressed();
    return full;
  }

 private:
  int n_;
  std::vector<Eigen::Triplet<double>> triplets_;
};

void check_grid(const GridSpec& spec, bool need_fiber) {
  if (spec.stencil_order != 2 && spec.stencil_order != 4) {
    throw Error(ErrorKind::InvalidArgument, "stencil order must be 2 or 4");
  }
  if (spec.n_s < 16 || (need_fiber && spec.n_f < 16)) {
    throw Error(ErrorKind::GridTooCoarse, "need at least 16 nodes per direction");
  }
}

}  // namespace

Grid make_grid(const BundleGeometry& geom, const GridSpec& spec) {
  Grid g;
  g.n_s = spec.n_s;
  g.n_f = spec.n_f;
  g.stencil_order = spec.stencil_order;
  g.s_period = base_period(geom);
  g.f_extent = fiber_extent(geom);
  g.h_s = g.s_period / spec.n_s;
  g.s_start = spec.s_offset * g.h_s;
  g.dirichlet = fiber_dirichlet(geom);
  if (g.dirichlet) {
    g.h_f = g.f_extent / (spec.n_f + 1);
    g.f_start = -1.0 + g.h_f;
  } else {
    g.h_f = g.f_extent / spec.n_f;
    g.f_start = 0.0;
  }
  return g;
}

DiscreteOperator assemble_full(const BundleGeometry& geom, Epsilon eps, const GridSpec& spec) {
  check_grid(spec, true);
  validate(geom);
  if (const auto* guide = std::get_if<WaveguideGeometry>(&geom)) guide->check_epsilon(eps);

  const Grid g = make_grid(geom, spec);
  const int order = spec.stencil_order;
  const double cell = g.h_s * g.h_f;
  SymmetricAssembler assembler(g.size());

  const auto s_st = periodic_stencils(g.n_s, g.h_s, order);
  for (int j = 0; j < g.n_f; ++j) {
    const double v = g.f(j);
    for (int m = 0; m < g.n_s; ++m) {
      const MetricSample ms = metric_sample(geom, eps, g.s(m) + 0.5 * g.h_s, v);
      assembler.add_outer(s_st[m], ms.sqrt_det * ms.g_ss_inv * cell,
                          [&](int i) { return g.index(i, j); });
    }
  }

  const auto periodic_f = g.dirichlet ? std::vector<Stencil>{}
                                      : periodic_stencils(g.n_f, g.h_f, order);
  for (int i = 0; i < g.n_s; ++i) {
    const double s = g.s(i);
    auto column = [&](int j) { return g.index(i, j); };
    if (!g.dirichlet) {
      for (int m = 0; m < g.n_f; ++m) {
        const MetricSample ms = metric_sample(geom, eps, s, g.f(m) + 0.5 * g.h_f);
        assembler.add_outer(periodic_f[m], ms.sqrt_det * ms.g_ff_inv * cell, column);
      }
      continue;
    }
    // Flux coefficient c = sqrt_det g^uu = (1 - eps u kappa)/eps, so dc/du = -kappa.
    const double slope = -std::get<WaveguideGeometry>(geom).curvature.eval(s);
    const MetricSample lo = metric_sample(geom, eps, s, -1.0);
    const MetricSample hi = metric_sample(geom, eps, s, 1.0);
    const double beta_l = slope / (lo.sqrt_det * lo.g_ff_inv);
    const double beta_r = slope / (hi.sqrt_det * hi.g_ff_inv);
    const auto st = dirichlet_stencils(g.n_f, g.h_f, order, beta_l, beta_r);
    for (int m = 0; m <= g.n_f; ++m) {
      const MetricSample ms = metric_sample(geom, eps, s, -1.0 + (m + 0.5) * g.h_f);
      assembler.add_outer(st[m], ms.sqrt_det * ms.g_ff_inv * cell, column);
    }
    if (order == 4) {
      // Midpoint-rule end correction (h^2/24)(F'(1) - F'(-1)) for F = c f_u^2,
      // where F' = -c' f_u^2 at a wall.
      const double k = g.h_s * g.h_f * g.h_f / 24.0;
      assembler.add_outer(right_wall_slope(g.n_f, g.h_f), -k * slope, column);
      assembler.add_outer(left_wall_slope(g.n_f, g.h_f), k * slope, column);
    }
  }

  DiscreteOperator op;
  op.K = assembler.finish();
  op.W.resize(g.size());
  for (int i = 0; i < g.n_s; ++i) {
    for (int j = 0; j < g.n_f; ++j) {
      op.W[g.index(i, j)] = metric_sample(geom, eps, g.s(i), g.f(j)).sqrt_det * cell;
    }
  }
  op.grid = spec;
  op.epsilon = eps.value();
  op.closed = !g.dirichlet;
  op.label = g.dirichlet ? "waveguide" : "warped_torus";
  return op;
}

double effective_potential(const BundleGeometry& geom, double s) {
  if (const auto* torus = std::get_if<WarpedTorusGeometry>(&geom)) {
    const double d1 = torus->warp.log_derivative(s, 1);
    const double d2 = torus->warp.log_derivative(s, 2);
    return 0.5 * d2 + 0.25 * d1 * d1;
  }
  const double k = std::get<WaveguideGeometry>(geom).curvature.eval(s);
  return -0.25 * k * k;
}

double stencil_symbol(int stencil_order, double k, double h) {
  const double th = k * h;
  if (stencil_order == 2) {
    const double sn = std::sin(0.5 * th);
    return 4.0 * sn * sn / (h * h);
  }
  const double d = (27.0 * std::sin(0.5 * th) - std::sin(1.5 * th)) / (12.0 * h);
  return d * d;
}

double discrete_fiber_ground(const BundleGeometry& geom, const GridSpec& spec) {
  if (!fiber_dirichlet(geom)) return 0.0;
  // With odd reflection at both walls the flat operator is the periodic one
  // restricted to odd functions, so sin(pi (u+1)/2) is an exact eigenvector.
  const Grid g = make_grid(geom, spec);
  return stencil_symbol(spec.stencil_order, 0.5 * std::numbers::pi, g.h_f);
}

EffectiveOperator1D assemble_effective(const BundleGeometry& geom, const GridSpec& spec) {
  check_grid(spec, false);
  validate(geom);
  const Grid g = make_grid(geom, spec);
  const int n = g.n_s;
  SymmetricAssembler assembler(n);
  const auto st = periodic_stencils(n, g.h_s, spec.stencil_order);
  for (int m = 0; m < n; ++m) assembler.add_outer(st[m], g.h_s, [](int i) { return i; });

  EffectiveOperator1D eff;
  eff.h = g.h_s;
  eff.potential.resize(n);
  eff.nodes.resize(n);
  for (int i = 0; i < n; ++i) {
    eff.nodes[i] = g.s(i);
    eff.potential[i] = effective_potential(geom, g.s(i));
    assembler.add_diagonal(i, g.h_s * eff.potential[i]);
  }
  eff.op.K = assembler.finish();
  eff.op.W = Eigen::VectorXd::Constant(n, g.h_s);
  eff.op.grid = spec;
  eff.op.closed = true;
  eff.op.label = "effective";
  eff.lambda0 = fiber_dirichlet(geom) ? 0.25 * std::numbers::pi * std::numbers::pi : 0.0;
  eff.lambda0_discrete = discrete_fiber_ground(geom, spec);
  return eff;
}

double density_potential(const WaveguideGeometry& geom, Epsilon eps, double s, double u) {
  const double k = geom.curvature.eval(s);
  const double rho = 1.0 - eps.value() * u * k;
  if (rho <= 0.0) throw Error(ErrorKind::TubeDegenerate, "1 - eps u kappa(s) <= 0");
  return -0.25 * eps.value() * eps.value() * k * k / (rho * rho);
}

DiscreteOperator assemble_fiber(const WaveguideGeometry& geom, Epsilon eps, double s, int n_f,
                                int stencil_order) {
  GridSpec spec{16, n_f, stencil_order, 0.0};
  check_grid(spec, true);
  geom.check_epsilon(eps);
  const double h = 2.0 / (n_f + 1);
  SymmetricAssembler assembler(n_f);
  const auto st = dirichlet_stencils(n_f, h, stencil_order, 0.0, 0.0);
  for (int m = 0; m <= n_f; ++m) assembler.add_outer(st[m], h, [](int j) { return j; });
  for (int j = 0; j < n_f; ++j) {
    assembler.add_diagonal(j, h * density_potential(geom, eps, s, -1.0 + (j + 1) * h));
  }
  DiscreteOperator op;
  op.K = assembler.finish();
  op.W = Eigen::VectorXd::Constant(n_f, h);
  op.grid = spec;
  op.epsilon = eps.value();
  op.closed = false;
  op.label = "fiber";
  return op;
}

void write_triplets(std::ostream& out, const SparseMatrix& m) {
  char buf[96];
  for (int c = 0; c < m.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
      std::snprintf(buf, sizeof buf, "%lld %lld %.17g\n", static_cast<long long>(it.row()),
                    static_cast<long long>(it.col()), it.value());
      out << buf;
    }
  }
}

}  // namespace fibrelab
