#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <iosfwd>
#include <string>
#include <vector>

#include "fibrelab/geometry.hpp"

namespace fibrelab {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct GridSpec {
  int n_s = 64;
  int n_f = 32;
  int stencil_order = 2;
  /// Base nodes sit at (i + s_offset) h_s. A half-cell offset keeps nodes off
  /// symmetric zero lines.
  double s_offset = 0.0;
};

/// Node layout derived from a GridSpec. Periodic fibres use t_j = j h_f with
/// h_f = l_F / n_f. Dirichlet fibres store interior nodes only:
/// u_j = -1 + (j + 1) h_f, h_f = 2 / (n_f + 1).
struct Grid {
  int n_s = 0;
  int n_f = 0;
  int stencil_order = 2;
  double h_s = 0.0;
  double h_f = 0.0;
  double s_start = 0.0;
  double f_start = 0.0;
  double s_period = 0.0;
  double f_extent = 0.0;
  bool dirichlet = false;

  double s(int i) const { return s_start + i * h_s; }
  double f(int j) const { return f_start + j * h_f; }
  int index(int i, int j) const { return i * n_f + j; }
  int size() const { return n_s * n_f; }
};

Grid make_grid(const BundleGeometry& geom, const GridSpec& spec);

/// Generalised pencil (K, W): K symmetric positive semidefinite in CSC form,
/// W the positive diagonal of the mass matrix.
struct DiscreteOperator {
  SparseMatrix K;
  Eigen::VectorXd W;
  GridSpec grid;
  double epsilon = 0.0;
  bool closed = true;
  std::string label;

  int dim() const { return static_cast<int>(W.size()); }
};

struct EffectiveOperator1D {
  DiscreteOperator op;
  Eigen::VectorXd potential;
  std::vector<double> nodes;
  double h = 0.0;
  /// Fibre ground energy of the continuum problem: 0 or pi^2 / 4.
  double lambda0 = 0.0;
  /// Same quantity on the fibre grid with the same stencil.
  double lambda0_discrete = 0.0;
};

/// Staggered finite-volume discretisation of -Delta_{g_eps} on the grid.
DiscreteOperator assemble_full(const BundleGeometry& geom, Epsilon eps, const GridSpec& spec);

/// H0 = -d^2/ds^2 + V_eff on the base nodes of `spec`.
EffectiveOperator1D assemble_effective(const BundleGeometry& geom, const GridSpec& spec);

/// -d^2/du^2 + V_rho(s, .) on (-1, 1) with Dirichlet ends.
DiscreteOperator assemble_fiber(const WaveguideGeometry& geom, Epsilon eps, double s, int n_f,
                                int stencil_order = 4);

/// V_rho = -eps^2 kappa^2 / (4 (1 - eps u kappa)^2).
double density_potential(const WaveguideGeometry& geom, Epsilon eps, double s, double u);

/// Closed form of V_eff.
double effective_potential(const BundleGeometry& geom, double s);

/// Ground eigenvalue of the flat fibre Laplacian on the grid of `spec`.
double discrete_fiber_ground(const BundleGeometry& geom, const GridSpec& spec);

/// Symbol of the staggered second difference at wave number k, i.e. the
/// discrete eigenvalue of -d^2/dx^2 on exp(i k x) with spacing h.
double stencil_symbol(int stencil_order, double k, double h);

/// Row, column, value per line with 17 significant digits.
void write_triplets(std::ostream& out, const SparseMatrix& m);

}  // namespace fibrelab
