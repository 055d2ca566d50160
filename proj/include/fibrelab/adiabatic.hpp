#pragma once

#include <Eigen/Core>
#include <vector>

#include "fibrelab/eigensolve.hpp"
#include "fibrelab/geometry.hpp"
#include "fibrelab/nodal.hpp"
#include "fibrelab/operators.hpp"

namespace fibrelab {

/// Rate factor for a base of dimension d: 1, sqrt(log 1/eps), eps^-1/2.
double theta(int d, double eps);

/// Fibre ground energy: 0 on closed fibres, pi^2/4 on [-1, 1].
double fiber_ground_energy(const BundleGeometry& geom);

/// Normalised positive fibre ground state phi_0(s, v).
double fiber_ground_state(const BundleGeometry& geom, double s, double v);

/// Ground energy of -d^2/du^2 + V_rho(s, .) on [-1, 1], fourth-order stencil,
/// Richardson-extrapolated over n_f and 2 n_f + 1 interior nodes.
double lambda_eps_oracle(const WaveguideGeometry& geom, Epsilon eps, double s, int n_f = 255);

struct Prediction {
  int mode = 0;
  double mu = 0.0;
  /// Lowest effective eigenvalue, used to place solver shifts.
  double mu_lowest = 0.0;
  /// Distance from mu to the nearest other computed effective eigenvalue.
  double mu_gap = 0.0;
  double lambda0 = 0.0;
  double lambda0_discrete = 0.0;
  /// Lambda0_h + eps^2 mu.
  double predicted_full = 0.0;
  GridSpec grid;
  /// Base samples with sum h psi^2 = 1.
  std::vector<double> psi;
  /// psi phi_0 on the full grid, unit norm in the reference L2(M).
  Eigen::VectorXd product;
  /// Node of max |psi phi_0|; the product is positive there.
  int anchor = 0;
  std::vector<BaseZero> zeros;
};

Prediction build_prediction(const BundleGeometry& geom, Epsilon eps,
                            const EffectiveOperator1D& model, int j, const GridSpec& grid);

/// Reference-volume quadrature weights on the full grid.
Eigen::VectorXd reference_weights(const BundleGeometry& geom, const GridSpec& grid);

struct NodalReport {
  int domains = 0;
  int components = 0;
  int zeros = 0;
  double hausdorff = 0.0;
  int boundary_components = 0;
  GraphCheck graph;
  double tube_radius = 0.0;
  /// Smallest C with every nodal endpoint within C eps of a zero.
  double tube_constant = 0.0;
  /// Nodal domain counts of the leading eigenvectors, in order.
  std::vector<int> courant_counts;
  bool courant_ok = true;
};

struct DiscrepancyRecord {
  double epsilon = 0.0;
  int mode = 0;
  double lambda_full = 0.0;
  /// (lambda_full - Lambda0_h) / eps^2.
  double rescaled = 0.0;
  double mu_eff = 0.0;
  /// Distance from mu_eff to its nearest effective neighbour.
  double mu_gap = 0.0;
  double eig_gap = 0.0;
  double supnorm = 0.0;
  double hausdorff = 0.0;
  /// Error floors: the larger of the Richardson estimate and what the solver
  /// tolerance allows to be resolved.
  double disc_err_eig = 0.0;
  double disc_err_supnorm = 0.0;
  double disc_err_hausdorff = 0.0;
};

struct MeasureOptions {
  /// Hausdorff sampling; <= 0 selects a quarter base cell.
  double sampling = 0.0;
  int courant_modes = 6;
};

struct Measurement {
  DiscrepancyRecord record;
  NodalReport nodal;
  NodalSet nodal_set;
  /// Normalised, sign-matched full eigenvector.
  Eigen::VectorXd phi;
};

Measurement measure(const EigenPairSet& full, const Prediction& pred, const BundleGeometry& geom,
                    Epsilon eps, const MeasureOptions& options = {});

}  // namespace fibrelab
