#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

#include "fibrelab/operators.hpp"

namespace fibrelab {

struct SolveConfig {
  int k = 6;
  /// Bound on ||K x - lambda W x||_2 / ||W x||_2.
  double tol = 1e-9;
  int max_iter = 500;
  std::uint64_t seed = 1;
  /// Initial shift; defaults to -1 for closed pencils and 0 for Dirichlet ones.
  std::optional<double> shift;
  /// Move the shift towards the wanted cluster once Ritz values are available.
  bool adaptive_shift = true;
  /// Pencils up to this size are solved densely.
  int dense_limit = 700;
};

struct EigenPairSet {
  std::vector<double> values;
  /// One W-orthonormal eigenvector per column.
  Eigen::MatrixXd vectors;
  std::vector<double> residuals;
  int iterations = 0;
  double final_shift = 0.0;
};

/// k smallest eigenpairs of K x = lambda W x.
EigenPairSet smallest_eigenpairs(const DiscreteOperator& op, const SolveConfig& cfg);

struct VerifyReport {
  std::vector<double> residuals;
  double max_residual = 0.0;
  /// max |X^T W X - I| over all entries.
  double orthonormality_error = 0.0;
  /// max |lambda_i - x_i^T K x_i / x_i^T W x_i|.
  double rayleigh_error = 0.0;
};

VerifyReport verify_pairs(const DiscreteOperator& op, const EigenPairSet& pairs);

}  // namespace fibrelab
