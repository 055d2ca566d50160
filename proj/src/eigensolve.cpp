#include "fibrelab/eigensolve.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include "fibrelab/error.hpp"

namespace fibrelab {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Factor = Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;

// Flip each column so its largest-magnitude entry is positive.
void canonical_signs(MatrixXd& x) {
  for (int c = 0; c < x.cols(); ++c) {
    Eigen::Index at = 0;
    x.col(c).cwiseAbs().maxCoeff(&at);
    if (x(at, c) < 0.0) x.col(c) = -x.col(c);
  }
}

std::vector<double> residual_norms(const DiscreteOperator& op, const MatrixXd& x,
                                   const std::vector<double>& values) {
  std::vector<double> r(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const VectorXd wx = op.W.cwiseProduct(x.col(static_cast<int>(i)));
    const VectorXd res = op.K * x.col(static_cast<int>(i)) - values[i] * wx;
    r[i] = res.norm() / wx.norm();
  }
  return r;
}

double rayleigh(const DiscreteOperator& op, const VectorXd& x) {
  return x.dot(op.K * x) / x.dot(op.W.cwiseProduct(x));
}

EigenPairSet finish(const DiscreteOperator& op, MatrixXd x, int k, int iterations, double shift) {
  canonical_signs(x);
  EigenPairSet out;
  out.vectors = x.leftCols(k);
  for (int i = 0; i < k; ++i) {
    VectorXd c = out.vectors.col(i);
    c /= std::sqrt(c.dot(op.W.cwiseProduct(c)));
    out.vectors.col(i) = c;
    out.values.push_back(rayleigh(op, c));
  }
  out.residuals = residual_norms(op, out.vectors, out.values);
  out.iterations = iterations;
  out.final_shift = shift;
  return out;
}

EigenPairSet solve_dense(const DiscreteOperator& op, const SolveConfig& cfg) {
  const VectorXd s = op.W.cwiseSqrt().cwiseInverse();
  MatrixXd a = MatrixXd(op.K);
  a = s.asDiagonal() * a * s.asDiagonal();
  a = 0.5 * (a + a.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(a);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::NoConvergence, "dense symmetric eigensolver failed");
  }
  MatrixXd x = s.asDiagonal() * es.eigenvectors().leftCols(cfg.k);
  return finish(op, x, cfg.k, 1, 0.0);
}

struct ShiftedFactor {
  Factor ldlt;
  double shift = 0.0;
  int negative = 0;
};

// Factor K - sigma W and count negative pivots (Sylvester inertia).
bool factor_at(const DiscreteOperator& op, double sigma, ShiftedFactor& f) {
  SparseMatrix a = op.K;
  for (int i = 0; i < op.dim(); ++i) a.coeffRef(i, i) -= sigma * op.W[i];
  f.ldlt.compute(a);
  f.shift = sigma;
  if (f.ldlt.info() != Eigen::Success) return false;
  const VectorXd d = f.ldlt.vectorD();
  f.negative = 0;
  for (int i = 0; i < d.size(); ++i) {
    if (d[i] == 0.0 || !std::isfinite(d[i])) return false;
    if (d[i] < 0.0) ++f.negative;
  }
  return true;
}

// Columns scaled to unit W-norm, then two passes of modified Gram-Schmidt in
// the W inner product.
void w_orthonormalize(MatrixXd& y, const VectorXd& w) {
  for (int pass = 0; pass < 2; ++pass) {
    for (int c = 0; c < y.cols(); ++c) {
      for (int p = 0; p < c; ++p) {
        y.col(c) -= y.col(p).dot(w.cwiseProduct(y.col(c))) * y.col(p);
      }
      const double nrm = std::sqrt(y.col(c).dot(w.cwiseProduct(y.col(c))));
      if (!(nrm > 0.0)) throw Error(ErrorKind::NoConvergence, "subspace collapsed");
      y.col(c) /= nrm;
    }
  }
}

MatrixXd random_block(int n, int p, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  MatrixXd x(n, p);
  // Raw engine output keeps the start block identical across standard libraries.
  for (int c = 0; c < p; ++c) {
    for (int r = 0; r < n; ++r) x(r, c) = static_cast<double>(gen() >> 11) * 0x1.0p-53 - 0.5;
  }
  return x;
}

EigenPairSet solve_sparse(const DiscreteOperator& op, const SolveConfig& cfg) {
  const int n = op.dim();
  const int k = cfg.k;
  const int p = std::min(n, 2 * k + 6);
  const double start = cfg.shift.value_or(op.closed ? -1.0 : 0.0);

  auto f = std::make_unique<ShiftedFactor>();
  if (!factor_at(op, start, *f)) {
    throw Error(ErrorKind::FactorizationFailed, "K - sigma W could not be factored");
  }
  if (f->negative > 0) {
    std::ostringstream msg;
    msg << "shift " << start << " lies above " << f->negative << " eigenvalue(s)";
    throw Error(ErrorKind::FactorizationFailed, msg.str());
  }

  MatrixXd x = random_block(n, p, cfg.seed);
  w_orthonormalize(x, op.W);
  VectorXd theta;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    MatrixXd y = f->ldlt.solve(op.W.asDiagonal() * x);
    w_orthonormalize(y, op.W);
    MatrixXd h = y.transpose() * (op.K * y);
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<MatrixXd> rr(h);
    theta = rr.eigenvalues();
    x = y * rr.eigenvectors();

    std::vector<double> vals(theta.data(), theta.data() + k);
    const auto res = residual_norms(op, x.leftCols(k), vals);
    if (*std::max_element(res.begin(), res.end()) <= cfg.tol) {
      return finish(op, x, k, it, f->shift);
    }

    if (cfg.adaptive_shift && it % 2 == 0) {
      const double spread = std::max(theta[k - 1] - theta[0], theta[p - 1] - theta[0]);
      const double candidate = theta[0] - 0.5 * std::max(theta[k - 1] - theta[0], 0.05 * spread);
      if (candidate > f->shift + 1e-3 * std::abs(theta[0] - f->shift)) {
        auto g = std::make_unique<ShiftedFactor>();
        if (factor_at(op, candidate, *g) && g->negative == 0) f = std::move(g);
      }
    }
  }
  std::ostringstream msg;
  msg << "no convergence after " << cfg.max_iter << " iterations";
  throw Error(ErrorKind::NoConvergence, msg.str());
}

}  // namespace

EigenPairSet smallest_eigenpairs(const DiscreteOperator& op, const SolveConfig& cfg) {
  if (cfg.k < 1 || cfg.k > op.dim()) {
    throw Error(ErrorKind::InvalidArgument, "k must lie in [1, dim]");
  }
  if (op.dim() > cfg.dense_limit) return solve_sparse(op, cfg);
  EigenPairSet dense = solve_dense(op, cfg);
  if (*std::max_element(dense.residuals.begin(), dense.residuals.end()) <= cfg.tol) return dense;
  // Dense accuracy is limited by ||W^-1 K||; refine by subspace iteration
  // started just below the dense spectrum.
  SolveConfig refine = cfg;
  const double spread = dense.values.back() - dense.values.front();
  refine.shift = dense.values.front() - std::max(0.5 * spread, 1e-6 * (1.0 + std::abs(dense.values.front())));
  try {
    return solve_sparse(op, refine);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::FactorizationFailed) throw;
  }
  refine.shift.reset();
  return solve_sparse(op, refine);
}

VerifyReport verify_pairs(const DiscreteOperator& op, const EigenPairSet& pairs) {
  VerifyReport r;
  r.residuals = residual_norms(op, pairs.vectors, pairs.values);
  for (double v : r.residuals) r.max_residual = std::max(r.max_residual, v);
  const MatrixXd gram = pairs.vectors.transpose() * op.W.asDiagonal() * pairs.vectors;
  r.orthonormality_error =
      (gram - MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
  for (std::size_t i = 0; i < pairs.values.size(); ++i) {
    const double q = rayleigh(op, pairs.vectors.col(static_cast<int>(i)));
    r.rayleigh_error = std::max(r.rayleigh_error, std::abs(q - pairs.values[i]));
  }
  return r;
}

}  // namespace fibrelab
