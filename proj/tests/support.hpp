#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "fibrelab/geometry.hpp"
#include "fibrelab/operators.hpp"

namespace testing {

inline constexpr double pi = 3.14159265358979323846;

inline fibrelab::WarpedTorusGeometry torus(std::vector<double> cos_amps = {}, bool exp = false) {
  fibrelab::WarpedTorusGeometry g;
  g.warp.exponential = exp;
  g.warp.profile.constant = exp ? 0.0 : 1.0;
  g.warp.profile.cosine_amps = std::move(cos_amps);
  return g;
}

inline fibrelab::WaveguideGeometry guide(double constant, std::vector<double> cos_amps = {}) {
  fibrelab::WaveguideGeometry g;
  g.curvature.constant = constant;
  g.curvature.cosine_amps = std::move(cos_amps);
  return g;
}

inline double max_asymmetry(const fibrelab::SparseMatrix& k) {
  const fibrelab::SparseMatrix d = fibrelab::SparseMatrix(k.transpose()) - k;
  double m = 0.0;
  for (int c = 0; c < d.outerSize(); ++c)
    for (fibrelab::SparseMatrix::InnerIterator it(d, c); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

// Observed order from errors on grids refined by `ratio`.
inline double observed_order(double coarse, double fine, double ratio = 2.0) {
  return std::log(coarse / fine) / std::log(ratio);
}

}  // namespace testing
