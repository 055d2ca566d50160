#pragma once

#include <cstddef>
#include <numbers>
#include <variant>
#include <vector>

namespace fibrelab {

/// Finite trigonometric series
///   c + sum_{k>=1} (cos_k cos(2 pi k s / P) + sin_k sin(2 pi k s / P)).
/// cosine_amps[0] is the k = 1 coefficient.
struct PeriodicProfile {
  double period = 2.0 * std::numbers::pi;
  double constant = 0.0;
  std::vector<double> cosine_amps;
  std::vector<double> sine_amps;

  std::size_t modes() const;
  /// n-th derivative, 0 <= n <= 4. Exact termwise differentiation.
  double eval(double s, int deriv_order = 0) const;
  /// |c| + sum sqrt(cos_k^2 + sin_k^2), a rigorous bound on max |f|.
  double amplitude_bound() const;
  double sampled_min(int samples) const;
  double sampled_max_abs(int samples) const;
};

/// Warping function a(s) > 0. Either the series itself or exp(series).
struct Warp {
  PeriodicProfile profile;
  bool exponential = false;

  double value(double s) const;
  /// n-th derivative of log a, n in {1, 2}.
  double log_derivative(double s, int order) const;
};

/// R/2LZ x R/l_F Z with g_eps = eps^-2 ds^2 + b(s,t)^2 dt^2, where
/// b = a(s) (1 + m(s) cos(2 pi t / l_F)). The modulation m defaults to zero,
/// which is the plain warped product; a nonzero m keeps every fibre length
/// l_F a(s) but couples base and fibre.
struct WarpedTorusGeometry {
  double half_length = std::numbers::pi;
  double fiber_length = 2.0 * std::numbers::pi;
  Warp warp;
  PeriodicProfile modulation;

  void validate() const;
  double fiber_scale(double s, double t) const;
  bool modulated() const;
};

/// Tubular neighbourhood of a closed planar curve of length l and curvature
/// kappa, with G_eps = eps^-2 (1 - eps u kappa)^2 ds^2 + du^2, u in [-1, 1],
/// Dirichlet on u = +-1.
struct WaveguideGeometry {
  double base_length = 2.0 * std::numbers::pi;
  PeriodicProfile curvature;

  void validate() const;
  double max_abs_curvature() const;
  /// eps * max|kappa| < 1.
  void check_epsilon(double eps) const;
};

using BundleGeometry = std::variant<WarpedTorusGeometry, WaveguideGeometry>;

class Epsilon {
 public:
  explicit Epsilon(double value);
  double value() const noexcept { return value_; }
  operator double() const noexcept { return value_; }

 private:
  double value_;
};

struct MetricSample {
  double g_ss_inv;
  double g_ff_inv;
  double sqrt_det;
};

MetricSample metric_sample(const BundleGeometry& geom, Epsilon eps, double s, double v);

/// eps-independent fibre measure Vol(F_s).
double fiber_volume(const BundleGeometry& geom, double s);

void validate(const BundleGeometry& geom);
double base_period(const BundleGeometry& geom);
double fiber_extent(const BundleGeometry& geom);
bool fiber_dirichlet(const BundleGeometry& geom);

/// Length scale of the fibre coordinate in the eps-independent reference
/// metric ds^2 + b^2 dt^2 (torus) or ds^2 + du^2 (waveguide).
double reference_fiber_scale(const BundleGeometry& geom, double s, double v);

/// Density of the reference volume used for normalisation:
/// b(s,t) on the torus, 1 on the waveguide.
double reference_density(const BundleGeometry& geom, double s, double v);

}  // namespace fibrelab
