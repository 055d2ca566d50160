#include "fibrelab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fibrelab/error.hpp"

namespace fibrelab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kDenseSamples = 4096;

double coefficient(const std::vector<double>& v, std::size_t k) {
  return k < v.size() ? v[k] : 0.0;
}

}  // namespace

std::size_t PeriodicProfile::modes() const {
  return std::max(cosine_amps.size(), sine_amps.size());
}

double PeriodicProfile::eval(double s, int deriv_order) const {
  if (deriv_order < 0 || deriv_order > 4) {
    throw Error(ErrorKind::InvalidArgument, "derivative order must be in [0, 4]");
  }
  double out = deriv_order == 0 ? constant : 0.0;
  const double shift = 0.5 * std::numbers::pi * deriv_order;
  for (std::size_t k = 0; k < modes(); ++k) {
    const double w = kTwoPi * static_cast<double>(k + 1) / period;
    const double scale = std::pow(w, deriv_order);
    const double arg = w * s + shift;
    out += scale * (coefficient(cosine_amps, k) * std::cos(arg) +
                    coefficient(sine_amps, k) * std::sin(arg));
  }
  return out;
}

double PeriodicProfile::amplitude_bound() const {
  double b = std::abs(constant);
  for (std::size_t k = 0; k < modes(); ++k) {
    b += std::hypot(coefficient(cosine_amps, k), coefficient(sine_amps, k));
  }
  return b;
}

double PeriodicProfile::sampled_min(int samples) const {
  double m = eval(0.0);
  for (int i = 1; i < samples; ++i) m = std::min(m, eval(period * i / samples));
  return m;
}

double PeriodicProfile::sampled_max_abs(int samples) const {
  double m = 0.0;
  for (int i = 0; i < samples; ++i) m = std::max(m, std::abs(eval(period * i / samples)));
  return m;
}

double Warp::value(double s) const {
  const double f = profile.eval(s);
  return exponential ? std::exp(f) : f;
}

double Warp::log_derivative(double s, int order) const {
  if (exponential) return profile.eval(s, order);
  const double a = profile.eval(s);
  const double a1 = profile.eval(s, 1);
  if (order == 1) return a1 / a;
  if (order == 2) return profile.eval(s, 2) / a - (a1 / a) * (a1 / a);
  throw Error(ErrorKind::InvalidArgument, "log derivative order must be 1 or 2");
}

void WarpedTorusGeometry::validate() const {
  if (!(half_length > 0.0) || !(fiber_length > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "torus lengths must be positive");
  }
  const double period = 2.0 * half_length;
  if (std::abs(warp.profile.period - period) > 1e-12 * period) {
    throw Error(ErrorKind::InvalidArgument, "warp period must equal 2L");
  }
  if (!warp.exponential) {
    const double lower = warp.profile.constant - (warp.profile.amplitude_bound() -
                                                  std::abs(warp.profile.constant));
    if (lower <= 0.0 && warp.profile.sampled_min(kDenseSamples) <= 0.0) {
      throw Error(ErrorKind::InvalidArgument, "warp a(s) must be positive");
    }
  }
  if (modulated()) {
    if (std::abs(modulation.period - period) > 1e-12 * period) {
      throw Error(ErrorKind::InvalidArgument, "modulation period must equal 2L");
    }
    if (modulation.sampled_max_abs(kDenseSamples) >= 1.0) {
      throw Error(ErrorKind::InvalidArgument, "modulation amplitude must stay below 1");
    }
  }
}

bool WarpedTorusGeometry::modulated() const {
  return modulation.constant != 0.0 || modulation.amplitude_bound() != 0.0;
}

double WarpedTorusGeometry::fiber_scale(double s, double t) const {
  const double a = warp.value(s);
  if (!modulated()) return a;
  return a * (1.0 + modulation.eval(s) * std::cos(kTwoPi * t / fiber_length));
}

void WaveguideGeometry::validate() const {
  if (!(base_length > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "base length must be positive");
  }
  if (std::abs(curvature.period - base_length) > 1e-12 * base_length) {
    throw Error(ErrorKind::InvalidArgument, "curvature period must equal the base length");
  }
  // Total turning of a closed curve is 2 pi n; only the mean term contributes.
  const double turns = curvature.constant * base_length / kTwoPi;
  if (std::abs(turns - std::round(turns)) > 1e-12 * std::max(1.0, std::abs(turns))) {
    std::ostringstream msg;
    msg << "total curvature " << curvature.constant * base_length
        << " is not a multiple of 2 pi";
    throw Error(ErrorKind::InvalidArgument, msg.str());
  }
}

double WaveguideGeometry::max_abs_curvature() const {
  return curvature.sampled_max_abs(kDenseSamples);
}

void WaveguideGeometry::check_epsilon(double eps) const {
  if (eps * max_abs_curvature() >= 1.0) {
    std::ostringstream msg;
    msg << "eps * max|kappa| = " << eps * max_abs_curvature() << " >= 1";
    throw Error(ErrorKind::TubeDegenerate, msg.str());
  }
}

Epsilon::Epsilon(double value) : value_(value) {
  if (!(value > 0.0 && value < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "epsilon must lie in (0, 1)");
  }
}

MetricSample metric_sample(const BundleGeometry& geom, Epsilon eps, double s, double v) {
  const double e = eps.value();
  if (const auto* torus = std::get_if<WarpedTorusGeometry>(&geom)) {
    const double b = torus->fiber_scale(s, v);
    return {e * e, 1.0 / (b * b), b / e};
  }
  const auto& guide = std::get<WaveguideGeometry>(geom);
  const double rho = 1.0 - e * v * guide.curvature.eval(s);
  if (rho <= 0.0) {
    throw Error(ErrorKind::TubeDegenerate, "1 - eps u kappa(s) <= 0");
  }
  return {e * e / (rho * rho), 1.0, rho / e};
}

double fiber_volume(const BundleGeometry& geom, double s) {
  if (const auto* torus = std::get_if<WarpedTorusGeometry>(&geom)) {
    return torus->fiber_length * torus->warp.value(s);
  }
  return 2.0;
}

void validate(const BundleGeometry& geom) {
  std::visit([](const auto& g) { g.validate(); }, geom);
}

double base_period(const BundleGeometry& geom) {
  if (const auto* torus = std::get_if<WarpedTorusGeometry>(&geom)) return 2.0 * torus->half_length;
  return std::get<WaveguideGeometry>(geom).base_length;
}

double fiber_extent(const BundleGeometry& geom) {
  if (const auto* torus = std::get_if<WarpedTorusGeometry>(&geom)) return torus->fiber_length;
  return 2.0;
}

bool fiber_dirichlet(const BundleGeometry& geom) {
  return std::holds_alternative<WaveguideGeometry>(geom);
}

double reference_fiber_scale(const BundleGeometry& geom, double s, double v) {
  if (const auto* torus = std::get_if<WarpedTorusGeometry>(&geom)) return torus->fiber_scale(s, v);
  return 1.0;
}

double reference_density(const BundleGeometry& geom, double s, double v) {
  return reference_fiber_scale(geom, s, v);
}

}  // namespace fibrelab
