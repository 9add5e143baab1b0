#include "hyperflats/special_functions.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <fmt/format.h>
#include <numbers>

namespace hyperflats {

Curvature::Curvature(double K) : K_(K), scale_(0.0) {
  if (!std::isfinite(K) || K > 0.0) {
    throw DomainError(fmt::format("curvature must be finite and <= 0 (got K={})", K));
  }
  if (K < 0.0) scale_ = std::sqrt(-K);
}

double Curvature::scale() const {
  require_hyperbolic("Curvature::scale");
  return scale_;
}

void Curvature::require_hyperbolic(const char* what) const {
  if (!(K_ < 0.0)) {
    throw CurvatureModeError(fmt::format("{} requires K < 0 (got K={})", what, K_));
  }
}

FlatConfig::FlatConfig(int d, int q, int gamma, double u) : d_(d), q_(q), gamma_(gamma), u_(u) {
  if (d < 2) throw InvalidConfigError(fmt::format("require d >= 2 (got d={})", d));
  if (q < 1 || q > d - 1) {
    throw InvalidConfigError(fmt::format("require 1 <= q <= d-1 (got q={}, d={})", q, d));
  }
  if (gamma < 0 || gamma > q - 1) {
    throw InvalidConfigError(
        fmt::format("require 0 <= gamma <= q-1 (got gamma={}, q={})", gamma, q));
  }
  if (!(u > 0.0) || !std::isfinite(u)) {
    throw InvalidConfigError(fmt::format("require u > 0 (got u={})", u));
  }
}

double log_sphere_surface(int n) {
  if (n <= 0) throw DomainError(fmt::format("sphere_surface: require n >= 1 (got n={})", n));
  const double half = 0.5 * n;
  return std::numbers::ln2 + half * std::log(std::numbers::pi) - boost::math::lgamma(half);
}

double sphere_surface(int n) {
  if (n <= 0) throw DomainError(fmt::format("sphere_surface: require n >= 1 (got n={})", n));
  // tgamma(n/2) overflows past n ~ 340.
  if (n > 300) return std::exp(log_sphere_surface(n));
  const double half = 0.5 * n;
  return 2.0 * std::pow(std::numbers::pi, half) / boost::math::tgamma(half);
}

double log_constant_D(const FlatConfig& cfg) {
  const int d = cfg.d(), q = cfg.q(), g = cfg.gamma();
  return log_sphere_surface(g + 1) + log_sphere_surface(q - g) + log_sphere_surface(d - q) -
         log_sphere_surface(d - q + g + 1) - log_sphere_surface(d - g);
}

double constant_D(const FlatConfig& cfg) { return std::exp(log_constant_D(cfg)); }

double klein_radius(Curvature K, double x) {
  K.require_hyperbolic("klein_radius");
  if (!(x >= 0.0)) throw DomainError(fmt::format("klein_radius: require x >= 0 (got {})", x));
  const double s = K.scale();
  return std::tanh(s * x) / s;
}

double klein_radius_inv(Curvature K, double r) {
  K.require_hyperbolic("klein_radius_inv");
  const double s = K.scale();
  if (!(r >= 0.0) || !(s * r < 1.0)) {
    throw DomainError(
        fmt::format("klein_radius_inv: require 0 <= r < {} (got r={})", 1.0 / s, r));
  }
  return std::atanh(s * r) / s;
}

double log_cosh(double x) {
  const double a = std::fabs(x);
  if (a < 20.0) return std::log(std::cosh(a));
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

double log_sinh(double x) {
  if (!(x > 0.0)) throw DomainError("log_sinh: require x > 0");
  if (x < 20.0) return std::log(std::sinh(x));
  return x + std::log1p(-std::exp(-2.0 * x)) - std::numbers::ln2;
}

double klein_distance(Curvature K, const Eigen::Ref<const Eigen::VectorXd>& x,
                      const Eigen::Ref<const Eigen::VectorXd>& y) {
  K.require_hyperbolic("klein_distance");
  if (x.size() != y.size()) throw DomainError("klein_distance: dimension mismatch");
  const double s = K.scale();
  const double nx = s * x.norm();
  const double ny = s * y.norm();
  if (!(nx < 1.0) || !(ny < 1.0)) {
    throw DomainError("klein_distance: point outside the open Klein ball");
  }
  // With A = 1 + K|x|^2, B = 1 + K|y|^2, C = 1 + K<x,y>:
  //   cosh(s d) = C / sqrt(AB),
  //   C^2 - AB = -K (|x-y|^2 + K |x ^ y|^2).
  const double A = (1.0 - nx) * (1.0 + nx);
  const double B = (1.0 - ny) * (1.0 + ny);
  const double C = 1.0 - s * s * x.dot(y);
  const double diff2 = (x - y).squaredNorm();
  double wedge2 = 0.0;  // |x|^2 |y|^2 - <x,y>^2 via the component of y orthogonal to x
  if (x.squaredNorm() > 0.0) {
    const Eigen::VectorXd y_perp = y - (x.dot(y) / x.squaredNorm()) * x;
    wedge2 = x.squaredNorm() * y_perp.squaredNorm();
  }
  const double disc = std::max(0.0, s * s * (diff2 - s * s * wedge2));
  const double sinh_sd = std::sqrt(disc) / std::sqrt(A * B);
  if (sinh_sd < 1.0) return std::asinh(sinh_sd) / s;
  // log form: log(C + sqrt(C^2 - AB)) - log sqrt(A) - log sqrt(B), with the
  // boundary factors taken through log1p.
  const double logA = std::log1p(-nx) + std::log1p(nx);
  const double logB = std::log1p(-ny) + std::log1p(ny);
  return (std::log(C + std::sqrt(disc)) - 0.5 * (logA + logB)) / s;
}

}  // namespace hyperflats
