#pragma once

#include <Eigen/Core>

#include "hyperflats/errors.hpp"

namespace hyperflats {

/// Sectional curvature K <= 0 of the model space.
///
/// K = 0 is the Euclidean mode; K < 0 is hyperbolic, in which case the scale
/// s = sqrt(-K) is cached and the Beltrami-Klein model lives in the open
/// Euclidean ball of radius 1/s.
class Curvature {
 public:
  explicit Curvature(double K);

  static Curvature unit() { return Curvature(-1.0); }
  static Curvature euclidean() { return Curvature(0.0); }

  double value() const { return K_; }
  bool is_hyperbolic() const { return K_ < 0.0; }

  /// sqrt(-K); throws CurvatureModeError when K = 0.
  double scale() const;
  /// Radius 1/sqrt(-K) of the Klein ball.
  double ball_radius() const { return 1.0 / scale(); }

  /// Throws CurvatureModeError unless K < 0. `what` names the caller.
  void require_hyperbolic(const char* what) const;

 private:
  double K_;
  double scale_;
};

/// Dimension triple (d, q, gamma) and hitting-ball radius u.
///
/// L is a random q-flat through the origin, E a random k-flat with
/// k = d - q + gamma hitting the ball of radius u; see normal_dim().
class FlatConfig {
 public:
  /// Throws InvalidConfigError naming the violated invariant.
  FlatConfig(int d, int q, int gamma, double u);

  int d() const { return d_; }
  int q() const { return q_; }
  int gamma() const { return gamma_; }
  double u() const { return u_; }

  /// Dimension k = d - q + gamma of the random flat E.
  int flat_dim() const { return d_ - q_ + gamma_; }
  /// Codimension q - gamma of E, i.e. the dimension of its normal space.
  int normal_dim() const { return q_ - gamma_; }

  FlatConfig with_radius(double u) const { return {d_, q_, gamma_, u}; }
  FlatConfig with_dimension(int d) const { return {d, q_, gamma_, u_}; }

  friend bool operator==(const FlatConfig&, const FlatConfig&) = default;

 private:
  int d_;
  int q_;
  int gamma_;
  double u_;
};

/// Surface area omega_n = 2 pi^{n/2} / Gamma(n/2) of the unit sphere in R^n.
double sphere_surface(int n);
/// log omega_n, finite for any n accepted by the library.
double log_sphere_surface(int n);

/// The dimension constant
///   D(d,q,gamma) = omega_{gamma+1} omega_{q-gamma} omega_{d-q}
///                  / (omega_{d-q+gamma+1} omega_{d-gamma}),
/// evaluated in log space.
double constant_D(const FlatConfig& cfg);
double log_constant_D(const FlatConfig& cfg);

/// Euclidean radius in the Klein model of the hyperbolic sphere of radius x:
/// R_K(x) = tanh(sqrt(-K) x) / sqrt(-K).
double klein_radius(Curvature K, double x);
/// Inverse of klein_radius: artanh(sqrt(-K) r) / sqrt(-K) for r < 1/sqrt(-K).
double klein_radius_inv(Curvature K, double r);

/// Hyperbolic distance of two points of the Klein ball.
double klein_distance(Curvature K, const Eigen::Ref<const Eigen::VectorXd>& x,
                      const Eigen::Ref<const Eigen::VectorXd>& y);

/// log cosh(x) without overflow.
double log_cosh(double x);
/// log sinh(x) for x > 0 without overflow.
double log_sinh(double x);

}  // namespace hyperflats
