#pragma once

// Flats of the hyperbolic space in the Beltrami-Klein model. A k-flat is the
// part inside the ball of a Euclidean affine subspace; here it is stored as
// {y : P_W y = x} with W its normal space and x in W its point closest to the
// origin.

#include <Eigen/Core>

#include "hyperflats/linalg.hpp"
#include "hyperflats/special_functions.hpp"

namespace hyperflats::geometry {

using linalg::Basis;

class AffineFlat {
 public:
  /// Throws DomainError when the offset is farther than 1e-6 (1 + ||x||) from
  /// span(normal); otherwise stores the projected offset.
  static AffineFlat from_normal_offset(Basis normal, const Eigen::Ref<const Eigen::VectorXd>& offset);

  const Basis& normal_basis() const { return normal_; }
  const Eigen::VectorXd& offset() const { return offset_; }
  int ambient_dim() const { return normal_.ambient_dim(); }
  int dim() const { return normal_.ambient_dim() - normal_.dim(); }

  /// Whether the Euclidean flat meets the open Klein ball.
  bool is_hyperbolic(Curvature K) const;
  /// Hyperbolic distance from the origin to the flat (its offset point).
  double distance_to_origin(Curvature K) const;

 private:
  AffineFlat(Basis normal, Eigen::VectorXd offset) : normal_(std::move(normal)), offset_(std::move(offset)) {}
  Basis normal_;
  Eigen::VectorXd offset_;
};

inline AffineFlat flat_from_normal_offset(const Basis& normal,
                                          const Eigen::Ref<const Eigen::VectorXd>& offset) {
  return AffineFlat::from_normal_offset(normal, offset);
}

struct IntersectionOutcome {
  enum class Kind { Empty, Meets };
  Kind kind = Kind::Empty;
  double euclid_dist = 0.0;
  double hyper_dist = 0.0;
  /// Point of E cap L nearest to the origin (empty vector when Kind::Empty).
  Eigen::VectorXd closest_point;

  bool meets() const { return kind == Kind::Meets; }
};

/// Points with sqrt(-K) ||y|| >= 1 - kBoundaryTol count as outside the open ball.
inline constexpr double kBoundaryTol = 1e-14;

/// Intersection of E with the linear subspace L = span(B). Solves
/// W^T B c = W^T x with minimum norm; the resulting point B c is the point of
/// E cap L closest to the origin in both the Euclidean and hyperbolic sense.
/// When E itself misses the ball the outcome is Empty, since ||B c|| >= ||x||.
IntersectionOutcome intersect_with_central_subspace(const AffineFlat& E, const Basis& L, Curvature K,
                                                    double rank_tol = linalg::kDefaultRankTol);

}  // namespace hyperflats::geometry
