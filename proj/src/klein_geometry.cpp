#include "hyperflats/klein_geometry.hpp"

#include <fmt/format.h>

namespace hyperflats::geometry {

AffineFlat AffineFlat::from_normal_offset(Basis normal, const Eigen::Ref<const Eigen::VectorXd>& offset) {
  if (offset.size() != normal.ambient_dim()) {
    throw DomainError(fmt::format("flat offset has size {} in R^{}", offset.size(), normal.ambient_dim()));
  }
  Eigen::VectorXd x = linalg::project(normal, offset);
  const double residual = (offset - x).norm();
  if (residual > 1e-6 * (1.0 + offset.norm())) {
    throw DomainError(
        fmt::format("flat offset is not in the span of its normal basis (residual {})", residual));
  }
  return AffineFlat(std::move(normal), std::move(x));
}

bool AffineFlat::is_hyperbolic(Curvature K) const {
  K.require_hyperbolic("AffineFlat::is_hyperbolic");
  return K.scale() * offset_.norm() < 1.0;
}

double AffineFlat::distance_to_origin(Curvature K) const {
  return klein_radius_inv(K, offset_.norm());
}

IntersectionOutcome intersect_with_central_subspace(const AffineFlat& E, const Basis& L, Curvature K,
                                                    double rank_tol) {
  K.require_hyperbolic("intersect_with_central_subspace");
  if (L.ambient_dim() != E.ambient_dim()) {
    throw DomainError(fmt::format("intersect: E lives in R^{} but L in R^{}", E.ambient_dim(),
                                  L.ambient_dim()));
  }
  const double s = K.scale();
  const Eigen::MatrixXd& W = E.normal_basis().matrix();
  const Eigen::MatrixXd& B = L.matrix();
  const Eigen::MatrixXd M = W.transpose() * B;
  const Eigen::VectorXd rhs = W.transpose() * E.offset();
  IntersectionOutcome out;
  const auto c = linalg::min_norm_solution(M, rhs, rank_tol);
  if (!c) return out;
  Eigen::VectorXd y = B * *c;
  const double r = y.norm();
  if (!(s * r < 1.0 - kBoundaryTol)) return out;
  out.kind = IntersectionOutcome::Kind::Meets;
  out.euclid_dist = r;
  out.hyper_dist = std::atanh(s * r) / s;
  out.closest_point = std::move(y);
  return out;
}

}  // namespace hyperflats::geometry
