#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "hyperflats/errors.hpp"

namespace hyperflats::linalg {

inline constexpr double kDefaultRankTol = 1e-10;

/// Orthonormal basis of a subspace of R^d, stored as the columns of a d x dim matrix.
class Basis {
 public:
  /// Wraps columns that are already orthonormal; throws DomainError when the
  /// Gram matrix deviates from the identity by more than `check_tol`.
  static Basis from_orthonormal(Eigen::MatrixXd columns, double check_tol = 1e-12);

  int dim() const { return static_cast<int>(columns_.cols()); }
  int ambient_dim() const { return static_cast<int>(columns_.rows()); }
  const Eigen::MatrixXd& matrix() const { return columns_; }
  Eigen::VectorXd column(int i) const { return columns_.col(i); }

  /// max |B^T B - I|.
  double gram_deviation() const;

 private:
  explicit Basis(Eigen::MatrixXd columns) : columns_(std::move(columns)) {}
  friend Basis orthonormalize(const Eigen::MatrixXd&, double);
  Eigen::MatrixXd columns_;
};

/// Modified Gram-Schmidt with one re-orthogonalization pass. Throws RankError
/// when a column keeps no more than `tol` of its original norm after
/// elimination (or is zero).
Basis orthonormalize(const Eigen::MatrixXd& vectors, double tol = kDefaultRankTol);
Basis orthonormalize(const std::vector<Eigen::VectorXd>& vectors, double tol = kDefaultRankTol);

/// Orthogonal projection onto span(basis).
Eigen::VectorXd project(const Basis& basis, const Eigen::Ref<const Eigen::VectorXd>& v);

/// Minimum-norm c with M c = b, or nullopt when ||M c - b|| > rank_tol (1 + ||b||)
/// for the least-squares minimizer.
std::optional<Eigen::VectorXd> min_norm_solution(const Eigen::Ref<const Eigen::MatrixXd>& M,
                                                 const Eigen::Ref<const Eigen::VectorXd>& b,
                                                 double rank_tol = kDefaultRankTol);

}  // namespace hyperflats::linalg
