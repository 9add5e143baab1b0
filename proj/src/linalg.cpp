#include "hyperflats/linalg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <fmt/format.h>

namespace hyperflats::linalg {

Basis Basis::from_orthonormal(Eigen::MatrixXd columns, double check_tol) {
  if (columns.cols() < 1 || columns.cols() > columns.rows()) {
    throw DomainError(fmt::format("basis needs 1 <= dim <= d (got {} columns in R^{})",
                                  columns.cols(), columns.rows()));
  }
  Basis b(std::move(columns));
  const double dev = b.gram_deviation();
  if (!(dev <= check_tol)) {
    throw DomainError(fmt::format("columns are not orthonormal (Gram deviation {})", dev));
  }
  return b;
}

double Basis::gram_deviation() const {
  const Eigen::MatrixXd G = columns_.transpose() * columns_;
  return (G - Eigen::MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
}

Basis orthonormalize(const Eigen::MatrixXd& vectors, double tol) {
  const Eigen::Index d = vectors.rows(), n = vectors.cols();
  if (n < 1 || n > d) {
    throw RankError(fmt::format("cannot orthonormalize {} vectors in R^{}", n, d));
  }
  Eigen::MatrixXd Q = vectors;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double original = vectors.col(j).norm();
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i < j; ++i) Q.col(j) -= Q.col(i).dot(Q.col(j)) * Q.col(i);
    }
    const double residual = Q.col(j).norm();
    if (!(original > 0.0) || !(residual > tol * original)) {
      throw RankError(fmt::format("vector {} is linearly dependent on the previous ones "
                                  "(residual {} of norm {})", j, residual, original));
    }
    Q.col(j) /= residual;
  }
  return Basis(std::move(Q));
}

Basis orthonormalize(const std::vector<Eigen::VectorXd>& vectors, double tol) {
  if (vectors.empty()) throw RankError("cannot orthonormalize an empty list");
  Eigen::MatrixXd M(vectors.front().size(), static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t j = 0; j < vectors.size(); ++j) {
    if (vectors[j].size() != M.rows()) throw DomainError("orthonormalize: dimension mismatch");
    M.col(static_cast<Eigen::Index>(j)) = vectors[j];
  }
  return orthonormalize(M, tol);
}

Eigen::VectorXd project(const Basis& basis, const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (v.size() != basis.ambient_dim()) {
    throw DomainError(fmt::format("project: vector of size {} onto a basis in R^{}", v.size(),
                                  basis.ambient_dim()));
  }
  return basis.matrix() * (basis.matrix().transpose() * v);
}

std::optional<Eigen::VectorXd> min_norm_solution(const Eigen::Ref<const Eigen::MatrixXd>& M,
                                                 const Eigen::Ref<const Eigen::VectorXd>& b,
                                                 double rank_tol) {
  if (M.rows() != b.size()) throw DomainError("min_norm_solution: dimension mismatch");
  Eigen::VectorXd c;
  bool solved = false;
  if (M.rows() <= 6 && M.rows() <= M.cols() && M.rows() > 0) {
    const Eigen::MatrixXd G = M * M.transpose();
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
    const Eigen::VectorXd D = ldlt.vectorD();
    if (ldlt.info() == Eigen::Success && D.minCoeff() > rank_tol * D.cwiseAbs().maxCoeff() &&
        D.maxCoeff() > 0.0) {
      c = M.transpose() * ldlt.solve(b);
      solved = true;
    }
  }
  if (!solved) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(M.rows(), M.cols());
    cod.setThreshold(rank_tol);
    cod.compute(M);
    c = cod.solve(b);
  }
  if (!c.allFinite()) return std::nullopt;
  if ((M * c - b).norm() > rank_tol * (1.0 + b.norm())) return std::nullopt;
  return c;
}

}  // namespace hyperflats::linalg
