#include <doctest.h>

#include <random>

#include <Eigen/Dense>

#include "hyperflats/linalg.hpp"

using namespace hyperflats;
using namespace hyperflats::linalg;

namespace {

Eigen::MatrixXd random_matrix(std::mt19937_64& gen, int rows, int cols) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = normal(gen);
  return M;
}

// Largest principal angle residual between two spans: ||(I - P_a) B||.
double span_distance(const Basis& a, const Basis& b) {
  const Eigen::MatrixXd& A = a.matrix();
  const Eigen::MatrixXd& B = b.matrix();
  return (B - A * (A.transpose() * B)).norm();
}

}  // namespace

TEST_CASE("standard basis vectors are returned unchanged") {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(3, 2);
  M(0, 0) = 1;
  M(1, 1) = 1;
  const Basis B = orthonormalize(M);
  CHECK((B.matrix() - M).norm() == 0.0);
  CHECK(B.dim() == 2);
  CHECK(B.ambient_dim() == 3);
}

TEST_CASE("orthonormalize a skew pair in the plane") {
  std::vector<Eigen::VectorXd> v{Eigen::Vector3d(1, 1, 0), Eigen::Vector3d(1, -1, 0)};
  const Basis B = orthonormalize(v);
  CHECK(B.gram_deviation() <= 1e-12);
  for (int i = 0; i < 2; ++i) CHECK(B.column(i)(2) == 0.0);
  CHECK((project(B, v[0]) - v[0]).norm() <= 1e-14);
  CHECK((project(B, v[1]) - v[1]).norm() <= 1e-14);
}

TEST_CASE("dependent vectors raise a rank error") {
  std::vector<Eigen::VectorXd> v{Eigen::Vector2d(1, 0), Eigen::Vector2d(2, 0)};
  CHECK_THROWS_AS(orthonormalize(v), RankError);
  CHECK_THROWS_AS(orthonormalize(std::vector<Eigen::VectorXd>{}), RankError);
  CHECK_THROWS_AS(orthonormalize(Eigen::MatrixXd::Zero(3, 1)), RankError);
  CHECK_THROWS_AS(orthonormalize(Eigen::MatrixXd::Identity(2, 3)), RankError);
  // nearly dependent but above tolerance
  std::vector<Eigen::VectorXd> w{Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 1e-8)};
  CHECK(orthonormalize(w).gram_deviation() <= 1e-12);
}

TEST_CASE("gram invariant holds for ill-conditioned random inputs") {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 2 + trial % 9;
    const int k = 1 + trial % d;
    Eigen::MatrixXd M = random_matrix(gen, d, k);
    // squeeze the columns together
    for (int j = 1; j < k; ++j) M.col(j) = M.col(0) + 1e-5 * M.col(j);
    const Basis B = orthonormalize(M);
    CHECK(B.gram_deviation() <= 1e-12);
  }
}

TEST_CASE("span is invariant under column scaling") {
  std::mt19937_64 gen(5);
  const Eigen::MatrixXd M = random_matrix(gen, 6, 3);
  Eigen::MatrixXd S = M;
  S.col(0) *= 1e6;
  S.col(1) *= -3e-4;
  S.col(2) *= 17.0;
  CHECK(span_distance(orthonormalize(M), orthonormalize(S)) <= 1e-12);
}

TEST_CASE("from_orthonormal validates columns") {
  CHECK_NOTHROW(Basis::from_orthonormal(Eigen::MatrixXd::Identity(4, 2)));
  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(3, 2);
  bad(0, 1) = 1e-6;
  CHECK_THROWS_AS(Basis::from_orthonormal(bad), DomainError);
  CHECK_THROWS_AS(Basis::from_orthonormal(Eigen::MatrixXd::Identity(2, 3)), DomainError);
}

TEST_CASE("projection basics") {
  const Basis e1 = Basis::from_orthonormal(Eigen::MatrixXd::Identity(3, 1));
  const Eigen::Vector3d v(3, 4, 0);
  CHECK((project(e1, v) - Eigen::Vector3d(3, 0, 0)).norm() == 0.0);
  CHECK(project(e1, Eigen::Vector3d(0, 2, -1)).norm() == 0.0);
  CHECK_THROWS_AS(project(e1, Eigen::Vector2d(1, 1)), DomainError);

  std::mt19937_64 gen(9);
  for (int trial = 0; trial < 30; ++trial) {
    const Basis B = orthonormalize(random_matrix(gen, 7, 1 + trial % 6));
    const Eigen::VectorXd x = random_matrix(gen, 7, 1);
    const Eigen::VectorXd p = project(B, x);
    CHECK((project(B, p) - p).norm() <= 1e-13 * (1 + p.norm()));
    CHECK(p.norm() <= x.norm() * (1 + 1e-15));
  }
}

TEST_CASE("min-norm solution examples") {
  Eigen::MatrixXd M(1, 2);
  M << 1, 0;
  const auto c = min_norm_solution(M, Eigen::VectorXd::Constant(1, 2.0));
  REQUIRE(c);
  CHECK((*c - Eigen::Vector2d(2, 0)).norm() <= 1e-15);

  Eigen::MatrixXd N(2, 2);
  N << 1, 0, 1, 0;
  CHECK_FALSE(min_norm_solution(N, Eigen::Vector2d(1, 2)));
  // consistent but rank deficient
  const auto c2 = min_norm_solution(N, Eigen::Vector2d(1, 1));
  REQUIRE(c2);
  CHECK((*c2 - Eigen::Vector2d(1, 0)).norm() <= 1e-12);

  const auto c3 = min_norm_solution(Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d(3, 4));
  REQUIRE(c3);
  CHECK((*c3 - Eigen::Vector2d(3, 4)).norm() <= 1e-15);
  CHECK_THROWS_AS(min_norm_solution(M, Eigen::Vector2d(1, 1)), DomainError);
}

TEST_CASE("min-norm solution is orthogonal to the null space") {
  std::mt19937_64 gen(21);
  for (int m : {1, 2, 4, 6, 8, 12}) {
    for (int trial = 0; trial < 10; ++trial) {
      const int n = m + 1 + trial;
      const Eigen::MatrixXd M = random_matrix(gen, m, n);
      const Eigen::VectorXd b = random_matrix(gen, m, 1);
      const auto c = min_norm_solution(M, b);
      REQUIRE(c);
      CHECK((M * *c - b).norm() <= 1e-10);
      const Eigen::VectorXd ref = M.transpose() * (M * M.transpose()).ldlt().solve(b);
      CHECK((*c - ref).norm() <= 1e-8);
    }
  }
}

TEST_CASE("min-norm solution on tall systems") {
  std::mt19937_64 gen(4);
  const Eigen::MatrixXd M = random_matrix(gen, 9, 3);
  const Eigen::VectorXd c0 = random_matrix(gen, 3, 1);
  const auto c = min_norm_solution(M, M * c0);
  REQUIRE(c);
  CHECK((*c - c0).norm() <= 1e-10);
  Eigen::VectorXd b = M * c0;
  b(0) += 1e-3;
  CHECK_FALSE(min_norm_solution(M, b));
}
