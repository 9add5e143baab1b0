#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "hyperflats/special_functions.hpp"

using namespace hyperflats;
using std::numbers::pi;

TEST_CASE("sphere surface areas for small n") {
  CHECK(sphere_surface(1) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(sphere_surface(2) == doctest::Approx(2 * pi).epsilon(1e-15));
  CHECK(sphere_surface(3) == doctest::Approx(4 * pi).epsilon(1e-15));
  CHECK(sphere_surface(4) == doctest::Approx(2 * pi * pi).epsilon(1e-15));
  CHECK_THROWS_AS(sphere_surface(0), DomainError);
}

TEST_CASE("log sphere surface agrees with the direct form and stays finite") {
  for (int n = 1; n <= 300; n += 7) {
    CHECK(log_sphere_surface(n) == doctest::Approx(std::log(sphere_surface(n))).epsilon(1e-13));
  }
  CHECK(std::isfinite(log_sphere_surface(5000)));
  CHECK(std::isfinite(log_sphere_surface(20000)));
  // past n ~ 340 the direct gamma ratio underflows, the log form does not
  CHECK(sphere_surface(400) == doctest::Approx(std::exp(log_sphere_surface(400))).epsilon(1e-12));
}

TEST_CASE("dimension constant reference values") {
  CHECK(constant_D(FlatConfig(3, 2, 1, 1.0)) == doctest::Approx(1.0 / pi).epsilon(1e-14));
  CHECK(constant_D(FlatConfig(2, 1, 0, 1.0)) == doctest::Approx(2.0 / (pi * pi)).epsilon(1e-14));
  CHECK(std::isfinite(log_constant_D(FlatConfig(2000, 2, 1, 1.0))));
  CHECK(std::isfinite(log_constant_D(FlatConfig(10000, 5000, 100, 1.0))));
}

TEST_CASE("curvature validation") {
  CHECK_THROWS_AS(Curvature(0.5), DomainError);
  CHECK_THROWS_AS(Curvature(std::nan("")), DomainError);
  CHECK_THROWS_AS(Curvature::euclidean().scale(), CurvatureModeError);
  CHECK(Curvature(-4.0).scale() == 2.0);
  CHECK(Curvature(-4.0).ball_radius() == 0.5);
  CHECK_FALSE(Curvature::euclidean().is_hyperbolic());
}

TEST_CASE("flat configuration invariants name the violated constraint") {
  auto message = [](int d, int q, int g, double u) {
    try {
      FlatConfig(d, q, g, u);
    } catch (const InvalidConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message(3, 2, 2, 1.0).find("gamma <= q-1") != std::string::npos);
  CHECK(message(1, 1, 0, 1.0).find("d >= 2") != std::string::npos);
  CHECK(message(3, 3, 0, 1.0).find("q <= d-1") != std::string::npos);
  CHECK(message(3, 2, -1, 1.0).find("0 <= gamma") != std::string::npos);
  CHECK(message(3, 2, 1, 0.0).find("u > 0") != std::string::npos);
  const FlatConfig cfg(5, 3, 1, 2.0);
  CHECK(cfg.flat_dim() == 3);
  CHECK(cfg.normal_dim() == 2);
  CHECK(cfg.with_radius(4.0).u() == 4.0);
}

TEST_CASE("klein radius curvature scaling is exact") {
  for (double K : {-0.25, -1.0, -4.0, -1e-6, -37.0}) {
    const double s = std::sqrt(-K);
    for (double x : {1e-8, 0.1, 0.5, 1.0, 3.0, 20.0}) {
      CHECK(klein_radius(Curvature(K), x) * s ==
            doctest::Approx(klein_radius(Curvature::unit(), s * x)).epsilon(1e-14));
    }
  }
  CHECK_THROWS_AS(klein_radius(Curvature::euclidean(), 1.0), CurvatureModeError);
  CHECK_THROWS_AS(klein_radius(Curvature::unit(), -1.0), DomainError);
}

TEST_CASE("klein radius inverse") {
  const Curvature K(-2.0);
  for (double x : {0.0, 0.01, 0.7, 2.5}) {
    CHECK(klein_radius_inv(K, klein_radius(K, x)) == doctest::Approx(x).epsilon(1e-12));
  }
  // near the ball boundary the round trip is ill conditioned: tanh(s x) = 1 - 2e-11
  CHECK(klein_radius_inv(K, klein_radius(K, 9.0)) == doctest::Approx(9.0).epsilon(1e-5));
  CHECK_THROWS_AS(klein_radius_inv(K, 1.0 / std::sqrt(2.0)), DomainError);
  CHECK_THROWS_AS(klein_radius_inv(K, -0.1), DomainError);
}

TEST_CASE("klein distance from the origin is the inverse klein radius") {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> normal;
  for (double K : {-1.0, -0.3, -5.0}) {
    const Curvature c(K);
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd y(4);
      for (int i = 0; i < 4; ++i) y(i) = normal(gen);
      y *= (0.999 * c.ball_radius()) * std::abs(std::tanh(normal(gen))) / y.norm();
      const Eigen::VectorXd o = Eigen::VectorXd::Zero(4);
      CHECK(klein_distance(c, o, y) == doctest::Approx(klein_radius_inv(c, y.norm())).epsilon(1e-12));
    }
  }
}

TEST_CASE("klein distance matches the arcosh form and is symmetric") {
  const Curvature K = Curvature::unit();
  Eigen::VectorXd x(3), y(3);
  x << 0.3, -0.2, 0.1;
  y << -0.1, 0.5, 0.4;
  const double c = (1 - x.dot(y)) / std::sqrt((1 - x.squaredNorm()) * (1 - y.squaredNorm()));
  CHECK(klein_distance(K, x, y) == doctest::Approx(std::acosh(c)).epsilon(1e-13));
  CHECK(klein_distance(K, x, y) == doctest::Approx(klein_distance(K, y, x)).epsilon(1e-14));
  CHECK(klein_distance(K, x, x) == doctest::Approx(0.0));
}

TEST_CASE("klein distance near the boundary") {
  const Curvature K = Curvature::unit();
  Eigen::VectorXd o = Eigen::VectorXd::Zero(2), y(2);
  const double eps = 1e-12;
  y << 1.0 - eps, 0.0;
  // artanh(1 - eps) = 0.5 log((2 - eps) / eps)
  CHECK(klein_distance(K, o, y) == doctest::Approx(0.5 * std::log((2 - eps) / eps)).epsilon(1e-6));
  Eigen::VectorXd z(2);
  z << 0.0, 1.0 - eps;
  // two near-boundary points at right angles are far apart
  CHECK(klein_distance(K, y, z) > 2 * klein_distance(K, o, y) - 1.0);
  Eigen::VectorXd out(2);
  out << 1.0, 0.0;
  CHECK_THROWS_AS(klein_distance(K, o, out), DomainError);
}

TEST_CASE("log cosh and log sinh do not overflow") {
  CHECK(log_cosh(0.0) == 0.0);
  CHECK(log_cosh(2.0) == doctest::Approx(std::log(std::cosh(2.0))).epsilon(1e-15));
  CHECK(log_cosh(1000.0) == doctest::Approx(1000.0 - std::log(2.0)).epsilon(1e-15));
  CHECK(log_cosh(-25.0) == doctest::Approx(std::log(std::cosh(25.0))).epsilon(1e-15));
  CHECK(log_sinh(3.0) == doctest::Approx(std::log(std::sinh(3.0))).epsilon(1e-15));
  CHECK(log_sinh(800.0) == doctest::Approx(800.0 - std::log(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(log_sinh(0.0), DomainError);
}
