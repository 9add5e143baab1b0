#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "hyperflats/quadrature.hpp"

using namespace hyperflats;
using namespace hyperflats::quadrature;
using std::numbers::pi;

TEST_CASE("linear integrand") {
  const auto r = integrate_adaptive([](double z) { return z; }, 0.0, 1.0);
  CHECK(std::abs(r.value - 0.5) <= 1e-12);
  CHECK(r.converged);
  CHECK(r.evaluations >= 1);
  CHECK(r.error_estimate >= 0.0);
}

TEST_CASE("arcsine singularity at the upper endpoint") {
  // Endpoint-aware form: 1 - z^2 = (b - z)(1 + z) without cancellation.
  const auto r = integrate_adaptive(
      [](double z, double, double to_b) { return 1.0 / std::sqrt(to_b * (1.0 + z)); }, 0.0, 1.0);
  CHECK(std::abs(r.value - pi / 2) <= 1e-9);
}

TEST_CASE("x-only singular integrand reports an honest error") {
  // 1 - z*z loses everything below 1e-16, so 1e-9 is out of reach; the
  // estimate must say so rather than claim convergence.
  const auto r = try_integrate_adaptive([](double z) { return 1.0 / std::sqrt(1.0 - z * z); }, 0.0,
                                        1.0, Tolerance{1e-9, 1e-12, 2000});
  CHECK(std::abs(r.value - pi / 2) <= r.error_estimate);
  CHECK(std::abs(r.value - pi / 2) <= 1e-7);
  CHECK_THROWS_AS(integrate_adaptive([](double z) { return 1.0 / std::sqrt(1.0 - z * z); }, 0.0, 1.0),
                  NonConvergenceError);
}

TEST_CASE("cosh sinh antiderivative") {
  const double u = 1.3;
  const auto r = integrate_adaptive([](double s) { return std::cosh(s) * std::sinh(s); }, 0.0, u);
  CHECK(std::abs(r.value - 0.5 * std::sinh(u) * std::sinh(u)) <= 1e-12);
}

TEST_CASE("polynomials up to degree 10 are exact") {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int degree = 0; degree <= 10; ++degree) {
    std::vector<double> c(degree + 1);
    for (double& x : c) x = coef(gen);
    auto poly = [&](double x) {
      double v = 0.0;
      for (int k = degree; k >= 0; --k) v = v * x + c[k];
      return v;
    };
    double exact = 0.0;
    for (int k = 0; k <= degree; ++k) exact += c[k] / (k + 1);
    const auto r = integrate_adaptive(poly, 0.0, 1.0);
    CHECK(std::abs(r.value - exact) <= 1e-13 * std::max(1.0, std::abs(exact)));
  }
}

TEST_CASE("integrands are never evaluated at the endpoints") {
  double a = 0.25, b = 2.0;
  bool touched = false;
  auto f = [&](double x) {
    if (x <= a || x >= b) touched = true;
    return std::pow(x - a, -0.7) + std::pow(b - x, -0.4);
  };
  const auto r = try_integrate_adaptive(f, a, b, Tolerance{1e-8, 1e-12, 2000});
  CHECK_FALSE(touched);
  const double exact = std::pow(b - a, 0.3) / 0.3 + std::pow(b - a, 0.6) / 0.6;
  CHECK(std::abs(r.value - exact) <= std::max(r.error_estimate, 1e-6 * exact));
}

TEST_CASE("algebraic endpoint singularities") {
  const auto r1 = integrate_adaptive([](double x) { return std::log(x); }, 0.0, 1.0);
  CHECK(std::abs(r1.value + 1.0) <= 1e-9);
  const auto r2 = integrate_adaptive([](double x) { return std::pow(x, -0.9); }, 0.0, 1.0);
  CHECK(std::abs(r2.value - 10.0) <= 1e-8);
}

TEST_CASE("breakpoints at a kink") {
  const double kink = 1.0 / 3.0;
  auto f = [&](double x) { return std::abs(x - kink); };
  const double exact = 0.5 * (kink * kink + (1 - kink) * (1 - kink));
  const std::vector<double> br{kink};
  const auto r = integrate_adaptive(f, 0.0, 1.0, {}, br);
  CHECK(std::abs(r.value - exact) <= 1e-14);
  CHECK(r.evaluations == 30);  // one panel on each side suffices
}

TEST_CASE("empty interval and invalid input") {
  CHECK(integrate_adaptive([](double) { return 1.0; }, 2.0, 2.0).value == 0.0);
  CHECK_THROWS_AS(integrate_adaptive([](double) { return 1.0; }, 1.0, 0.0), DomainError);
  CHECK_THROWS_AS(integrate_adaptive([](double) { return 1.0; }, 0.0, 1.0, Tolerance{0.0, 1e-12, 10}),
                  DomainError);
  CHECK_THROWS_AS(integrate_adaptive([](double) { return 1.0; }, 0.0, 1.0, Tolerance{1e-9, 1e-12, 0}),
                  DomainError);
  CHECK_THROWS_AS(integrate_adaptive([](double x) { return (x > 0.4 && x < 0.6) ? NAN : 1.0; }, 0.0, 1.0),
                  NumericalError);
}

TEST_CASE("subdivision budget exhaustion carries the partial result") {
  auto f = [](double x) { return 1.0 / std::sqrt(std::abs(x - 0.3)); };
  try {
    integrate_adaptive(f, 0.0, 1.0, Tolerance{1e-12, 1e-15, 3});
    FAIL("expected NonConvergenceError");
  } catch (const NonConvergenceError& e) {
    CHECK(e.partial().evaluations > 0);
    CHECK_FALSE(e.partial().converged);
    CHECK(e.partial().error_estimate > 0.0);
    CHECK_FALSE(e.outer_point().has_value());
  }
}

TEST_CASE("log-space integrals beyond double range") {
  const auto r = integrate_adaptive_log([](double x) { return 800.0 * x; }, 0.0, 1.0);
  CHECK(r.log_value == doctest::Approx(800.0 + std::log(-std::expm1(-800.0) / 800.0)).epsilon(1e-13));
  const auto s = integrate_adaptive_log([](double x) { return -2000.0 * x - 700.0; }, 0.0, 1.0);
  CHECK(s.log_value == doctest::Approx(-700.0 - std::log(2000.0)).epsilon(1e-13));
  CHECK(s.converged);
  CHECK(s.rel_error <= 1e-9);
  const auto g = integrate_adaptive_log([](double x) { return -1000.0 * x * x; }, 0.0, 1.0);
  CHECK(g.log_value == doctest::Approx(std::log(0.5 * std::sqrt(pi / 1000.0))).epsilon(1e-13));
}

TEST_CASE("log-space integrand with -inf values") {
  const auto r = integrate_adaptive_log(
      [](double x) { return x < 0.5 ? -std::numeric_limits<double>::infinity() : 0.0; }, 0.0, 1.0,
      {}, std::vector<double>{0.5});
  CHECK(r.value() == doctest::Approx(0.5).epsilon(1e-14));
  const auto z = integrate_adaptive_log([](double) { return -std::numeric_limits<double>::infinity(); },
                                        0.0, 1.0);
  CHECK(z.value() == 0.0);
  CHECK(z.converged);
}

TEST_CASE("iterated integrals") {
  auto one = [](double, double) { return 1.0; };
  CHECK(integrate_iterated_2d(one, 0.0, 1.0, [](double) { return 1.0; }).value ==
        doctest::Approx(1.0).epsilon(1e-13));
  CHECK(integrate_iterated_2d([](double r, double z) { return r * z; }, 0.0, 1.0,
                              [](double) { return 1.0; })
            .value == doctest::Approx(0.25).epsilon(1e-13));
  const auto upper = [](double r) { return std::min(1.0, 0.5 / r); };
  const double exact = 0.5 + 0.5 * std::log(2.0);
  const auto kinked = integrate_iterated_2d(one, 0.0, 1.0, upper, {}, std::vector<double>{0.5});
  CHECK(std::abs(kinked.value - exact) <= 1e-12);
  const auto unaided = integrate_iterated_2d(one, 0.0, 1.0, upper);
  CHECK(std::abs(unaided.value - exact) <= 1e-8);
}

TEST_CASE("iterated log-space integral") {
  const auto r = integrate_iterated_2d_log([](double r, double z) { return std::log(r) + std::log(z); },
                                           0.0, 1.0, [](double) { return 1.0; });
  CHECK(r.value() == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("inner failure reports the outer abscissa") {
  // 1/z is not integrable at 0, so every inner integral fails.
  auto g = [](double, double z) { return 1.0 / z; };
  try {
    integrate_iterated_2d(g, 0.0, 1.0, [](double) { return 1.0; });
    FAIL("expected NonConvergenceError");
  } catch (const NonConvergenceError& e) {
    REQUIRE(e.outer_point().has_value());
    CHECK(*e.outer_point() > 0.0);
    CHECK(*e.outer_point() < 1.0);
  }
}

TEST_CASE("log kernel values") {
  const Curvature K = Curvature::unit();
  const double expected = std::log(0.25) - 0.5 * std::log(0.75) - 2.0 * std::log(0.9375);
  CHECK(log_kernel(3, 2, K, 0.5, 0.5) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(log_kernel(3, 2, K, 0.5, 0.0) == -std::numeric_limits<double>::infinity());
  CHECK(log_kernel(3, 2, K, 0.5, 0.5, 0.5) == doctest::Approx(expected).epsilon(1e-14));
  CHECK_THROWS_AS(log_kernel(3, 2, K, 0.5, 1.5), DomainError);
  CHECK_THROWS_AS(log_kernel(3, 2, K, 1.5, 0.9), DomainError);
  CHECK(std::isfinite(log_kernel(10000, 2, K, 0.999, 0.999)));
}

TEST_CASE("log kernel agrees with direct evaluation for d up to 30") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> unif(0.01, 0.99);
  for (int d = 2; d <= 30; ++d) {
    for (int q = 1; q < d; q += 3) {
      const double Kval = -unif(gen) * 3.0;
      const Curvature K(Kval);
      const double z = unif(gen);
      const double r = unif(gen) / (z * std::sqrt(-Kval)) * 0.99;
      const double direct = std::pow(z, q) * std::pow(1 - z * z, 0.5 * (d - q) - 1) *
                            std::pow(1 + Kval * r * r * z * z, -0.5 * (d + 1));
      CHECK(std::exp(log_kernel(d, q, K, r, z)) == doctest::Approx(direct).epsilon(1e-12));
    }
  }
}

namespace {
// The exponentiated kernel at fixed r, with exact 1 - z.
struct KernelAt {
  int d, q;
  Curvature K;
  double r;
  double operator()(double z, double, double to_b) const {
    return std::exp(log_kernel(d, q, K, r, z, to_b));
  }
};
}  // namespace

TEST_CASE("splitting invariance on the kernel") {
  const KernelAt f{5, 3, Curvature::unit(), 0.6};
  const auto whole = integrate_adaptive(f, 0.0, 1.0);
  const double mid = 0.37;
  const auto left = integrate_adaptive([&](double z) { return std::exp(log_kernel(5, 3, f.K, f.r, z)); },
                                       0.0, mid);
  const auto right = integrate_adaptive(
      [&](double z, double, double to_b) { return f(z, 0.0, to_b); }, mid, 1.0);
  CHECK(std::abs(whole.value - (left.value + right.value)) <=
        whole.error_estimate + left.error_estimate + right.error_estimate + 1e-15);
}

TEST_CASE("error estimates are honest on the kernel family") {
  const Tolerance loose{1e-6, 1e-12, 2000};
  const Tolerance tight{1e-7, 1e-13, 2000};
  for (auto [d, q] : {std::pair{3, 2}, {4, 3}, {5, 3}, {6, 2}, {12, 5}, {40, 3}}) {
    for (double r : {0.3, 0.9}) {
      const KernelAt f{d, q, Curvature::unit(), r};
      const auto coarse = integrate_adaptive(f, 0.0, 1.0, loose);
      const auto ref = integrate_adaptive(f, 0.0, 1.0, tight);
      CHECK(std::abs(coarse.value - ref.value) <= 10.0 * coarse.error_estimate + 1e-15);
    }
  }
}

TEST_CASE("tolerances below roundoff end unconverged without exhausting the budget") {
  Tolerance tol;
  tol.rel_tol = 1e-18;
  tol.abs_tol = 1e-300;
  auto kinked = [](double x) { return std::fabs(x - 1.0 / 3.0); };
  const QuadResult r = try_integrate_adaptive(kinked, 0.0, 1.0, tol);
  CHECK_FALSE(r.converged);
  CHECK(r.value == doctest::Approx(5.0 / 18.0).epsilon(1e-13));
  CHECK(r.evaluations < 30 * 200);
  CHECK_THROWS_AS(integrate_adaptive(kinked, 0.0, 1.0, tol), NonConvergenceError);
  CHECK(tol.tightened(50).rel_tol == tol.rel_tol);
  CHECK(Tolerance{}.tightened(50).rel_tol == doctest::Approx(2e-11));
}
