#include "hyperflats/quadrature.hpp"

#include <fmt/format.h>

namespace hyperflats::quadrature {

void Tolerance::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || max_subdivisions < 1) {
    throw DomainError(fmt::format(
        "invalid tolerance (rel_tol={}, abs_tol={}, max_subdivisions={})", rel_tol, abs_tol,
        max_subdivisions));
  }
}

Tolerance Tolerance::tightened(double factor) const {
  const double floor = std::min(rel_tol, kRoundoffRelTol);
  return {std::max(rel_tol / factor, floor), abs_tol / factor, max_subdivisions};
}

QuadResult LogQuadResult::linear() const {
  const double v = value();
  return {v, rel_error * v, evaluations, converged};
}

NonConvergenceError::NonConvergenceError(const std::string& what, QuadResult partial,
                                         std::optional<double> outer_point)
    : Error(outer_point ? fmt::format("{} (value={}, error={}, at r={})", what, partial.value,
                                      partial.error_estimate, *outer_point)
                        : fmt::format("{} (value={}, error={})", what, partial.value,
                                      partial.error_estimate)),
      partial_(partial),
      outer_point_(outer_point) {}

namespace {

double kernel_impl(int d, int q, Curvature K, double r, double z, double log_one_minus_z2) {
  if (!(z >= 0.0) || !(z <= 1.0)) throw DomainError(fmt::format("log_kernel: z={} outside [0,1]", z));
  double out = 0.0;
  if (z == 0.0) return -std::numeric_limits<double>::infinity();
  out += q * std::log(z);
  const double e = 0.5 * (d - q) - 1.0;
  if (e != 0.0) out += e * log_one_minus_z2;
  if (K.is_hyperbolic()) {
    const double t = K.value() * r * r * z * z;
    if (!(t > -1.0)) throw DomainError("log_kernel: r z outside the Klein ball");
    out -= 0.5 * (d + 1) * std::log1p(t);
  }
  return out;
}

}  // namespace

double log_kernel(int d, int q, Curvature K, double r, double z) {
  return kernel_impl(d, q, K, r, z, std::log1p(-z) + std::log1p(z));
}

double log_kernel(int d, int q, Curvature K, double r, double z, double one_minus_z) {
  return kernel_impl(d, q, K, r, z, std::log(one_minus_z) + std::log1p(z));
}

}  // namespace hyperflats::quadrature
