#pragma once

// Closed-form quantities for the intersection of a random q-flat L through the
// origin with a random k-flat E hitting the ball of radius u, k = d - q + gamma:
// Crofton constants, the intersection probability, the law of the distance
// from the origin to E cap L (a density plus an atom at +infinity), its
// moments, Euclidean baselines and the critical high-dimensional constant rho.

#include <utility>
#include <vector>

#include "hyperflats/quadrature.hpp"
#include "hyperflats/special_functions.hpp"

namespace hyperflats::analytic {

/// How a hyperbolic quantity is evaluated. UnitCurvature first rescales to
/// K = -1 (u -> sqrt(-K) u), so the outer interval is [0, 1]. Direct integrates
/// at the given curvature; it exists to cross-check the rescaling.
enum class Route { UnitCurvature, Direct };

struct Options {
  quadrature::Tolerance tol{};
  Route route = Route::UnitCurvature;
};

/// A probability together with its quadrature error estimate.
struct Estimate {
  double value = 0.0;
  double error_estimate = 0.0;
  long evaluations = 0;
};

struct MomentResult {
  enum class Kind { Finite, Divergent };
  Kind kind = Kind::Divergent;
  double value = 0.0;  // meaningful only when finite
  double alpha = 0.0;
  bool conditional = false;
  /// Relative contribution of the last tail doubling (0 when no integral was needed).
  double tail_relative_change = 0.0;

  bool is_finite() const { return kind == Kind::Finite; }
};

/// Regime of K(d) as d grows: K d^2 -> 0 (sub), K d -> -inf (super), K d -> -kappa.
class PhaseMode {
 public:
  enum class Mode { Subcritical, Supercritical, Critical };

  static PhaseMode subcritical() { return PhaseMode(Mode::Subcritical, 0.0); }
  static PhaseMode supercritical() { return PhaseMode(Mode::Supercritical, 0.0); }
  /// Throws DomainError unless kappa > 0.
  static PhaseMode critical(double kappa);

  Mode mode() const { return mode_; }
  double kappa() const { return kappa_; }

 private:
  PhaseMode(Mode m, double kappa) : mode_(m), kappa_(kappa) {}
  Mode mode_;
  double kappa_;
};

/// Measure of the k-flats hitting the ball of radius u.
/// Requires 0 <= k <= d-1 and u > 0.
double crofton_constant(int d, int k, double u, Curvature K, const quadrature::Tolerance& tol = {});
double log_crofton_constant(int d, int k, double u, Curvature K,
                            const quadrature::Tolerance& tol = {});

/// (cfg with u -> sqrt(-K) u, K = -1). Densities scale by sqrt(-K), distances
/// by 1/sqrt(-K).
std::pair<FlatConfig, Curvature> reduce_to_unit_curvature(const FlatConfig& cfg, Curvature K);

/// P(E cap L != empty) for K < 0.
double intersection_probability(const FlatConfig& cfg, Curvature K, const Options& opt = {});
Estimate intersection_probability_estimate(const FlatConfig& cfg, Curvature K,
                                           const Options& opt = {});
/// log P(E cap L != empty); finite where the probability underflows.
double log_intersection_probability(const FlatConfig& cfg, Curvature K, const Options& opt = {});

/// In flat space E and L always meet.
double euclidean_intersection_probability(const FlatConfig& cfg);

/// P(dist(o, E cap L) <= delta), counting only finite distances (so the
/// limit as delta -> infinity is the intersection probability).
double distance_cdf(const FlatConfig& cfg, Curvature K, double delta, const Options& opt = {});
Estimate distance_cdf_estimate(const FlatConfig& cfg, Curvature K, double delta,
                               const Options& opt = {});

/// Density of the absolutely continuous part of the distance law, delta > 0.
double distance_density(const FlatConfig& cfg, Curvature K, double delta, const Options& opt = {});
/// log of distance_density; -inf where the density vanishes.
double log_distance_density(const FlatConfig& cfg, Curvature K, double delta,
                            const Options& opt = {});

/// Mass 1 - p of the atom at +infinity (E and L disjoint).
double atom_mass(const FlatConfig& cfg, Curvature K, const Options& opt = {});

/// Integral of the density over (0, infinity), by the tail-doubling scheme.
/// Agrees with intersection_probability when both formulas are right.
double absolutely_continuous_mass(const FlatConfig& cfg, Curvature K, const Options& opt = {});

/// E[dist^alpha] (with the atom at +infinity) or E[dist^alpha | E cap L != empty].
/// Divergence is decided from alpha, q and gamma alone.
MomentResult moment(const FlatConfig& cfg, Curvature K, double alpha, bool conditional,
                    const Options& opt = {});

/// Distance CDF in flat space (K = 0), where the law has no atom.
double euclidean_distance_cdf(const FlatConfig& cfg, double delta,
                              const quadrature::Tolerance& tol = {});

/// The limit of the intersection probability when K(d) d -> -kappa.
double critical_constant_rho(double u, int q, int gamma, double kappa,
                             const quadrature::Tolerance& tol = {});

/// Limit of the intersection probability as d -> infinity in the given regime.
double phase_limit(const PhaseMode& mode, double u, int q, int gamma,
                   const quadrature::Tolerance& tol = {});

/// Tabulated distance CDF for fast repeated evaluation.
///
/// The table stores cdf values at nodes and uses the density as the slope, so
/// evaluation is a cubic Hermite interpolation. Beyond the last node the CDF is
/// taken as the intersection probability.
class CdfTable {
 public:
  CdfTable(const FlatConfig& cfg, Curvature K, int nodes = 400, const Options& opt = {});

  /// Unconditional CDF (tends to probability()).
  double operator()(double delta) const;
  /// CDF conditional on E cap L != empty.
  double conditional(double delta) const { return (*this)(delta) / p_; }
  double probability() const { return p_; }
  double max_delta() const { return delta_.back(); }

 private:
  std::vector<double> delta_;
  std::vector<double> cdf_;
  std::vector<double> slope_;
  double p_ = 0.0;
};

}  // namespace hyperflats::analytic
