#pragma once

// Monte Carlo counterpart of the analytic law. L is a uniformly random
// q-dimensional linear subspace; E is a random (d - q + gamma)-flat drawn from
// the hyperbolic motion-invariant measure conditioned to hit the ball of
// radius u. In the Klein model E is given by a uniformly random normal space
// W of dimension m = q - gamma and an offset r theta in W with theta uniform on
// the unit sphere of W and r on [0, R(u)] with density proportional to
// r^{m-1} (1 + K r^2)^{-(d+1)/2}.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "hyperflats/klein_geometry.hpp"
#include "hyperflats/linalg.hpp"
#include "hyperflats/special_functions.hpp"

namespace hyperflats::monte_carlo {

/// Random stream of one trial, a pure function of (seed, trial index).
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t trial);

  double normal() { return normal_(engine_); }
  /// Uniform on the open interval (0, 1).
  double uniform();

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Orthonormal basis of a Haar-random q-dimensional subspace of R^d.
linalg::Basis sample_central_subspace(int d, int q, RngStream& rng);

/// Draws the distance-to-origin r of E in the Klein model.
///
/// Uses rejection from the r^{m-1} envelope, or inversion of a tabulated CDF
/// when the expected acceptance rate falls below kTableThreshold.
class RadialSampler {
 public:
  static constexpr double kTableThreshold = 0.05;
  static constexpr int kTableSize = 1024;

  RadialSampler(const FlatConfig& cfg, Curvature K);

  /// Returns r; `proposals` is incremented by the number of draws used.
  double sample(RngStream& rng, long& proposals) const;

  double max_radius() const { return R_; }
  /// Exact acceptance probability of the rejection step.
  double expected_acceptance() const { return acceptance_; }
  bool uses_table() const { return table_ != nullptr; }

  /// Normalized CDF of the target radial law, by quadrature.
  double cdf(double r) const;

 private:
  double log_target(double r) const;

  int d_, m_;
  double K_;
  double R_;
  double log_norm_;
  double acceptance_;
  struct Table;
  std::shared_ptr<const Table> table_;
};

/// Random flat E hitting the ball of radius u.
geometry::AffineFlat sample_hitting_flat(const FlatConfig& cfg, Curvature K, RngStream& rng);
geometry::AffineFlat sample_hitting_flat(const FlatConfig& cfg, const RadialSampler& radial,
                                         RngStream& rng, long& proposals);

struct TrialOutcome {
  bool meets = false;
  double distance = 0.0;  // hyperbolic, when meets
  long proposals = 0;
};

/// Outcomes of trials [first, first + count), in trial order. `threads` = 0
/// uses the hardware concurrency; results do not depend on it.
std::vector<TrialOutcome> run_trials(const FlatConfig& cfg, Curvature K, std::uint64_t seed,
                                     std::uint64_t first, std::uint64_t count, unsigned threads = 0);

struct SimEstimate {
  long trials = 0;
  long hits = 0;
  double p_hat = 0.0;
  double std_err = 0.0;
  std::uint64_t seed = 0;
};

struct DistributionSummary {
  std::vector<double> finite_samples;  // sorted
  long empty_count = 0;
  long trials = 0;
  std::uint64_t seed = 0;
};

struct SamplerDiagnostics {
  long proposals = 0;
  double acceptance_rate = 1.0;  // accepted / proposals
  double expected_acceptance = 1.0;
  bool inverse_cdf_table = false;
};

struct Simulation {
  SimEstimate estimate;
  DistributionSummary distribution;
  SamplerDiagnostics diagnostics;
};

/// Validates trials >= 1. K must be hyperbolic.
Simulation simulate(const FlatConfig& cfg, Curvature K, long trials, std::uint64_t seed,
                    unsigned threads = 0);

SimEstimate estimate_intersection_probability(const FlatConfig& cfg, Curvature K, long trials,
                                              std::uint64_t seed, unsigned threads = 0);
DistributionSummary simulate_distance_distribution(const FlatConfig& cfg, Curvature K, long trials,
                                                   std::uint64_t seed, unsigned threads = 0);

/// sup |F_n - F| for sorted samples.
template <class Cdf>
double ks_statistic(const std::vector<double>& sorted, Cdf&& F) {
  const double n = static_cast<double>(sorted.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = F(sorted[i]);
    worst = std::max({worst, f - i / n, (i + 1) / n - f});
  }
  return worst;
}

/// Asymptotic one-sample Kolmogorov-Smirnov critical value at level alpha.
double ks_critical_value(std::size_t n, double alpha);

}  // namespace hyperflats::monte_carlo
