#include "hyperflats/monte_carlo.hpp"

#include <cmath>
// Boost 1.74 pchip calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>
#include <fmt/format.h>
#include <thread>

#include "hyperflats/quadrature.hpp"

namespace hyperflats::monte_carlo {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t trial)
    : engine_(splitmix64(splitmix64(seed) ^ splitmix64(trial + 0x632be59bd9b4e019ULL))) {}

double RngStream::uniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

linalg::Basis sample_central_subspace(int d, int q, RngStream& rng) {
  if (q < 1 || q > d - 1) {
    throw DomainError(fmt::format("sample_central_subspace: require 1 <= q <= d-1 (got d={}, q={})", d, q));
  }
  for (;;) {
    Eigen::MatrixXd G(d, q);
    for (int j = 0; j < q; ++j) {
      for (int i = 0; i < d; ++i) G(i, j) = rng.normal();
    }
    try {
      return linalg::orthonormalize(G);
    } catch (const RankError&) {
      // probability zero; draw again
    }
  }
}

struct RadialSampler::Table {
  boost::math::interpolators::pchip<std::vector<double>> inverse;
};

RadialSampler::RadialSampler(const FlatConfig& cfg, Curvature K)
    : d_(cfg.d()), m_(cfg.normal_dim()), K_(K.value()), R_(klein_radius(K, cfg.u())) {
  auto logf = [this](double r) { return log_target(r); };
  log_norm_ = quadrature::integrate_adaptive_log(logf, 0.0, R_).log_value;
  const double log_envelope = -0.5 * (d_ + 1) * std::log1p(K_ * R_ * R_) + m_ * std::log(R_) - std::log(m_);
  acceptance_ = std::exp(log_norm_ - log_envelope);
  if (acceptance_ >= kTableThreshold) return;

  // Half the nodes uniform in r, half uniform in the top kLayer units of the
  // log-weight lambda(r) = -(d+1)/2 log(1 + K r^2), where the mass concentrates.
  constexpr double kLayer = 40.0;
  const int half = kTableSize / 2;
  std::vector<double> nodes;
  nodes.reserve(kTableSize + 1);
  const double lam_max = -0.5 * (d_ + 1) * std::log1p(K_ * R_ * R_);
  const double lam_min = std::max(0.0, lam_max - kLayer);
  for (int i = 0; i <= half; ++i) nodes.push_back(R_ * i / half);
  for (int i = 1; i < half; ++i) {
    const double lam = lam_min + (lam_max - lam_min) * i / half;
    nodes.push_back(std::sqrt(-std::expm1(-2.0 * lam / (d_ + 1)) / -K_));
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  std::vector<double> F{0.0}, r{0.0};
  double acc = 0.0;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const auto seg = quadrature::integrate_adaptive_log(logf, nodes[i - 1], nodes[i]);
    acc += std::exp(seg.log_value - log_norm_);
    if (acc > F.back()) {
      F.push_back(acc);
      r.push_back(nodes[i]);
    }
  }
  for (double& f : F) f /= acc;
  F.back() = 1.0;
  table_ = std::make_shared<const Table>(Table{{std::move(F), std::move(r)}});
}

double RadialSampler::log_target(double r) const {
  const double radial = m_ == 1 ? 0.0 : (m_ - 1) * std::log(r);
  return radial - 0.5 * (d_ + 1) * std::log1p(K_ * r * r);
}

double RadialSampler::sample(RngStream& rng, long& proposals) const {
  if (table_) {
    ++proposals;
    return std::clamp(table_->inverse(rng.uniform()), 0.0, R_);
  }
  const double log_gR = -0.5 * (d_ + 1) * std::log1p(K_ * R_ * R_);
  for (;;) {
    ++proposals;
    const double r = R_ * std::pow(rng.uniform(), 1.0 / m_);
    const double log_accept = -0.5 * (d_ + 1) * std::log1p(K_ * r * r) - log_gR;
    if (std::log(rng.uniform()) <= log_accept) return r;
  }
}

double RadialSampler::cdf(double r) const {
  if (!(r > 0.0)) return 0.0;
  if (r >= R_) return 1.0;
  const auto res = quadrature::integrate_adaptive_log([this](double t) { return log_target(t); }, 0.0, r);
  return std::min(1.0, std::exp(res.log_value - log_norm_));
}

geometry::AffineFlat sample_hitting_flat(const FlatConfig& cfg, const RadialSampler& radial,
                                         RngStream& rng, long& proposals) {
  const int m = cfg.normal_dim();
  linalg::Basis W = sample_central_subspace(cfg.d(), m, rng);
  Eigen::VectorXd theta(m);
  double norm = 0.0;
  do {
    for (int i = 0; i < m; ++i) theta(i) = rng.normal();
    norm = theta.norm();
  } while (!(norm > 0.0));
  const double r = radial.sample(rng, proposals);
  const Eigen::VectorXd x = W.matrix() * (theta * (r / norm));
  return geometry::AffineFlat::from_normal_offset(std::move(W), x);
}

geometry::AffineFlat sample_hitting_flat(const FlatConfig& cfg, Curvature K, RngStream& rng) {
  const RadialSampler radial(cfg, K);
  long proposals = 0;
  return sample_hitting_flat(cfg, radial, rng, proposals);
}

std::vector<TrialOutcome> run_trials(const FlatConfig& cfg, Curvature K, std::uint64_t seed,
                                     std::uint64_t first, std::uint64_t count, unsigned threads) {
  K.require_hyperbolic("run_trials");
  const RadialSampler radial(cfg, K);
  std::vector<TrialOutcome> out(count);
  auto work = [&](std::uint64_t lo, std::uint64_t hi) {
    for (std::uint64_t i = lo; i < hi; ++i) {
      RngStream rng(seed, first + i);
      const linalg::Basis L = sample_central_subspace(cfg.d(), cfg.q(), rng);
      TrialOutcome& t = out[i];
      const geometry::AffineFlat E = sample_hitting_flat(cfg, radial, rng, t.proposals);
      const auto hit = geometry::intersect_with_central_subspace(E, L, K);
      t.meets = hit.meets();
      t.distance = hit.hyper_dist;
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(count, 1)));
  if (threads <= 1) {
    work(0, count);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned t = 0; t < threads; ++t) {
    const std::uint64_t lo = count * t / threads, hi = count * (t + 1) / threads;
    pool.emplace_back([&, t, lo, hi] {
      try {
        work(lo, hi);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

Simulation simulate(const FlatConfig& cfg, Curvature K, long trials, std::uint64_t seed, unsigned threads) {
  if (trials < 1) throw DomainError(fmt::format("simulate: require trials >= 1 (got {})", trials));
  K.require_hyperbolic("simulate");
  const RadialSampler radial(cfg, K);
  const auto outcomes = run_trials(cfg, K, seed, 0, static_cast<std::uint64_t>(trials), threads);

  Simulation sim;
  auto& est = sim.estimate;
  auto& dist = sim.distribution;
  est.trials = dist.trials = trials;
  est.seed = dist.seed = seed;
  long proposals = 0;
  for (const auto& t : outcomes) {
    proposals += t.proposals;
    if (t.meets) {
      ++est.hits;
      dist.finite_samples.push_back(t.distance);
    } else {
      ++dist.empty_count;
    }
  }
  std::sort(dist.finite_samples.begin(), dist.finite_samples.end());
  est.p_hat = static_cast<double>(est.hits) / trials;
  est.std_err = std::sqrt(est.p_hat * (1.0 - est.p_hat) / trials);
  sim.diagnostics.proposals = proposals;
  sim.diagnostics.acceptance_rate = static_cast<double>(trials) / proposals;
  sim.diagnostics.expected_acceptance = radial.expected_acceptance();
  sim.diagnostics.inverse_cdf_table = radial.uses_table();
  return sim;
}

SimEstimate estimate_intersection_probability(const FlatConfig& cfg, Curvature K, long trials,
                                              std::uint64_t seed, unsigned threads) {
  return simulate(cfg, K, trials, seed, threads).estimate;
}

DistributionSummary simulate_distance_distribution(const FlatConfig& cfg, Curvature K, long trials,
                                                   std::uint64_t seed, unsigned threads) {
  return simulate(cfg, K, trials, seed, threads).distribution;
}

double ks_critical_value(std::size_t n, double alpha) {
  if (n == 0 || !(alpha > 0.0 && alpha < 1.0)) throw DomainError("ks_critical_value: need n >= 1, 0 < alpha < 1");
  return std::sqrt(-0.5 * std::log(0.5 * alpha)) / std::sqrt(static_cast<double>(n));
}

}  // namespace hyperflats::monte_carlo
