#include "hyperflats/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numbers>

namespace hyperflats::analytic {

namespace {

using quadrature::LogQuadResult;
using quadrature::Tolerance;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// All hyperbolic evaluations go through one of these. Under the
// unit-curvature route the curvature is -1 and u is rescaled; `dist_scale`
// maps original distances to model distances.
struct Model {
  int d, q, gamma, m;
  Curvature K;
  double s;
  double u;
  double Ru;  // Klein radius of the hitting ball
  double dist_scale;
  double log_pref;
  Tolerance tol;

  Model(const FlatConfig& cfg, Curvature K0, const Options& opt)
      : d(cfg.d()), q(cfg.q()), gamma(cfg.gamma()), m(cfg.normal_dim()), K(Curvature::unit()),
        s(1.0), u(cfg.u()), Ru(0.0), dist_scale(1.0), log_pref(0.0), tol(opt.tol) {
    K0.require_hyperbolic("hyperbolic distance law");
    opt.tol.validate();
    if (opt.route == Route::UnitCurvature) {
      dist_scale = K0.scale();
      u = dist_scale * cfg.u();
    } else {
      K = K0;
      s = K0.scale();
    }
    Ru = std::tanh(s * u) / s;
    log_pref = log_constant_D(cfg) + log_sphere_surface(d - gamma) -
               log_crofton_constant(d, cfg.flat_dim(), u, K, tol);
  }

  double klein(double delta) const { return std::tanh(s * delta) / s; }

  double inner_upper(double r) const { return r <= Ru ? 1.0 : Ru / r; }

  // 1 - z = (1 - upper) + (upper - z), exact when upper is close to 1.
  double log_kernel_at(double r, double z, double to_upper) const {
    const double gap = r <= Ru ? 0.0 : (r - Ru) / r;
    return quadrature::log_kernel(d, q, K, r, z, gap + to_upper);
  }

  double log_radial(double r) const { return m == 1 ? 0.0 : (m - 1) * std::log(r); }

  // log of the inner z-integral at Klein radius r.
  double log_inner(double r, const Tolerance& t) const {
    const double up = inner_upper(r);
    const LogQuadResult res = quadrature::integrate_adaptive_log(
        [&](double z, double, double zb) { return log_kernel_at(r, z, zb); }, 0.0, up, t);
    return res.log_value;
  }

  // log of the double integral with outer range [0, R], plus its relative error.
  LogQuadResult log_outer(double R) const {
    std::vector<double> breaks;
    if (Ru < R) breaks.push_back(Ru);
    return quadrature::integrate_iterated_2d_log(
        [&](double r, double z, double, double zb) { return log_radial(r) + log_kernel_at(r, z, zb); },
        0.0, R, [&](double r) { return inner_upper(r); }, tol, breaks);
  }

  // log density at model distance x >= 0, in model units.
  double log_density_model(double x) const {
    const double r = klein(x);
    if (r == 0.0) {
      if (m > 1) return kNegInf;
      return log_pref + log_inner(0.0, tol);
    }
    return log_pref + log_radial(r) - 2.0 * log_cosh(s * x) + log_inner(r, tol);
  }
};

// Checks a probability-valued quadrature result against [0, 1].
double finalize_probability(double value, double err, const char* what) {
  if (std::isnan(value)) throw NumericalError(fmt::format("{}: result is NaN", what));
  if (value > 1.0) {
    if (value - 1.0 <= err) return 1.0;
    throw NumericalError(
        fmt::format("{}: value {} exceeds 1 by more than its error estimate {}", what, value, err));
  }
  if (value < 0.0) {
    if (-value <= err) return 0.0;
    throw NumericalError(fmt::format("{}: negative value {}", what, value));
  }
  return value;
}

// log of the integral of x^alpha f(x) over (0, inf), in model units, by
// integrating [0, 10], [10, 20], [20, 40], ... until a doubling contributes
// less than rel_tol of the total.
struct TailIntegral {
  double log_value;
  double last_relative_change;
};

TailIntegral log_moment_integral(const Model& mdl, double alpha) {
  auto logf = [&](double x) {
    const double lf = mdl.log_density_model(x);
    if (alpha == 0.0 || lf == kNegInf) return lf;
    return lf + alpha * std::log(x);
  };
  constexpr int kMaxDoublings = 12;
  double total = kNegInf;
  double lo = 0.0, hi = 10.0;
  double change = 1.0;
  for (int i = 0; i <= kMaxDoublings; ++i) {
    std::vector<double> breaks;
    if (mdl.u > lo && mdl.u < hi) breaks.push_back(mdl.u);
    const LogQuadResult seg = quadrature::integrate_adaptive_log(logf, lo, hi, mdl.tol, breaks);
    const double before = total;
    total = log_add(total, seg.log_value);
    change = (total == kNegInf) ? 0.0 : std::exp(seg.log_value - total);
    if (i > 0 && (change < mdl.tol.rel_tol || before == total)) {
      return {total, change};
    }
    lo = hi;
    hi *= 2.0;
  }
  throw quadrature::NonConvergenceError(
      fmt::format("moment tail did not settle by distance {}", lo),
      {std::exp(total), change * std::exp(total), 0, false});
}

}  // namespace

PhaseMode PhaseMode::critical(double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw DomainError(fmt::format("critical phase requires kappa > 0 (got {})", kappa));
  }
  return PhaseMode(Mode::Critical, kappa);
}

double log_crofton_constant(int d, int k, double u, Curvature K, const Tolerance& tol) {
  if (d < 1 || k < 0 || k > d - 1) {
    throw DomainError(fmt::format("crofton_constant: require 0 <= k <= d-1 (got d={}, k={})", d, k));
  }
  if (!(u > 0.0) || !std::isfinite(u)) {
    throw DomainError(fmt::format("crofton_constant: require u > 0 (got {})", u));
  }
  const int n = d - k;
  if (!K.is_hyperbolic()) return log_sphere_surface(n) + n * std::log(u) - std::log(n);
  const double s = K.scale();
  const auto res = quadrature::integrate_adaptive_log(
      [&](double t) {
        double v = k == 0 ? 0.0 : k * log_cosh(t);
        if (n > 1) v += (n - 1) * log_sinh(t);
        return v;
      },
      0.0, s * u, tol);
  return log_sphere_surface(n) - n * std::log(s) + res.log_value;
}

double crofton_constant(int d, int k, double u, Curvature K, const Tolerance& tol) {
  return std::exp(log_crofton_constant(d, k, u, K, tol));
}

std::pair<FlatConfig, Curvature> reduce_to_unit_curvature(const FlatConfig& cfg, Curvature K) {
  K.require_hyperbolic("reduce_to_unit_curvature");
  return {cfg.with_radius(K.scale() * cfg.u()), Curvature::unit()};
}

Estimate intersection_probability_estimate(const FlatConfig& cfg, Curvature K, const Options& opt) {
  const Model mdl(cfg, K, opt);
  const LogQuadResult I = mdl.log_outer(1.0 / mdl.s);
  const double p = std::exp(mdl.log_pref + I.log_value);
  const double err = p * I.rel_error;
  return {finalize_probability(p, err, "intersection_probability"), err, I.evaluations};
}

double intersection_probability(const FlatConfig& cfg, Curvature K, const Options& opt) {
  return intersection_probability_estimate(cfg, K, opt).value;
}

double log_intersection_probability(const FlatConfig& cfg, Curvature K, const Options& opt) {
  const Model mdl(cfg, K, opt);
  const double lp = mdl.log_pref + mdl.log_outer(1.0 / mdl.s).log_value;
  return std::min(lp, 0.0);
}

double euclidean_intersection_probability(const FlatConfig&) { return 1.0; }

Estimate distance_cdf_estimate(const FlatConfig& cfg, Curvature K, double delta, const Options& opt) {
  if (!(delta >= 0.0)) throw DomainError(fmt::format("distance_cdf: require delta >= 0 (got {})", delta));
  const Model mdl(cfg, K, opt);
  if (delta == 0.0) return {0.0, 0.0, 0};
  const double R = std::isinf(delta) ? 1.0 / mdl.s : mdl.klein(mdl.dist_scale * delta);
  const LogQuadResult I = mdl.log_outer(R);
  const double c = std::exp(mdl.log_pref + I.log_value);
  const double err = c * I.rel_error;
  return {finalize_probability(c, err, "distance_cdf"), err, I.evaluations};
}

double distance_cdf(const FlatConfig& cfg, Curvature K, double delta, const Options& opt) {
  return distance_cdf_estimate(cfg, K, delta, opt).value;
}

double log_distance_density(const FlatConfig& cfg, Curvature K, double delta, const Options& opt) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw DomainError(fmt::format("distance_density: require delta > 0 (got {})", delta));
  }
  const Model mdl(cfg, K, opt);
  return std::log(mdl.dist_scale) + mdl.log_density_model(mdl.dist_scale * delta);
}

double distance_density(const FlatConfig& cfg, Curvature K, double delta, const Options& opt) {
  return std::exp(log_distance_density(cfg, K, delta, opt));
}

double atom_mass(const FlatConfig& cfg, Curvature K, const Options& opt) {
  return 1.0 - intersection_probability(cfg, K, opt);
}

double absolutely_continuous_mass(const FlatConfig& cfg, Curvature K, const Options& opt) {
  const Model mdl(cfg, K, opt);
  return std::exp(log_moment_integral(mdl, 0.0).log_value);
}

MomentResult moment(const FlatConfig& cfg, Curvature K, double alpha, bool conditional,
                    const Options& opt) {
  if (std::isnan(alpha)) throw DomainError("moment: alpha is NaN");
  MomentResult out;
  out.alpha = alpha;
  out.conditional = conditional;
  const double lower = cfg.gamma() - cfg.q();
  const bool divergent = alpha <= lower || (!conditional && alpha > 0.0);
  if (divergent) {
    out.kind = MomentResult::Kind::Divergent;
    return out;
  }
  out.kind = MomentResult::Kind::Finite;
  if (alpha == 0.0) {
    out.value = 1.0;
    return out;
  }
  const Model mdl(cfg, K, opt);
  const TailIntegral ti = log_moment_integral(mdl, alpha);
  double lv = ti.log_value - alpha * std::log(mdl.dist_scale);
  if (conditional) lv -= mdl.log_pref + mdl.log_outer(1.0 / mdl.s).log_value;
  out.value = std::exp(lv);
  out.tail_relative_change = ti.last_relative_change;
  return out;
}

double euclidean_distance_cdf(const FlatConfig& cfg, double delta, const Tolerance& tol) {
  if (!(delta >= 0.0)) {
    throw DomainError(fmt::format("euclidean_distance_cdf: require delta >= 0 (got {})", delta));
  }
  if (delta == 0.0) return 0.0;
  const int d = cfg.d(), q = cfg.q(), m = cfg.normal_dim();
  const double u = cfg.u();
  const Curvature flat = Curvature::euclidean();
  // Integrating the radial variable first leaves
  //   D omega_{d-gamma} / omega_m * int_0^1 kernel(z) min(delta/u, 1/z)^m dz.
  const double ratio = delta / u;
  auto logf = [&](double z, double, double zb) {
    const double lk = quadrature::log_kernel(d, q, flat, 0.0, z, zb);
    const double cap = std::isinf(ratio) ? -std::log(z) : std::min(std::log(ratio), -std::log(z));
    return lk + m * cap;
  };
  std::vector<double> breaks;
  if (1.0 / ratio < 1.0) breaks.push_back(1.0 / ratio);
  const LogQuadResult I = quadrature::integrate_adaptive_log(logf, 0.0, 1.0, tol, breaks);
  const double c =
      std::exp(log_constant_D(cfg) + log_sphere_surface(d - cfg.gamma()) - log_sphere_surface(m) +
               I.log_value);
  return finalize_probability(c, c * I.rel_error, "euclidean_distance_cdf");
}

double critical_constant_rho(double u, int q, int gamma, double kappa, const Tolerance& tol) {
  if (!(u > 0.0) || !std::isfinite(u)) throw DomainError(fmt::format("rho: require u > 0 (got {})", u));
  if (q < 1 || gamma < 0 || gamma > q - 1) {
    throw DomainError(fmt::format("rho: require 0 <= gamma <= q-1 (got q={}, gamma={})", q, gamma));
  }
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw DomainError(fmt::format("rho: require kappa > 0 (got {})", kappa));
  }
  const int m = q - gamma;
  const auto A = quadrature::integrate_adaptive_log(
      [&](double s) { return 0.5 * kappa * s * s + (m == 1 ? 0.0 : (m - 1) * std::log(s)); }, 0.0, u,
      tol);
  // Inner variable w = r v on [0, 1]. For small r the integrand is a spike of
  // width ~ r at w = 0, so the inner range stops where the Gaussian factor
  // falls below exp(-(60 + q)).
  const double c = 0.5 * u * u * kappa;
  auto t_of = [](double r) { return (1.0 - r) * (1.0 + r) / (r * r); };
  const double cut = 60.0 + q;
  const auto B = quadrature::integrate_iterated_2d_log(
      [&](double r, double w) {
        return -(gamma + 2) * std::log(r) + q * std::log(w) - c * w * w * t_of(r);
      },
      0.0, 1.0, [&](double r) { return std::min(1.0, std::sqrt(cut / (c * t_of(r)))); }, tol);
  const double log_rho = log_sphere_surface(gamma + 1) -
                         0.5 * (gamma + 1) * std::log(2.0 * std::numbers::pi) +
                         (1 + q) * std::log(u) + 0.5 * (gamma + 1) * std::log(kappa) -
                         A.log_value + B.log_value;
  const double rho = std::exp(log_rho);
  return finalize_probability(rho, rho * (A.rel_error + B.rel_error), "critical_constant_rho");
}

double phase_limit(const PhaseMode& mode, double u, int q, int gamma, const Tolerance& tol) {
  switch (mode.mode()) {
    case PhaseMode::Mode::Subcritical:
      return 1.0;
    case PhaseMode::Mode::Supercritical:
      return 0.0;
    case PhaseMode::Mode::Critical:
      return critical_constant_rho(u, q, gamma, mode.kappa(), tol);
  }
  return 0.0;
}

CdfTable::CdfTable(const FlatConfig& cfg, Curvature K, int nodes, const Options& opt) {
  if (nodes < 2) throw DomainError("CdfTable: require at least 2 nodes");
  const Model mdl(cfg, K, opt);
  const double top = mdl.u + 25.0 / mdl.s;
  std::vector<double> x(nodes);
  for (int i = 0; i < nodes; ++i) x[i] = top * i / (nodes - 1);
  if (mdl.u < top) {
    x.push_back(mdl.u);
    std::sort(x.begin(), x.end());
    x.erase(std::unique(x.begin(), x.end()), x.end());
  }
  std::vector<double> logf(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) logf[i] = mdl.log_density_model(x[i]);

  auto density = [&](double t) { return mdl.log_density_model(t); };
  delta_.resize(x.size());
  cdf_.resize(x.size());
  slope_.resize(x.size());
  double acc = kNegInf;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i > 0) {
      const auto seg = quadrature::integrate_adaptive_log(density, x[i - 1], x[i], mdl.tol);
      acc = log_add(acc, seg.log_value);
    }
    delta_[i] = x[i] / mdl.dist_scale;
    cdf_[i] = std::exp(acc);
    slope_[i] = mdl.dist_scale * std::exp(logf[i]);
  }
  p_ = std::exp(mdl.log_pref + mdl.log_outer(1.0 / mdl.s).log_value);
}

double CdfTable::operator()(double delta) const {
  if (!(delta > 0.0)) return 0.0;
  if (delta >= delta_.back()) return p_;
  const auto it = std::upper_bound(delta_.begin(), delta_.end(), delta);
  const std::size_t i = static_cast<std::size_t>(it - delta_.begin()) - 1;
  const double h = delta_[i + 1] - delta_[i];
  const double t = (delta - delta_[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double v = (2 * t3 - 3 * t2 + 1) * cdf_[i] + (t3 - 2 * t2 + t) * h * slope_[i] +
                   (-2 * t3 + 3 * t2) * cdf_[i + 1] + (t3 - t2) * h * slope_[i + 1];
  return std::clamp(v, cdf_[i], cdf_[i + 1]);
}

}  // namespace hyperflats::analytic
