#pragma once

// Adaptive quadrature for the integrals of the intersection-probability
// formulas.
//
// The engine bisects Gauss-Kronrod 7/15 panels by largest error. A panel whose
// error stops shrinking under bisection (an endpoint singularity such as
// (1-z^2)^{-1/2}) is re-integrated with a tanh-sinh rule.
//
// Integrands may be called as f(x) or as f(x, x - a, b - x). The second form
// receives both endpoint distances computed without cancellation, so an
// integrand singular at b can evaluate (b - x)^p accurately even when x rounds
// to b. Log-space variants take log f and keep every panel with its own
// exponent shift, so integrands spanning hundreds of orders of magnitude
// (high dimension) neither underflow nor overflow.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hyperflats/errors.hpp"
#include "hyperflats/special_functions.hpp"

namespace hyperflats::quadrature {

/// Relative accuracy the engine refines toward at most; tighter requests end
/// unconverged instead of exhausting the subdivision budget.
inline constexpr double kRoundoffRelTol = 50.0 * std::numeric_limits<double>::epsilon();

struct Tolerance {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  int max_subdivisions = 2000;

  /// Throws DomainError unless rel_tol > 0, abs_tol > 0, max_subdivisions >= 1.
  void validate() const;
  /// Both tolerances divided by `factor`; rel_tol stops at kRoundoffRelTol.
  Tolerance tightened(double factor) const;
};

struct QuadResult {
  double value = 0.0;
  double error_estimate = 0.0;
  long evaluations = 0;
  /// error_estimate <= max(abs_tol, rel_tol * |value|).
  bool converged = false;
};

/// Result of a log-space integration of a positive integrand.
struct LogQuadResult {
  double log_value = -std::numeric_limits<double>::infinity();
  /// error_estimate / value.
  double rel_error = 0.0;
  long evaluations = 0;
  /// rel_error <= rel_tol (abs_tol has no meaning without a fixed scale).
  bool converged = false;

  double value() const { return std::exp(log_value); }
  QuadResult linear() const;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, QuadResult partial,
                      std::optional<double> outer_point = std::nullopt);

  const QuadResult& partial() const { return partial_; }
  /// The outer abscissa whose inner integral failed, for iterated integrals.
  std::optional<double> outer_point() const { return outer_point_; }

 private:
  QuadResult partial_;
  std::optional<double> outer_point_;
};

template <class F>
concept EndpointAwareIntegrand = std::invocable<F&, double, double, double>;

template <class F>
concept Integrand = EndpointAwareIntegrand<F> || std::invocable<F&, double>;

namespace detail {

struct Abscissa {
  double x;
  double from_a;  // x - a
  double to_b;    // b - x
  bool on_endpoint;  // x rounded to a or b
};

// Integrands that only see x are never called at an endpoint; such nodes
// read as non-finite and truncate the rule instead.
template <class F>
double call(F& f, const Abscissa& p) {
  if constexpr (EndpointAwareIntegrand<F>) {
    return f(p.x, p.from_a, p.to_b);
  } else {
    if (p.on_endpoint) return std::numeric_limits<double>::quiet_NaN();
    return f(p.x);
  }
}

// Sum of terms v_i * exp(s_i). In linear mode every shift is zero.
template <bool Log>
struct ScaledSum {
  double shift = Log ? -std::numeric_limits<double>::infinity() : 0.0;
  double sum = 0.0;

  void add(double s, double v) {
    if constexpr (!Log) {
      sum += v;
    } else {
      if (v == 0.0) return;
      if (s > shift) {
        sum = sum * std::exp(shift - s) + v;
        shift = s;
      } else {
        sum += v * std::exp(s - shift);
      }
    }
  }
  /// log |total|, or -inf.
  double log_abs() const { return sum == 0.0 ? -std::numeric_limits<double>::infinity()
                                             : std::log(std::fabs(sum)) + shift; }
  double linear() const { return Log ? sum * std::exp(shift) : sum; }
};

struct Panel {
  double la = 0.0;  // left edge minus a
  double w = 0.0;   // width
  double rb = 0.0;  // b minus right edge
  double shift = 0.0;
  double value = 0.0;  // in units of exp(shift)
  double error = 0.0;  // in units of exp(shift)
  bool stagnant = false;
  bool settled = false;

  double log_error() const {
    return error == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(error) + shift;
  }
};

inline Abscissa make_abscissa(double a, double b, double from_a, double to_b) {
  const double x = from_a <= to_b ? a + from_a : b - to_b;
  return {x, from_a, to_b, x <= a || x >= b};
}

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

// Evaluates one GK15 panel. Returns false when the integrand is not finite at
// a node (only tolerated next to an endpoint, where the caller falls back to
// tanh-sinh).
template <bool Log, class F>
bool gk15(F& f, double a, double b, Panel& p, long& evals) {
  const double hw = 0.5 * p.w;
  std::array<double, 15> raw{};
  std::array<Abscissa, 15> nodes{};
  nodes[0] = make_abscissa(a, b, p.la + hw, p.rb + hw);
  for (int j = 0; j < 7; ++j) {
    const double xk = kXgk[j];
    nodes[1 + 2 * j] = make_abscissa(a, b, p.la + hw * (1.0 - xk), p.rb + hw * (1.0 + xk));
    nodes[2 + 2 * j] = make_abscissa(a, b, p.la + hw * (1.0 + xk), p.rb + hw * (1.0 - xk));
  }
  bool finite = true;
  for (int i = 0; i < 15; ++i) {
    raw[i] = call(f, nodes[i]);
    if constexpr (Log) {
      if (std::isnan(raw[i]) || raw[i] == std::numeric_limits<double>::infinity()) finite = false;
    } else {
      if (!std::isfinite(raw[i])) finite = false;
    }
  }
  evals += 15;
  double shift = 0.0;
  if constexpr (Log) {
    shift = -std::numeric_limits<double>::infinity();
    for (double v : raw) {
      if (!std::isnan(v) && v != std::numeric_limits<double>::infinity()) shift = std::max(shift, v);
    }
    if (shift == -std::numeric_limits<double>::infinity()) shift = 0.0;
    for (double& v : raw) {
      v = (std::isnan(v) || v == std::numeric_limits<double>::infinity()) ? 0.0
                                                                           : std::exp(v - shift);
    }
  } else {
    for (double& v : raw) {
      if (!std::isfinite(v)) v = 0.0;
    }
  }
  const double fc = raw[0];
  double resk = kWgk[7] * fc;
  double resg = kWg[3] * fc;
  double resabs = std::fabs(resk);
  for (int j = 0; j < 7; ++j) {
    const double f1 = raw[1 + 2 * j], f2 = raw[2 + 2 * j];
    resk += kWgk[j] * (f1 + f2);
    resabs += kWgk[j] * (std::fabs(f1) + std::fabs(f2));
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  const double reskh = 0.5 * resk;
  double resasc = kWgk[7] * std::fabs(fc - reskh);
  for (int j = 0; j < 7; ++j) {
    resasc += kWgk[j] * (std::fabs(raw[1 + 2 * j] - reskh) + std::fabs(raw[2 + 2 * j] - reskh));
  }
  resabs *= hw;
  resasc *= hw;
  double err = std::fabs((resk - resg) * hw);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
  p.shift = shift;
  p.value = resk * hw;
  p.error = finite ? err : std::numeric_limits<double>::infinity();
  return finite;
}

// Tanh-sinh rule on one panel. Nodes are generated from their distance to the
// nearer panel edge so endpoint distances stay exact. A node where the
// integrand is not finite truncates that side, and the magnitude of the
// outermost kept term is charged to the error estimate as the lost tail.
template <bool Log, class F>
std::optional<Panel> tanh_sinh(F& f, double a, double b, const Panel& p, double rel_target,
                               double abs_target, long& evals) {
  constexpr double half_pi = 0.5 * std::numbers::pi;
  constexpr double t_max = 6.0;
  constexpr int max_level = 10;
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double hw = 0.5 * p.w;

  struct Side {
    double stop = t_max + 1e-9;  // nodes with t >= stop are skipped
    double last_kept = 0.0;
    double last_term_log = -inf;  // log |w f| at last_kept, panel width included
    bool truncated = false;
  };
  std::array<Side, 2> sides{};  // [0] left, [1] right
  ScaledSum<Log> sum;

  // Returns log |w(t) f(x(t))| (including hw), or nullopt when the node is unusable.
  auto term = [&](double t, bool right, double& contribution) -> std::optional<double> {
    const double y = half_pi * std::sinh(t);
    const double cy = std::cosh(y);
    const double near = hw / (std::exp(y) * cy);  // hw * (1 - tanh y)
    if (!(near > 0.0) || !std::isfinite(cy)) return std::nullopt;
    const double far = hw * (1.0 + std::tanh(y));
    const Abscissa node = right ? make_abscissa(a, b, p.la + far, p.rb + near)
                                : make_abscissa(a, b, p.la + near, p.rb + far);
    const double v = call(f, node);
    ++evals;
    const double log_w = std::log(half_pi * std::cosh(t)) - 2.0 * std::log(cy);
    if constexpr (Log) {
      if (std::isnan(v) || v == inf) return inf;
      contribution = v + log_w;
      return v + log_w + std::log(hw);
    } else {
      if (!std::isfinite(v)) return inf;
      contribution = std::exp(log_w) * v;
      return v == 0.0 ? -inf : log_w + std::log(std::fabs(v) * hw);
    }
  };
  auto add_node = [&](double t, bool right) {
    Side& side = sides[right ? 1 : 0];
    if (t >= side.stop) return;
    double contribution = 0.0;
    const auto lt = term(t, right, contribution);
    if (!lt) {
      side.stop = t;
      return;
    }
    if (*lt == inf) {
      side.stop = t;
      side.truncated = true;
      return;
    }
    if constexpr (Log) {
      sum.add(contribution, 1.0);
    } else {
      sum.add(0.0, contribution);
    }
    if (t > side.last_kept) {
      side.last_kept = t;
      side.last_term_log = *lt;
    }
  };

  {
    const Abscissa c = make_abscissa(a, b, p.la + hw, p.rb + hw);
    const double v = call(f, c);
    ++evals;
    if constexpr (Log) {
      if (std::isnan(v) || v == inf) return std::nullopt;
      sum.add(v + std::log(half_pi), 1.0);
    } else {
      if (!std::isfinite(v)) return std::nullopt;
      sum.add(0.0, half_pi * v);
    }
  }
  auto sweep = [&](double start, double step) {
    for (double t = start; t < t_max + 1e-9; t += step) {
      add_node(t, true);
      add_node(t, false);
    }
  };
  sweep(1.0, 1.0);

  double h = 1.0;
  double prev = sum.linear();
  double prev_log = sum.log_abs();
  double err = inf;  // relative in log mode, absolute (per unit hw) otherwise
  for (int level = 1; level <= max_level; ++level) {
    h *= 0.5;
    sweep(h, 2.0 * h);
    if constexpr (Log) {
      const double cur_log = sum.log_abs() + std::log(h);
      err = std::fabs(std::expm1(prev_log + std::log(2.0 * h) - cur_log));
      prev_log = sum.log_abs();
      if (level >= 3 && err <= rel_target) break;
    } else {
      const double cur = sum.linear() * h;
      err = std::fabs(cur - prev);
      prev = cur;
      if (level >= 3 && err * hw <= std::max(abs_target, rel_target * std::fabs(cur * hw))) break;
    }
  }

  Panel out = p;
  out.stagnant = false;
  out.settled = true;
  if constexpr (Log) {
    out.shift = sum.shift + std::log(h * hw);
    out.value = sum.sum;
    out.error = err * sum.sum;
  } else {
    out.shift = 0.0;
    out.value = sum.sum * h * hw;
    out.error = err * hw;
  }
  if ((sides[0].truncated && p.la != 0.0) || (sides[1].truncated && p.rb != 0.0)) {
    throw NumericalError("integrand is not finite inside the interval");
  }
  for (const Side& side : sides) {
    if (!side.truncated) continue;
    if (side.last_term_log == -inf && side.last_kept == 0.0) {
      out.error = inf;
    } else {
      out.error += std::exp(side.last_term_log - out.shift);
    }
  }
  return out;
}

struct EngineOutput {
  double log_value;
  double value;  // linear (may overflow in log mode)
  double log_error;
  double error;
  long evaluations;
  bool converged;
};

template <bool Log, class F>
EngineOutput adaptive(F& f, double a, double b, const Tolerance& tol,
                      std::span<const double> breakpoints) {
  tol.validate();
  if (!(a <= b) || !std::isfinite(a) || !std::isfinite(b)) {
    throw DomainError("integrate_adaptive: require finite a <= b");
  }
  long evals = 0;
  std::vector<Panel> panels;
  if (a == b) {
    return {-std::numeric_limits<double>::infinity(), 0.0, -std::numeric_limits<double>::infinity(),
            0.0, 0, true};
  }
  std::vector<double> cuts{a};
  std::vector<double> bp(breakpoints.begin(), breakpoints.end());
  std::sort(bp.begin(), bp.end());
  for (double c : bp) {
    if (c > cuts.back() && c < b) cuts.push_back(c);
  }
  cuts.push_back(b);
  const double width = b - a;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    Panel p;
    p.la = cuts[i] - a;
    p.rb = b - cuts[i + 1];
    p.w = cuts[i + 1] - cuts[i];
    if (!gk15<Log>(f, a, b, p, evals)) {
      if (p.la != 0.0 && p.rb != 0.0) throw NumericalError("integrand is not finite inside the interval");
      p.stagnant = true;
    }
    panels.push_back(p);
  }

  // Targets below roundoff are refined only down to the floor, then reported
  // unconverged.
  const double rel_tol = std::max(tol.rel_tol, kRoundoffRelTol);
  int subdivisions = 0;
  bool converged = false;
  ScaledSum<Log> total, total_err;
  for (;;) {
    total = {};
    total_err = {};
    for (const Panel& p : panels) {
      total.add(p.shift, p.value);
      total_err.add(p.shift, p.error);
    }
    const double err_log = total_err.log_abs();
    double target_log = std::log(rel_tol) + total.log_abs();
    if constexpr (!Log) target_log = std::max(target_log, std::log(tol.abs_tol));
    if (!(err_log > target_log)) {  // also true when both are -inf
      double requested_log = std::log(tol.rel_tol) + total.log_abs();
      if constexpr (!Log) requested_log = std::max(requested_log, std::log(tol.abs_tol));
      converged = !std::isnan(err_log) && !(err_log > requested_log);
      break;
    }
    if (subdivisions >= tol.max_subdivisions) break;
    ScaledSum<Log> settled_err;
    for (const Panel& p : panels) {
      if (p.settled) settled_err.add(p.shift, p.error);
    }
    if (settled_err.log_abs() > target_log) break;  // unreachable by further refinement

    auto worst = panels.end();
    double worst_log = -std::numeric_limits<double>::infinity();
    for (auto it = panels.begin(); it != panels.end(); ++it) {
      if (it->settled) continue;
      const double le = it->log_error();
      if (worst == panels.end() || le > worst_log) {
        worst = it;
        worst_log = le;
      }
    }
    if (worst == panels.end()) break;

    if (worst->stagnant) {
      // Share of the global target this panel must reach.
      const double rel_target = rel_tol / 10.0;
      const double abs_target = tol.abs_tol / 10.0;
      auto ts = tanh_sinh<Log>(f, a, b, *worst, rel_target, abs_target, evals);
      if (ts && ts->log_error() < worst->log_error()) {
        const bool met = ts->error <= rel_target * std::fabs(ts->value) || (!Log && ts->error <= abs_target);
        *worst = *ts;
        if (met) continue;
        worst->settled = false;  // better than GK but short of target: keep bisecting
      }
      worst->stagnant = false;
    }
    if (worst->w < 1e-15 * width || worst->w < 8.0 * std::numeric_limits<double>::min()) {
      worst->settled = true;
      continue;
    }

    const Panel parent = *worst;
    Panel left, right;
    left.la = parent.la;
    left.w = 0.5 * parent.w;
    left.rb = parent.rb + 0.5 * parent.w;
    right.la = parent.la + 0.5 * parent.w;
    right.w = 0.5 * parent.w;
    right.rb = parent.rb;
    const bool left_ok = gk15<Log>(f, a, b, left, evals);
    const bool right_ok = gk15<Log>(f, a, b, right, evals);
    if ((!left_ok && left.la != 0.0) || (!right_ok && right.rb != 0.0)) {
      throw NumericalError("integrand is not finite inside the interval");
    }
    ++subdivisions;
    // Endpoint-type singularities show up as sub-linear error reduction.
    ScaledSum<Log> child_err;
    child_err.add(left.shift, left.error);
    child_err.add(right.shift, right.error);
    const bool stagnating = !(child_err.log_abs() < std::log(0.5) + parent.log_error());
    if (stagnating || !left_ok || !right_ok) {
      Panel& bad = (left.log_error() >= right.log_error()) ? left : right;
      bad.stagnant = true;
    }
    *worst = left;
    panels.push_back(right);
  }

  EngineOutput out{};
  out.log_value = total.log_abs();
  out.value = total.linear();
  out.log_error = total_err.log_abs();
  out.error = total_err.linear();
  out.evaluations = evals;
  out.converged = converged;
  return out;
}

}  // namespace detail

/// Integrates f over [a, b] without throwing on non-convergence; the returned
/// `converged` flag reports whether the tolerance was met.
template <Integrand F>
QuadResult try_integrate_adaptive(F&& f, double a, double b, const Tolerance& tol = {},
                                  std::span<const double> breakpoints = {}) {
  const auto out = detail::adaptive<false>(f, a, b, tol, breakpoints);
  return {out.value, out.error, out.evaluations, out.converged};
}

/// Adaptive integral of f over [a, b]. Interior breakpoints become panel
/// boundaries (place them at kinks). Throws NonConvergenceError carrying the
/// partial result when the tolerance is not met.
template <Integrand F>
QuadResult integrate_adaptive(F&& f, double a, double b, const Tolerance& tol = {},
                              std::span<const double> breakpoints = {}) {
  QuadResult r = try_integrate_adaptive(f, a, b, tol, breakpoints);
  if (!r.converged) throw NonConvergenceError("integrate_adaptive did not converge", r);
  return r;
}

/// Log-space integral of exp(logf) over [a, b]; logf may return -inf.
template <Integrand F>
LogQuadResult try_integrate_adaptive_log(F&& logf, double a, double b, const Tolerance& tol = {},
                                         std::span<const double> breakpoints = {}) {
  const auto out = detail::adaptive<true>(logf, a, b, tol, breakpoints);
  LogQuadResult r;
  r.log_value = out.log_value;
  r.rel_error = (out.log_value == -std::numeric_limits<double>::infinity())
                    ? 0.0
                    : std::exp(out.log_error - out.log_value);
  r.evaluations = out.evaluations;
  r.converged = out.converged;
  return r;
}

template <Integrand F>
LogQuadResult integrate_adaptive_log(F&& logf, double a, double b, const Tolerance& tol = {},
                                     std::span<const double> breakpoints = {}) {
  LogQuadResult r = try_integrate_adaptive_log(logf, a, b, tol, breakpoints);
  if (!r.converged) throw NonConvergenceError("integrate_adaptive_log did not converge", r.linear());
  return r;
}

/// Factor by which the inner tolerance of an iterated integral is tightened.
inline constexpr double kInnerToleranceFactor = 50.0;

/// Iterated integral  int_{r0}^{r1} int_0^{upper(r)} g(r, z) dz dr.
///
/// g is called as g(r, z) or g(r, z, z, upper(r) - z) (endpoint-aware in z).
/// Inner integrals run at tol / 50; an inner failure throws
/// NonConvergenceError with the offending r attached.
template <class G, class Upper>
QuadResult integrate_iterated_2d(G&& g, double r0, double r1, Upper&& inner_upper,
                                 const Tolerance& tol = {},
                                 std::span<const double> outer_breakpoints = {}) {
  const Tolerance inner_tol = tol.tightened(kInnerToleranceFactor);
  Tolerance outer_tol = tol;  // leaves room for the inner error in the final check
  outer_tol.rel_tol = std::max(tol.rel_tol - inner_tol.rel_tol, 0.5 * tol.rel_tol);
  outer_tol.abs_tol -= inner_tol.abs_tol;
  long inner_evals = 0;
  double worst_inner_rel = 0.0;
  auto outer = [&](double r) {
    const double upper = inner_upper(r);
    if (!(upper > 0.0)) return 0.0;
    QuadResult in;
    if constexpr (std::invocable<G&, double, double, double, double>) {
      in = try_integrate_adaptive(
          [&](double z, double za, double zb) { return g(r, z, za, zb); }, 0.0, upper, inner_tol);
    } else {
      in = try_integrate_adaptive([&](double z) { return g(r, z); }, 0.0, upper, inner_tol);
    }
    inner_evals += in.evaluations;
    if (!in.converged) throw NonConvergenceError("inner integral did not converge", in, r);
    if (in.value != 0.0) worst_inner_rel = std::max(worst_inner_rel, in.error_estimate / std::fabs(in.value));
    return in.value;
  };
  QuadResult res = try_integrate_adaptive(outer, r0, r1, outer_tol, outer_breakpoints);
  res.evaluations += inner_evals;
  res.error_estimate += worst_inner_rel * std::fabs(res.value);
  res.converged = res.converged &&
                  res.error_estimate <= std::max(tol.abs_tol, tol.rel_tol * std::fabs(res.value));
  if (!res.converged) throw NonConvergenceError("outer integral did not converge", res);
  return res;
}

/// Log-space iterated integral of exp(logg(r, z)) over the same region.
template <class G, class Upper>
LogQuadResult integrate_iterated_2d_log(G&& logg, double r0, double r1, Upper&& inner_upper,
                                        const Tolerance& tol = {},
                                        std::span<const double> outer_breakpoints = {}) {
  const Tolerance inner_tol = tol.tightened(kInnerToleranceFactor);
  Tolerance outer_tol = tol;  // leaves room for the inner error in the final check
  outer_tol.rel_tol = std::max(tol.rel_tol - inner_tol.rel_tol, 0.5 * tol.rel_tol);
  outer_tol.abs_tol -= inner_tol.abs_tol;
  long inner_evals = 0;
  double worst_inner_rel = 0.0;
  auto outer = [&](double r) {
    const double upper = inner_upper(r);
    if (!(upper > 0.0)) return -std::numeric_limits<double>::infinity();
    LogQuadResult in;
    if constexpr (std::invocable<G&, double, double, double, double>) {
      in = try_integrate_adaptive_log(
          [&](double z, double za, double zb) { return logg(r, z, za, zb); }, 0.0, upper, inner_tol);
    } else {
      in = try_integrate_adaptive_log([&](double z) { return logg(r, z); }, 0.0, upper, inner_tol);
    }
    inner_evals += in.evaluations;
    if (!in.converged) throw NonConvergenceError("inner integral did not converge", in.linear(), r);
    worst_inner_rel = std::max(worst_inner_rel, in.rel_error);
    return in.log_value;
  };
  LogQuadResult res = try_integrate_adaptive_log(outer, r0, r1, outer_tol, outer_breakpoints);
  res.evaluations += inner_evals;
  res.rel_error += worst_inner_rel;
  res.converged = res.converged && res.rel_error <= tol.rel_tol;
  if (!res.converged) throw NonConvergenceError("outer integral did not converge", res.linear());
  return res;
}

/// log of the intersection kernel
///   z^q (1 - z^2)^{(d-q)/2 - 1} (1 + K r^2 z^2)^{-(d+1)/2}
/// for 0 <= z < 1 and r z < 1/sqrt(-K). Returns -inf at z = 0.
double log_kernel(int d, int q, Curvature K, double r, double z);

/// Same kernel with 1 - z supplied separately (exact near z = 1).
double log_kernel(int d, int q, Curvature K, double r, double z, double one_minus_z);

}  // namespace hyperflats::quadrature
