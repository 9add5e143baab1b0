#include "hyperflats/cli.hpp"

#include <CLI11.hpp>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <thread>

#include "hyperflats/analytic.hpp"
#include "hyperflats/monte_carlo.hpp"

#ifndef HYPERFLATS_VERSION
#define HYPERFLATS_VERSION "0.0.0"
#endif

namespace hyperflats::cli {

namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Params {
  int d = 0, q = 0, gamma = 0;
  double K = 0.0, u = 0.0;
  double rel_tol = 1e-9;
  double delta = 0.0, delta_min = 0.01, delta_max = 5.0;
  int steps = 100;
  double alpha = 0.0;
  bool conditional = false;
  double kappa = 1.0;
  int d_min = 0, d_max = 0, d_step = 1;
  double K_min = 0.0, K_max = 0.0;
  bool log_spaced = false;
  std::string mode;
  long trials = 100000;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  bool json = false;
  std::string output;
  std::string manifest;
};

FlatConfig make_config(const Params& p, int d) {
  try {
    return FlatConfig(d, p.q, p.gamma, p.u);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

Curvature make_curvature(double K) {
  try {
    return Curvature(K);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

Curvature make_hyperbolic(double K, const char* command) {
  const Curvature c = make_curvature(K);
  if (!c.is_hyperbolic()) throw UsageError(fmt::format("{} requires K < 0 (got K={})", command, K));
  return c;
}

analytic::Options options(const Params& p) {
  if (!(p.rel_tol > 0.0) || !(p.rel_tol < 1.0)) {
    throw UsageError(fmt::format("require 0 < rel-tol < 1 (got {})", p.rel_tol));
  }
  analytic::Options opt;
  opt.tol.rel_tol = p.rel_tol;
  return opt;
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(now));
}

json manifest(const std::string& command, json parameters, std::optional<std::uint64_t> seed = std::nullopt) {
  json m;
  m["command"] = command;
  m["parameters"] = std::move(parameters);
  m["version"] = HYPERFLATS_VERSION;
  if (seed) m["seed"] = *seed;
  m["timestamp"] = timestamp();
  return m;
}

json config_params(const Params& p) {
  return {{"d", p.d}, {"q", p.q}, {"gamma", p.gamma}, {"K", p.K}, {"u", p.u}, {"rel_tol", p.rel_tol}};
}

// Evaluates fn(0..n-1) on a thread pool, results in index order.
template <class T>
std::vector<T> parallel_map(std::size_t n, unsigned threads, const std::function<T(std::size_t)>& fn) {
  std::vector<T> out(n);
  std::vector<std::exception_ptr> errors(n);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

class CsvSink {
 public:
  CsvSink(const std::string& path, std::ostream& fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw UsageError(fmt::format("cannot open output file '{}'", path));
    }
    os_ = path.empty() ? &fallback : &file_;
  }
  std::ostream& os() { return *os_; }

 private:
  std::ofstream file_;
  std::ostream* os_;
};

void write_csv(const Params& p, std::ostream& out, const json& mf, const std::string& header,
               const std::vector<std::string>& rows) {
  CsvSink sink(p.output, out);
  std::ostream& os = sink.os();
  os << "# " << mf.dump() << '\n' << header << '\n';
  for (const auto& r : rows) os << r << '\n';
  os.flush();
}

void cmd_prob(const Params& p, std::ostream& out) {
  const FlatConfig cfg = make_config(p, p.d);
  const Curvature K = make_curvature(p.K);
  const auto opt = options(p);
  analytic::Estimate est{1.0, 0.0, 0};
  if (K.is_hyperbolic()) est = analytic::intersection_probability_estimate(cfg, K, opt);
  if (p.json) {
    json j = {{"command", "prob"}, {"d", p.d},   {"q", p.q},
              {"gamma", p.gamma},  {"K", p.K},   {"u", p.u},
              {"p", est.value},    {"error_estimate", est.error_estimate},
              {"version", HYPERFLATS_VERSION}};
    out << j.dump() << '\n';
  } else {
    out << fmt::format("{:.17g}\n", est.value);
  }
}

void cmd_cdf(const Params& p, std::ostream& out) {
  const FlatConfig cfg = make_config(p, p.d);
  const Curvature K = make_curvature(p.K);
  const auto opt = options(p);
  if (!(p.delta >= 0.0)) throw UsageError(fmt::format("require delta >= 0 (got {})", p.delta));
  const double v = K.is_hyperbolic() ? analytic::distance_cdf(cfg, K, p.delta, opt)
                                     : analytic::euclidean_distance_cdf(cfg, p.delta, opt.tol);
  out << fmt::format("{:.17g}\n", v);
}

void cmd_density_scan(const Params& p, std::ostream& out) {
  const FlatConfig cfg = make_config(p, p.d);
  const Curvature K = make_hyperbolic(p.K, "density-scan");
  const auto opt = options(p);
  if (!(p.delta_min > 0.0) || !(p.delta_max >= p.delta_min) || !std::isfinite(p.delta_max)) {
    throw UsageError("require 0 < delta-min <= delta-max");
  }
  if (p.steps < 1) throw UsageError(fmt::format("require steps >= 1 (got {})", p.steps));
  const auto n = static_cast<std::size_t>(p.steps);
  auto delta_at = [&](std::size_t i) {
    return n == 1 ? p.delta_min : p.delta_min + (p.delta_max - p.delta_min) * i / (n - 1);
  };
  const auto rows = parallel_map<std::string>(n, p.threads, [&](std::size_t i) {
    const double x = delta_at(i);
    return fmt::format("{},{}", x, analytic::distance_density(cfg, K, x, opt));
  });
  json params = config_params(p);
  params["delta_min"] = p.delta_min;
  params["delta_max"] = p.delta_max;
  params["steps"] = p.steps;
  write_csv(p, out, manifest("density-scan", params), "delta,f", rows);
}

void cmd_moment(const Params& p, std::ostream& out) {
  const FlatConfig cfg = make_config(p, p.d);
  const Curvature K = make_hyperbolic(p.K, "moment");
  const auto opt = options(p);
  if (!std::isfinite(p.alpha)) throw UsageError("alpha must be finite");
  const auto res = analytic::moment(cfg, K, p.alpha, p.conditional, opt);
  if (res.is_finite()) {
    out << fmt::format("Finite({:.17g})\n", res.value);
  } else {
    out << "divergent\n";
  }
}

void check_phase_args(const Params& p) {
  if (!(p.u > 0.0) || !std::isfinite(p.u)) throw UsageError(fmt::format("require u > 0 (got u={})", p.u));
  if (p.q < 1) throw UsageError(fmt::format("require q >= 1 (got q={})", p.q));
  if (p.gamma < 0 || p.gamma > p.q - 1) {
    throw UsageError(fmt::format("require 0 <= gamma <= q-1 (got gamma={}, q={})", p.gamma, p.q));
  }
}

void cmd_phase(const Params& p, std::ostream& out) {
  check_phase_args(p);
  if (!(p.kappa > 0.0) || !std::isfinite(p.kappa)) {
    throw UsageError(fmt::format("require kappa > 0 (got kappa={})", p.kappa));
  }
  const auto opt = options(p);
  out << fmt::format("{:.17g}\n", analytic::critical_constant_rho(p.u, p.q, p.gamma, p.kappa, opt.tol));
}

std::vector<int> d_grid(const Params& p) {
  const int lo = p.d_min == 0 ? p.q + 1 : p.d_min;
  if (lo < p.q + 1) throw UsageError(fmt::format("require d-min >= q+1 (got d-min={}, q={})", lo, p.q));
  if (p.d_max < lo) throw UsageError(fmt::format("require d-max >= d-min (got {} < {})", p.d_max, lo));
  if (p.d_step < 1) throw UsageError(fmt::format("require d-step >= 1 (got {})", p.d_step));
  std::vector<int> ds;
  for (int d = lo; d <= p.d_max; d += p.d_step) ds.push_back(d);
  return ds;
}

void cmd_scan_d(const Params& p, std::ostream& out) {
  const std::vector<int> ds = d_grid(p);
  for (int d : {ds.front(), ds.back()}) make_config(p, d);
  const Curvature K = make_curvature(p.K);
  const auto opt = options(p);
  const auto rows = parallel_map<std::string>(ds.size(), p.threads, [&](std::size_t i) {
    const FlatConfig cfg(ds[i], p.q, p.gamma, p.u);
    const double v = K.is_hyperbolic() ? analytic::intersection_probability(cfg, K, opt) : 1.0;
    return fmt::format("{},{}", ds[i], v);
  });
  json params = config_params(p);
  params.erase("d");
  params["d_min"] = ds.front();
  params["d_max"] = p.d_max;
  params["d_step"] = p.d_step;
  write_csv(p, out, manifest("scan-d", params), "d,p", rows);
}

void cmd_scan_K(const Params& p, std::ostream& out) {
  const FlatConfig cfg = make_config(p, p.d);
  const auto opt = options(p);
  make_curvature(p.K_min);
  make_curvature(p.K_max);
  if (!(p.K_min <= p.K_max)) throw UsageError("require K-min <= K-max");
  if (p.steps < 1) throw UsageError(fmt::format("require steps >= 1 (got {})", p.steps));
  if (p.log_spaced && !(p.K_max < 0.0)) throw UsageError("--log-spaced requires K-max < 0");
  const auto n = static_cast<std::size_t>(p.steps);
  auto K_at = [&](std::size_t i) {
    if (n == 1) return p.K_min;
    if (i == n - 1) return p.K_max;
    const double t = static_cast<double>(i) / (n - 1);
    if (!p.log_spaced) return p.K_min + (p.K_max - p.K_min) * t;
    return -std::pow(10.0, std::log10(-p.K_min) + (std::log10(-p.K_max) - std::log10(-p.K_min)) * t);
  };
  const auto rows = parallel_map<std::string>(n, p.threads, [&](std::size_t i) {
    const Curvature K(K_at(i));
    const double v = K.is_hyperbolic() ? analytic::intersection_probability(cfg, K, opt) : 1.0;
    return fmt::format("{},{}", K.value(), v);
  });
  json params = config_params(p);
  params.erase("K");
  params["K_min"] = p.K_min;
  params["K_max"] = p.K_max;
  params["steps"] = p.steps;
  params["log_spaced"] = p.log_spaced;
  write_csv(p, out, manifest("scan-K", params), "K,p", rows);
}

void cmd_scan_phase(const Params& p, std::ostream& out) {
  check_phase_args(p);
  const auto opt = options(p);
  analytic::PhaseMode mode = analytic::PhaseMode::subcritical();
  std::function<double(int)> schedule;
  if (p.mode == "sub") {
    schedule = [](int d) { return -1.0 / (static_cast<double>(d) * d); };
  } else if (p.mode == "super") {
    mode = analytic::PhaseMode::supercritical();
    schedule = [](int d) { return -1.0 / std::sqrt(static_cast<double>(d)); };
  } else if (p.mode == "crit") {
    if (!(p.kappa > 0.0) || !std::isfinite(p.kappa)) {
      throw UsageError(fmt::format("require kappa > 0 (got kappa={})", p.kappa));
    }
    mode = analytic::PhaseMode::critical(p.kappa);
    schedule = [k = p.kappa](int d) { return -k / d; };
  } else {
    throw UsageError(fmt::format("mode must be sub, super or crit (got '{}')", p.mode));
  }
  const std::vector<int> ds = d_grid(p);
  const double limit = analytic::phase_limit(mode, p.u, p.q, p.gamma, opt.tol);
  const auto rows = parallel_map<std::string>(ds.size(), p.threads, [&](std::size_t i) {
    const FlatConfig cfg(ds[i], p.q, p.gamma, p.u);
    const double K = schedule(ds[i]);
    return fmt::format("{},{},{},{}", ds[i], K, analytic::intersection_probability(cfg, Curvature(K), opt),
                       limit);
  });
  json params = {{"mode", p.mode}, {"q", p.q}, {"gamma", p.gamma}, {"u", p.u},
                 {"d_min", ds.front()}, {"d_max", p.d_max}, {"d_step", p.d_step}, {"rel_tol", p.rel_tol}};
  if (p.mode == "crit") params["kappa"] = p.kappa;
  write_csv(p, out, manifest("scan-phase", params), "d,K,p,limit", rows);
}

void cmd_simulate(const Params& p, std::ostream& out) {
  const FlatConfig cfg = make_config(p, p.d);
  const Curvature K = make_hyperbolic(p.K, "simulate");
  const auto opt = options(p);
  if (p.trials < 1) throw UsageError(fmt::format("require trials >= 1 (got {})", p.trials));

  const auto sim = monte_carlo::simulate(cfg, K, p.trials, p.seed, p.threads);
  const double prob = analytic::intersection_probability(cfg, K, opt);
  const double atom = 1.0 - prob;
  const analytic::CdfTable table(cfg, K, 400, opt);
  const auto& est = sim.estimate;
  const auto& dist = sim.distribution;
  const double empty_fraction = static_cast<double>(dist.empty_count) / dist.trials;

  json j;
  j["command"] = "simulate";
  j["d"] = p.d;
  j["q"] = p.q;
  j["gamma"] = p.gamma;
  j["K"] = p.K;
  j["u"] = p.u;
  j["trials"] = est.trials;
  j["seed"] = est.seed;
  j["hits"] = est.hits;
  j["p_hat"] = est.p_hat;
  j["std_err"] = est.std_err;
  j["p_analytic"] = prob;
  j["z_score"] = est.std_err > 0.0 ? json(std::fabs(est.p_hat - prob) / est.std_err) : json(nullptr);
  j["empty_count"] = dist.empty_count;
  j["empty_fraction"] = empty_fraction;
  j["atom_mass_analytic"] = atom;
  j["atom_z_score"] = est.std_err > 0.0 ? json(std::fabs(empty_fraction - atom) / est.std_err) : json(nullptr);
  if (!dist.finite_samples.empty()) {
    j["ks_statistic"] = monte_carlo::ks_statistic(dist.finite_samples,
                                                  [&](double x) { return table(x) / prob; });
    j["ks_critical_0_001"] = monte_carlo::ks_critical_value(dist.finite_samples.size(), 0.001);
  } else {
    j["ks_statistic"] = nullptr;
    j["ks_critical_0_001"] = nullptr;
  }
  j["acceptance_rate"] = sim.diagnostics.acceptance_rate;
  j["expected_acceptance"] = sim.diagnostics.expected_acceptance;
  j["inverse_cdf_table"] = sim.diagnostics.inverse_cdf_table;
  j["version"] = HYPERFLATS_VERSION;
  out << j.dump() << '\n';

  if (!p.manifest.empty()) {
    json params = config_params(p);
    params["trials"] = p.trials;
    params["threads"] = p.threads;
    std::ofstream mf(p.manifest, std::ios::binary);
    if (!mf) throw UsageError(fmt::format("cannot open manifest file '{}'", p.manifest));
    mf << manifest("simulate", params, p.seed).dump(2) << '\n';
  }
}

void add_config(CLI::App* sc, Params& p, bool with_d = true, bool with_K = true) {
  if (with_d) sc->add_option("--d", p.d, "ambient dimension d >= 2")->required();
  sc->add_option("--q", p.q, "dimension of the central flat L, 1 <= q <= d-1")->required();
  sc->add_option("--gamma", p.gamma, "gamma with 0 <= gamma <= q-1; E has dimension d-q+gamma")->required();
  if (with_K) sc->add_option("--K", p.K, "curvature K <= 0")->required();
  sc->add_option("--u", p.u, "radius u > 0 of the ball hit by E")->required();
  sc->add_option("--rel-tol", p.rel_tol, "relative quadrature tolerance")->capture_default_str();
}

void add_threads(CLI::App* sc, Params& p) {
  sc->add_option("--threads", p.threads, "worker threads (0 = available parallelism)")->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Params p;
  CLI::App app{"Intersection probabilities of random flats in hyperbolic space", "hyperflats"};
  app.set_version_flag("--version", HYPERFLATS_VERSION);
  app.require_subcommand(1);

  auto* prob = app.add_subcommand("prob", "probability that E meets L");
  add_config(prob, p);
  prob->add_flag("--json", p.json, "print a JSON object");

  auto* cdf = app.add_subcommand("cdf", "P(dist(o, E cap L) <= delta)");
  add_config(cdf, p);
  cdf->add_option("--delta", p.delta, "distance delta >= 0")->required();

  auto* dscan = app.add_subcommand("density-scan", "CSV delta,f of the distance density");
  add_config(dscan, p);
  dscan->add_option("--delta-min", p.delta_min, "first distance of the grid")->capture_default_str();
  dscan->add_option("--delta-max", p.delta_max, "last distance of the grid")->capture_default_str();
  dscan->add_option("--steps", p.steps, "number of grid points")->capture_default_str();
  dscan->add_option("--output", p.output, "write the CSV to a file");
  add_threads(dscan, p);

  auto* mom = app.add_subcommand("moment", "moment of order alpha of the distance");
  add_config(mom, p);
  mom->add_option("--alpha", p.alpha, "order of the moment")->required();
  mom->add_flag("--conditional", p.conditional, "condition on E cap L being non-empty");

  auto* phase = app.add_subcommand("phase", "critical constant rho(u, q, gamma, kappa)");
  phase->add_option("--u", p.u, "radius u > 0")->required();
  phase->add_option("--q", p.q, "dimension q >= 1 of L")->required();
  phase->add_option("--gamma", p.gamma, "0 <= gamma <= q-1")->required();
  phase->add_option("--kappa", p.kappa, "kappa > 0, the limit of -K d")->required();
  phase->add_option("--rel-tol", p.rel_tol, "relative quadrature tolerance")->capture_default_str();

  auto* sd = app.add_subcommand("scan-d", "CSV d,p over a range of dimensions");
  add_config(sd, p, false);
  sd->add_option("--d-min", p.d_min, "first dimension (default q+1)");
  sd->add_option("--d-max", p.d_max, "last dimension")->required();
  sd->add_option("--d-step", p.d_step, "dimension increment")->capture_default_str();
  sd->add_option("--output", p.output, "write the CSV to a file");
  add_threads(sd, p);

  auto* sk = app.add_subcommand("scan-K", "CSV K,p over a range of curvatures");
  add_config(sk, p, true, false);
  sk->add_option("--K-min", p.K_min, "most negative curvature")->required();
  sk->add_option("--K-max", p.K_max, "curvature closest to 0, still < 0")->required();
  sk->add_option("--steps", p.steps, "number of grid points")->capture_default_str();
  sk->add_flag("--log-spaced", p.log_spaced, "space |K| geometrically");
  sk->add_option("--output", p.output, "write the CSV to a file");
  add_threads(sk, p);

  auto* sp = app.add_subcommand("scan-phase", "CSV d,K,p,limit along a curvature schedule K(d)");
  sp->add_option("--mode", p.mode, "sub (K=-1/d^2), super (K=-1/sqrt d) or crit (K=-kappa/d)")->required();
  sp->add_option("--kappa", p.kappa, "kappa > 0 for the critical schedule")->capture_default_str();
  sp->add_option("--d-min", p.d_min, "first dimension (default q+1)");
  sp->add_option("--d-max", p.d_max, "last dimension")->required();
  sp->add_option("--d-step", p.d_step, "dimension increment")->capture_default_str();
  sp->add_option("--q", p.q, "dimension q >= 1 of L")->required();
  sp->add_option("--gamma", p.gamma, "0 <= gamma <= q-1")->required();
  sp->add_option("--u", p.u, "radius u > 0")->required();
  sp->add_option("--rel-tol", p.rel_tol, "relative quadrature tolerance")->capture_default_str();
  sp->add_option("--output", p.output, "write the CSV to a file");
  add_threads(sp, p);

  auto* sim = app.add_subcommand("simulate", "Monte Carlo check against the analytic law (JSON)");
  add_config(sim, p);
  sim->add_option("--trials", p.trials, "number of independent trials")->capture_default_str();
  sim->add_option("--seed", p.seed, "64-bit seed; each trial stream depends on (seed, trial)")->capture_default_str();
  sim->add_option("--manifest", p.manifest, "also write the run manifest to this file");
  add_threads(sim, p);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kInvalidArguments;
  }

  try {
    if (prob->parsed()) cmd_prob(p, out);
    else if (cdf->parsed()) cmd_cdf(p, out);
    else if (dscan->parsed()) cmd_density_scan(p, out);
    else if (mom->parsed()) cmd_moment(p, out);
    else if (phase->parsed()) cmd_phase(p, out);
    else if (sd->parsed()) cmd_scan_d(p, out);
    else if (sk->parsed()) cmd_scan_K(p, out);
    else if (sp->parsed()) cmd_scan_phase(p, out);
    else if (sim->parsed()) cmd_simulate(p, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidArguments;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return kSuccess;
}

}  // namespace hyperflats::cli
