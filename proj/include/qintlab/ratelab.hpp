#pragma once

// Budget sweeps over the integrators, log-log rate fits with bootstrap
// confidence intervals, and CSV/JSON export.
//
// Budget axis per method:
//   det, mc, mcvr   classical evaluations
//   coin            classical evaluations + random bits
//   quantum         oracle queries (M of the amplitude estimation)
//   rand-quantum    oracle queries (3 median runs of M each)

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "qintlab/integrators.hpp"

namespace qintlab::ratelab {

using holder::HolderClassSpec;
using holder::HolderFunction;

enum class Method { det, mc, mcvr, coin, quantum, rand_quantum };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::det: return "det";
    case Method::mc: return "mc";
    case Method::mcvr: return "mcvr";
    case Method::coin: return "coin";
    case Method::quantum: return "quantum";
    case Method::rand_quantum: return "rand-quantum";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  for (Method m : {Method::det, Method::mc, Method::mcvr, Method::coin, Method::quantum, Method::rand_quantum})
    if (s == to_string(m)) return m;
  if (s == "rand_quantum") return Method::rand_quantum;
  throw configuration_error("unknown method '" + s + "'");
}

/// Error-vs-cost exponent the method should exhibit on the class: minus the
/// reciprocal of its complexity exponent.
inline double target_slope(Method m, const HolderClassSpec& spec) {
  switch (m) {
    case Method::det: return -spec.gamma;
    case Method::mc: return -0.5;
    case Method::mcvr:
    case Method::coin: return -(spec.gamma + 0.5);
    case Method::quantum: return -(1.0 + spec.gamma);
    case Method::rand_quantum: return -1.0;
  }
  return 0.0;
}

struct TrialRecord {
  double error = 0.0;
  ResourceLedger ledger;
};

struct Row {
  /// Median measured cost of the trials, in the method's budget unit.
  std::uint64_t budget = 0;
  /// Requested budget that produced this row.
  std::uint64_t nominal_budget = 0;
  std::vector<TrialRecord> trials;
};

struct FitResult {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double ci_low = std::numeric_limits<double>::quiet_NaN();
  double ci_high = std::numeric_limits<double>::quiet_NaN();
  std::size_t rows_used = 0;
  std::vector<std::string> warnings;
};

struct ConvergenceReport {
  std::string method;
  HolderClassSpec spec;
  std::string mode;
  std::string function;
  std::uint64_t seed = 0;
  unsigned trials = 0;
  std::vector<Row> rows;
  double fitted_slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  std::pair<double, double> slope_ci{std::numeric_limits<double>::quiet_NaN(),
                                     std::numeric_limits<double>::quiet_NaN()};
  std::map<std::string, std::string> metadata;
  std::vector<std::string> warnings;
};

inline constexpr unsigned bootstrap_resamples = 1000;
inline constexpr std::size_t min_fit_rows = 4;

inline double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lo + hi);
}

namespace detail {

inline std::pair<double, double> ols(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

inline double percentile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

/// OLS of log(median error) on log(budget); 95% CI from a bootstrap over the
/// trials of each row. Rows with a zero median error or zero budget are left
/// out with a warning.
inline FitResult fit_rate(const ConvergenceReport& report) {
  FitResult fit;
  std::vector<const Row*> used;
  for (const auto& row : report.rows) {
    std::vector<double> errors;
    for (const auto& t : row.trials) errors.push_back(t.error);
    const double med = median_of(errors);
    if (row.budget == 0 || !(med > 0.0)) {
      fit.warnings.push_back("budget " + std::to_string(row.nominal_budget) +
                             ": zero median error or budget, row excluded from fit");
      continue;
    }
    used.push_back(&row);
  }
  fit.rows_used = used.size();
  if (used.size() < min_fit_rows)
    throw configuration_error("fit_rate: need at least " + std::to_string(min_fit_rows) + " usable budget rows, have " +
                              std::to_string(used.size()));

  std::vector<double> x, y;
  for (const Row* row : used) {
    std::vector<double> errors;
    for (const auto& t : row->trials) errors.push_back(t.error);
    x.push_back(std::log(static_cast<double>(row->budget)));
    y.push_back(std::log(median_of(errors)));
  }
  std::tie(fit.slope, fit.intercept) = detail::ols(x, y);

  Rng rng = derive_stream(report.seed, 0xB0075742ULL, 0);
  std::vector<double> slopes;
  slopes.reserve(bootstrap_resamples);
  std::vector<double> yb(used.size()), sample;
  unsigned degenerate = 0;
  for (unsigned b = 0; b < bootstrap_resamples; ++b) {
    bool ok = true;
    for (std::size_t r = 0; r < used.size(); ++r) {
      const auto& trials = used[r]->trials;
      sample.resize(trials.size());
      for (auto& s : sample) s = trials[rng() % trials.size()].error;
      const double med = median_of(sample);
      if (!(med > 0.0)) {
        ok = false;
        continue;
      }
      yb[r] = std::log(med);
    }
    if (!ok) {
      ++degenerate;
      continue;
    }
    slopes.push_back(detail::ols(x, yb).first);
  }
  if (degenerate > 0)
    fit.warnings.push_back(std::to_string(degenerate) + " bootstrap resamples had a zero median and were skipped");
  if (!slopes.empty()) {
    std::sort(slopes.begin(), slopes.end());
    fit.ci_low = detail::percentile(slopes, 0.025);
    fit.ci_high = detail::percentile(slopes, 0.975);
  }
  return fit;
}

// Budget list parsing: "2^4..2^14", "16..1024" (doubling), or a comma list
// whose entries may be integers or 2^k.

namespace detail {
inline std::uint64_t parse_budget_value(const std::string& token) {
  std::string t;
  for (char c : token)
    if (!std::isspace(static_cast<unsigned char>(c))) t += c;
  std::uint64_t value = 0;
  if (t.rfind("2^", 0) == 0) {
    unsigned e = 0;
    auto [p, ec] = std::from_chars(t.data() + 2, t.data() + t.size(), e);
    if (ec != std::errc() || p != t.data() + t.size() || e > 62) throw configuration_error("bad budget '" + token + "'");
    return std::uint64_t{1} << e;
  }
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty()) throw configuration_error("bad budget '" + token + "'");
  return value;
}
}  // namespace detail

inline std::vector<std::uint64_t> parse_budgets(const std::string& text) {
  std::vector<std::uint64_t> out;
  const auto range = text.find("..");
  if (range != std::string::npos) {
    const std::uint64_t lo = detail::parse_budget_value(text.substr(0, range));
    const std::uint64_t hi = detail::parse_budget_value(text.substr(range + 2));
    if (lo == 0 || lo > hi) throw configuration_error("bad budget range '" + text + "'");
    for (std::uint64_t b = lo; b <= hi; b *= 2) {
      out.push_back(b);
      if (b > (std::uint64_t{1} << 62)) break;
    }
    return out;
  }
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) out.push_back(detail::parse_budget_value(token));
  if (out.empty()) throw configuration_error("empty budget list");
  return out;
}

/// Thread count: `requested` if positive, else the hardware concurrency,
/// capped by QINTLAB_THREADS when set.
inline unsigned resolve_threads(unsigned requested = 0) {
  unsigned threads = requested > 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("QINTLAB_THREADS"); env && *env) {
    unsigned cap = 0;
    const std::string s(env);
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), cap);
    if (ec != std::errc() || p != s.data() + s.size() || cap == 0)
      throw configuration_error("QINTLAB_THREADS must be a positive integer, got '" + s + "'");
    threads = std::min(threads, cap);
  }
  return threads;
}

struct RunConfig {
  Method method = Method::det;
  HolderClassSpec spec = holder::make_spec(1, 0, 1);
  std::string function = "sumsq";
  std::vector<std::uint64_t> budgets;
  unsigned trials = 20;
  std::uint64_t seed = 1;
  integrators::QuantumCost cost = integrators::QuantumCost::query;
  amp_est::Mode amp_mode = amp_est::Mode::analytic_distribution;
  unsigned threads = 0;
};

/// Per-row method parameters derived from a nominal budget.
struct RowPlan {
  std::uint64_t cells_per_axis = 0;  // det
  std::uint64_t samples = 0;         // mc, mcvr
  double eps1 = 0.0;                 // coin, quantum
  double eps = 0.0;                  // rand-quantum
};

/// Largest per-axis bump count used for fooling instances.
inline constexpr std::uint64_t max_fooling_bumps = std::uint64_t{1} << 24;

namespace detail {

inline std::uint64_t coin_predicted_cost(const HolderClassSpec& spec, double eps1) {
  const std::uint64_t local = integrators::local_points(spec);
  const std::uint64_t cells = quadrature::cells_for_budget(spec, integrators::coin_interpolation_budget(spec, eps1));
  const std::uint64_t n = holder::detail::ipow(cells, spec.d) * local;
  const std::uint64_t nodes = integrators::residual_nodes(spec, n, eps1);
  const std::uint64_t samples = integrators::coin_samples(eps1);
  unsigned bits = 0;
  while ((std::uint64_t{1} << bits) < nodes) ++bits;
  const double per_draw = bits * std::ldexp(1.0, static_cast<int>(bits)) / static_cast<double>(nodes);
  return n + samples + static_cast<std::uint64_t>(std::llround(samples * per_draw));
}

/// eps for the expectation algorithm whose amplitude-estimation power is M.
inline double rand_quantum_eps(std::uint64_t power) {
  double eps = 6.0 * amp_est::worst_case_precision(power);
  for (int i = 0; i < 20; ++i) {
    const std::uint64_t n = integrators::expectation_sample_count(eps);
    const double shrink = static_cast<double>(n) / static_cast<double>(std::bit_ceil(n));
    eps = 6.0 * amp_est::worst_case_precision(power) / shrink;
  }
  for (int i = 0; i < 10000 && integrators::expectation_power(eps) > power; ++i) eps *= 1.0005;
  return eps;
}

}  // namespace detail

inline RowPlan plan_row(const RunConfig& cfg, std::uint64_t budget) {
  RowPlan plan;
  const auto& spec = cfg.spec;
  const std::string b = std::to_string(budget);
  switch (cfg.method) {
    case Method::det:
      plan.cells_per_axis = holder::integer_root(budget, spec.d);
      if (plan.cells_per_axis == 0) throw configuration_error("det: budget " + b + " below one node");
      break;
    case Method::mc:
      plan.samples = budget;
      if (budget == 0) throw configuration_error("mc: budget must be positive");
      break;
    case Method::mcvr:
      plan.samples = budget / 2;
      if (plan.samples < integrators::local_points(spec))
        throw configuration_error("mcvr: budget " + b + " below 2 (k+1)^d");
      break;
    case Method::coin: {
      double hi = 0.49, lo = 1e-5;
      if (detail::coin_predicted_cost(spec, hi) > budget)
        throw configuration_error("coin: budget " + b + " too small for eps1 < 1/2");
      // Largest eps1 grid point on a log scale whose predicted cost fits.
      for (int i = 0; i < 60; ++i) {
        const double mid = std::sqrt(lo * hi);
        if (detail::coin_predicted_cost(spec, mid) <= budget)
          hi = mid;
        else
          lo = mid;
      }
      plan.eps1 = hi;
      break;
    }
    case Method::quantum: {
      const std::uint64_t power = std::bit_floor(budget);
      plan.eps1 = amp_est::worst_case_precision(power);
      if (power == 0 || !(plan.eps1 < 0.5)) throw configuration_error("quantum: budget " + b + " below 16 queries");
      break;
    }
    case Method::rand_quantum: {
      const std::uint64_t power = std::bit_floor(budget / integrators::expectation_repetitions());
      if (power < 2) throw configuration_error("rand-quantum: budget " + b + " too small");
      plan.eps = detail::rand_quantum_eps(power);
      if (!(plan.eps <= 0.5)) throw configuration_error("rand-quantum: budget " + b + " too small for eps <= 1/2");
      break;
    }
  }
  return plan;
}

/// Function under test for a row. "fool" builds the bump instance with twice
/// the per-axis node count the budget buys and all signs +1, so every
/// midpoint node of the matching rule sits on a bump boundary.
inline HolderFunction make_target(const RunConfig& cfg, std::uint64_t budget, double bump_constant) {
  if (cfg.function == "fool") {
    const std::uint64_t per_axis = 2 * std::max<std::uint64_t>(1, holder::integer_root(budget, cfg.spec.d));
    const std::uint64_t n = holder::detail::ipow(per_axis, cfg.spec.d);
    if (n > max_fooling_bumps) throw configuration_error("fool: budget too large for the bump family");
    return holder::fooling_family(cfg.spec, n, holder::all_plus_signs(n), bump_constant).as_function();
  }
  auto f = holder::find_in_suite(cfg.spec, cfg.function);
  if (!f) throw configuration_error("unknown function '" + cfg.function + "'");
  if (!f->exact_integral) throw configuration_error("function '" + cfg.function + "' has no exact integral");
  return *f;
}

inline std::uint64_t measured_cost(Method m, const ResourceLedger& l) {
  switch (m) {
    case Method::det:
    case Method::mc:
    case Method::mcvr: return l.classical_evals;
    case Method::coin: return l.classical_evals + l.random_bits;
    case Method::quantum:
    case Method::rand_quantum: return l.quantum_queries;
  }
  return 0;
}

inline std::string mode_label(const RunConfig& cfg) {
  switch (cfg.method) {
    case Method::quantum: return integrators::to_string(cfg.cost);
    case Method::rand_quantum: return "query";
    case Method::coin: return "coin";
    default: return "classical";
  }
}

inline TrialRecord run_trial(const RunConfig& cfg, const RowPlan& plan, const HolderFunction& f, Rng rng) {
  TrialRecord t;
  const double exact = *f.exact_integral;
  const auto& spec = cfg.spec;
  switch (cfg.method) {
    case Method::det: {
      auto r = integrators::integrate_deterministic(f, spec, plan.cells_per_axis);
      t.error = std::abs(r.estimate - exact);
      t.ledger = r.ledger;
      break;
    }
    case Method::mc:
    case Method::mcvr: {
      auto r = integrators::integrate_mc(f, spec, plan.samples, rng, cfg.method == Method::mcvr);
      t.error = std::abs(r.estimate - exact);
      t.ledger = r.ledger;
      break;
    }
    case Method::coin: {
      CoinStream coin(std::move(rng));
      auto r = integrators::integrate_coin(f, spec, plan.eps1, coin);
      t.error = std::abs(r.estimate - exact);
      t.ledger = r.ledger;
      break;
    }
    case Method::quantum: {
      auto r = integrators::integrate_quantum(f, spec, plan.eps1, cfg.cost, rng, cfg.amp_mode);
      t.error = std::abs(r.estimate - exact);
      t.ledger = r.ledger;
      break;
    }
    case Method::rand_quantum: {
      // Uniform points on the cube from the free generator; f is evaluated
      // exactly, so the oracle error is zero.
      const unsigned d = spec.d;
      auto sampler = [d](Rng& g) {
        std::vector<double> x(d);
        for (auto& v : x) v = uniform01(g);
        return x;
      };
      auto oracle = [&f](const std::vector<double>& x) { return f(x); };
      auto r = integrators::expectation_randomized_quantum(sampler, oracle, plan.eps, rng, cfg.amp_mode);
      t.error = std::abs(r.estimate - exact);
      t.ledger = r.ledger;
      t.ledger.add_evals(r.n);
      break;
    }
  }
  return t;
}

namespace detail {

inline void check_config(const RunConfig& cfg) {
  if (cfg.trials < 1) throw configuration_error("trials must be at least 1");
  if (cfg.spec.k > quadrature::max_degree || cfg.spec.d > quadrature::max_dimension)
    throw configuration_error("class outside the supported range k <= 3, d <= 4");
}

/// Runs every (row, trial) pair in parallel with streams derived from
/// (seed, row index, trial index), so the result does not depend on the
/// thread count, then sets each row's budget to the median measured cost.
inline ConvergenceReport run_rows(const RunConfig& cfg, const std::vector<RowPlan>& plans,
                                  const std::vector<HolderFunction>& targets,
                                  const std::vector<std::uint64_t>& nominal, double bump_constant) {
  ConvergenceReport report;
  report.method = to_string(cfg.method);
  report.spec = cfg.spec;
  report.mode = mode_label(cfg);
  report.function = cfg.function;
  report.seed = cfg.seed;
  report.trials = cfg.trials;
  report.rows.resize(plans.size());
  for (std::size_t i = 0; i < plans.size(); ++i) {
    report.rows[i].nominal_budget = nominal[i];
    report.rows[i].trials.resize(cfg.trials);
  }

  const std::size_t tasks = plans.size() * cfg.trials;
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      const std::size_t task = next.fetch_add(1);
      if (task >= tasks) return;
      const std::size_t bi = task / cfg.trials, ti = task % cfg.trials;
      try {
        report.rows[bi].trials[ti] = run_trial(cfg, plans[bi], targets[bi], derive_stream(cfg.seed, bi, ti));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!failure) failure = std::current_exception();
        next.store(tasks);
      }
    }
  };
  const auto threads = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(cfg.threads), tasks));
  {
    std::vector<std::jthread> pool;
    for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);

  for (auto& row : report.rows) {
    std::vector<std::uint64_t> costs;
    for (const auto& t : row.trials) costs.push_back(measured_cost(cfg.method, t.ledger));
    std::nth_element(costs.begin(), costs.begin() + (costs.size() - 1) / 2, costs.end());
    row.budget = costs[(costs.size() - 1) / 2];
  }

  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", target_slope(cfg.method, cfg.spec));
  report.metadata["target_slope"] = buf;
  report.metadata["amp_mode"] = amp_est::to_string(cfg.amp_mode);
  report.metadata["budget_unit"] = cfg.method == Method::coin ? "classical_evals+random_bits"
                                   : (cfg.method == Method::quantum || cfg.method == Method::rand_quantum)
                                       ? "quantum_queries"
                                       : "classical_evals";
  if (cfg.function == "fool") {
    std::snprintf(buf, sizeof buf, "%.17g", bump_constant);
    report.metadata["bump_constant"] = buf;
  }
  return report;
}

}  // namespace detail

/// Plan for a target accuracy eps1 instead of a budget: det uses
/// ceil(eps1^{-1/gamma}) nodes, mc ceil(eps1^{-2}) samples, mcvr
/// ceil(eps1^{-2/(1+2 gamma)}) samples, coin and quantum take eps1 directly
/// and rand-quantum uses it as its eps.
inline RowPlan plan_for_accuracy(const RunConfig& cfg, double eps1) {
  if (!(eps1 > 0.0 && eps1 < 0.5)) throw configuration_error("eps1 must lie in (0, 1/2)");
  const auto& spec = cfg.spec;
  auto count = [](double v) {
    if (!(v < 0x1.0p40)) throw configuration_error("eps1 too small");
    return static_cast<std::uint64_t>(std::ceil(v - 1e-9));
  };
  RowPlan plan;
  switch (cfg.method) {
    case Method::det: {
      const std::uint64_t n = count(std::pow(eps1, -1.0 / spec.gamma));
      plan.cells_per_axis = holder::integer_root(n, spec.d);
      if (holder::detail::ipow(plan.cells_per_axis, spec.d) < n) ++plan.cells_per_axis;
      break;
    }
    case Method::mc: plan.samples = count(std::pow(eps1, -2.0)); break;
    case Method::mcvr:
      plan.samples = std::max(integrators::local_points(spec), count(std::pow(eps1, -2.0 / (1.0 + 2.0 * spec.gamma))));
      break;
    case Method::coin:
    case Method::quantum: plan.eps1 = eps1; break;
    case Method::rand_quantum: plan.eps = eps1; break;
  }
  return plan;
}

/// Trials of one method at accuracy eps1, as a single-row report.
inline ConvergenceReport run_at_accuracy(const RunConfig& cfg, double eps1) {
  detail::check_config(cfg);
  const RowPlan plan = plan_for_accuracy(cfg, eps1);
  // Fooling instances need a node scale; use the deterministic node count.
  const std::uint64_t scale =
      cfg.method == Method::det ? holder::detail::ipow(plan.cells_per_axis, cfg.spec.d)
                                : static_cast<std::uint64_t>(std::ceil(std::pow(eps1, -1.0 / cfg.spec.gamma)));
  const double bump_constant = cfg.function == "fool" ? holder::default_bump_constant(cfg.spec) : 0.0;
  auto report = detail::run_rows(cfg, {plan}, {make_target(cfg, scale, bump_constant)}, {0}, bump_constant);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", eps1);
  report.metadata["eps1"] = buf;
  return report;
}

/// Budget sweep: one row per budget, rate fitted when there are at least
/// four rows.
inline ConvergenceReport run_convergence(const RunConfig& cfg) {
  if (cfg.budgets.empty()) throw configuration_error("no budgets given");
  for (std::size_t i = 1; i < cfg.budgets.size(); ++i)
    if (cfg.budgets[i] <= cfg.budgets[i - 1]) throw configuration_error("budgets must be strictly increasing");
  detail::check_config(cfg);

  const double bump_constant = cfg.function == "fool" ? holder::default_bump_constant(cfg.spec) : 0.0;
  std::vector<RowPlan> plans;
  std::vector<HolderFunction> targets;
  for (auto b : cfg.budgets) {
    plans.push_back(plan_row(cfg, b));
    targets.push_back(make_target(cfg, b, bump_constant));
  }
  ConvergenceReport report = detail::run_rows(cfg, plans, targets, cfg.budgets, bump_constant);

  if (report.rows.size() >= min_fit_rows) {
    try {
      const FitResult fit = fit_rate(report);
      report.fitted_slope = fit.slope;
      report.intercept = fit.intercept;
      report.slope_ci = {fit.ci_low, fit.ci_high};
      report.warnings = fit.warnings;
    } catch (const configuration_error& e) {
      report.warnings.push_back(e.what());
    }
  } else {
    report.warnings.push_back("fewer than 4 budgets: no rate fitted");
  }
  return report;
}

// Export and import.

enum class Format { csv, json };

inline Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw configuration_error("unknown format '" + s + "'");
}

inline const char* csv_header() {
  return "method,d,k,alpha,gamma,mode,budget,trial,error,classical_evals,quantum_queries,random_bits,gates,seed";
}

inline std::string to_csv(const ConvergenceReport& report) {
  std::string out = csv_header();
  out += '\n';
  char buf[512];
  for (const auto& row : report.rows) {
    for (std::size_t t = 0; t < row.trials.size(); ++t) {
      const auto& tr = row.trials[t];
      std::snprintf(buf, sizeof buf, "%s,%u,%u,%.17g,%.17g,%s,%llu,%zu,%.17g,%llu,%llu,%llu,%llu,%llu\n",
                    report.method.c_str(), report.spec.d, report.spec.k, report.spec.alpha, report.spec.gamma,
                    report.mode.c_str(), static_cast<unsigned long long>(row.budget), t, tr.error,
                    static_cast<unsigned long long>(tr.ledger.classical_evals),
                    static_cast<unsigned long long>(tr.ledger.quantum_queries),
                    static_cast<unsigned long long>(tr.ledger.random_bits),
                    static_cast<unsigned long long>(tr.ledger.gates), static_cast<unsigned long long>(report.seed));
      out += buf;
    }
  }
  return out;
}

namespace detail {
inline nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }
inline double number_or_nan(const nlohmann::json& j) {
  return j.is_number() ? j.get<double>() : std::numeric_limits<double>::quiet_NaN();
}
}  // namespace detail

inline nlohmann::json to_json(const ConvergenceReport& report) {
  using nlohmann::json;
  json rows = json::array();
  for (const auto& row : report.rows) {
    json trials = json::array();
    for (const auto& t : row.trials)
      trials.push_back({{"error", t.error},
                        {"classical_evals", t.ledger.classical_evals},
                        {"quantum_queries", t.ledger.quantum_queries},
                        {"random_bits", t.ledger.random_bits},
                        {"gates", t.ledger.gates}});
    rows.push_back({{"budget", row.budget}, {"nominal_budget", row.nominal_budget}, {"trials", trials}});
  }
  return {{"method", report.method},
          {"spec", {{"d", report.spec.d}, {"k", report.spec.k}, {"alpha", report.spec.alpha}, {"gamma", report.spec.gamma}}},
          {"mode", report.mode},
          {"function", report.function},
          {"seed", report.seed},
          {"trials", report.trials},
          {"rows", rows},
          {"fitted_slope", detail::number_or_null(report.fitted_slope)},
          {"intercept", detail::number_or_null(report.intercept)},
          {"slope_ci", {detail::number_or_null(report.slope_ci.first), detail::number_or_null(report.slope_ci.second)}},
          {"metadata", report.metadata},
          {"warnings", report.warnings}};
}

inline ConvergenceReport from_json(const nlohmann::json& j) {
  ConvergenceReport r;
  r.method = j.at("method").get<std::string>();
  const auto& s = j.at("spec");
  r.spec = {s.at("d").get<unsigned>(), s.at("k").get<unsigned>(), s.at("alpha").get<double>(),
            s.at("gamma").get<double>()};
  r.mode = j.at("mode").get<std::string>();
  r.function = j.value("function", std::string{});
  r.seed = j.at("seed").get<std::uint64_t>();
  r.trials = j.at("trials").get<unsigned>();
  for (const auto& jr : j.at("rows")) {
    Row row;
    row.budget = jr.at("budget").get<std::uint64_t>();
    row.nominal_budget = jr.value("nominal_budget", row.budget);
    for (const auto& jt : jr.at("trials")) {
      TrialRecord t;
      t.error = jt.at("error").get<double>();
      t.ledger.classical_evals = jt.at("classical_evals").get<std::uint64_t>();
      t.ledger.quantum_queries = jt.at("quantum_queries").get<std::uint64_t>();
      t.ledger.random_bits = jt.at("random_bits").get<std::uint64_t>();
      t.ledger.gates = jt.at("gates").get<std::uint64_t>();
      row.trials.push_back(t);
    }
    r.rows.push_back(std::move(row));
  }
  r.fitted_slope = detail::number_or_nan(j.value("fitted_slope", nlohmann::json()));
  r.intercept = detail::number_or_nan(j.value("intercept", nlohmann::json()));
  if (j.contains("slope_ci") && j["slope_ci"].size() == 2)
    r.slope_ci = {detail::number_or_nan(j["slope_ci"][0]), detail::number_or_nan(j["slope_ci"][1])};
  if (j.contains("metadata")) r.metadata = j["metadata"].get<std::map<std::string, std::string>>();
  if (j.contains("warnings")) r.warnings = j["warnings"].get<std::vector<std::string>>();
  return r;
}

/// Parses CSV produced by to_csv. Consecutive lines with the same budget form
/// one row.
inline ConvergenceReport from_csv(std::istream& in) {
  ConvergenceReport r;
  std::string line;
  if (!std::getline(in, line) || line != csv_header()) throw io_error("CSV: missing or unexpected header");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 14) throw io_error("CSV: line " + std::to_string(lineno) + " has " + std::to_string(f.size()) + " fields");
    try {
      r.method = f[0];
      r.spec = {static_cast<unsigned>(std::stoul(f[1])), static_cast<unsigned>(std::stoul(f[2])), std::stod(f[3]),
                std::stod(f[4])};
      r.mode = f[5];
      const std::uint64_t budget = std::stoull(f[6]);
      TrialRecord t;
      t.error = std::stod(f[8]);
      t.ledger = {std::stoull(f[9]), std::stoull(f[10]), std::stoull(f[11]), std::stoull(f[12])};
      r.seed = std::stoull(f[13]);
      if (r.rows.empty() || r.rows.back().budget != budget || std::stoull(f[7]) == 0) {
        Row row;
        row.budget = budget;
        row.nominal_budget = budget;
        r.rows.push_back(row);
      }
      r.rows.back().trials.push_back(t);
    } catch (const std::logic_error&) {
      throw io_error("CSV: malformed value on line " + std::to_string(lineno));
    }
  }
  if (!r.rows.empty()) r.trials = static_cast<unsigned>(r.rows.front().trials.size());
  if (r.rows.size() >= min_fit_rows) {
    try {
      const auto fit = fit_rate(r);
      r.fitted_slope = fit.slope;
      r.intercept = fit.intercept;
      r.slope_ci = {fit.ci_low, fit.ci_high};
    } catch (const configuration_error&) {
    }
  }
  return r;
}

inline void export_report(const ConvergenceReport& report, Format format, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  if (format == Format::csv)
    out << to_csv(report);
  else
    out << to_json(report).dump(2) << '\n';
  out.flush();
  if (!out) throw io_error("write to '" + path + "' failed");
}

inline ConvergenceReport import_report(const std::string& path, Format format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "' for reading");
  if (format == Format::csv) return from_csv(in);
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw io_error("'" + path + "': " + e.what());
  }
}

}  // namespace qintlab::ratelab
