// qintlab command line: grover, mean, fool, integrate, rates.
//
// Exit codes: 0 success, 1 runtime or I/O failure, 2 bad configuration.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qintlab/qintlab.hpp"

using namespace qintlab;

namespace {

holder::HolderClassSpec spec_or_config_error(unsigned d, unsigned k, double alpha) {
  try {
    return holder::make_spec(d, k, alpha);
  } catch (const domain_error& e) {
    throw configuration_error(e.what());
  }
}

amp_est::Mode parse_amp_mode(const std::string& s) {
  if (s == "exact") return amp_est::Mode::exact_simulation;
  if (s == "analytic") return amp_est::Mode::analytic_distribution;
  throw configuration_error("unknown amplitude-estimation mode '" + s + "'");
}

integrators::QuantumCost parse_cost(const std::string& s) {
  if (s == "query") return integrators::QuantumCost::query;
  if (s == "bit") return integrators::QuantumCost::bit;
  throw configuration_error("unknown cost mode '" + s + "'");
}

std::vector<double> make_signs(const std::string& kind, std::uint64_t n, Rng& rng) {
  if (kind == "all-plus") return holder::all_plus_signs(n);
  if (kind == "alternating") return holder::alternating_signs(n);
  if (kind == "random") return holder::random_signs(n, rng);
  throw configuration_error("unknown sign pattern '" + kind + "'");
}

void print_vector(const char* label, const std::vector<double>& v) {
  std::printf("%s (", label);
  for (std::size_t i = 0; i < v.size(); ++i) std::printf(i ? ", %.6g" : "%.6g", v[i]);
  std::printf(")\n");
}

void print_summary(const ratelab::ConvergenceReport& r) {
  std::printf("method %s  d=%u k=%u alpha=%g gamma=%g  mode %s  fn %s  seed %llu\n", r.method.c_str(), r.spec.d,
              r.spec.k, r.spec.alpha, r.spec.gamma, r.mode.c_str(), r.function.c_str(),
              static_cast<unsigned long long>(r.seed));
  std::printf("%12s %12s %14s %14s\n", "nominal", "budget", "median_error", "max_error");
  for (const auto& row : r.rows) {
    std::vector<double> errs;
    double worst = 0.0;
    for (const auto& t : row.trials) {
      errs.push_back(t.error);
      worst = std::max(worst, t.error);
    }
    std::printf("%12llu %12llu %14.6e %14.6e\n", static_cast<unsigned long long>(row.nominal_budget),
                static_cast<unsigned long long>(row.budget), ratelab::median_of(errs), worst);
  }
  if (std::isfinite(r.fitted_slope)) {
    std::printf("fitted slope %.4f  95%% CI [%.4f, %.4f]  target %s\n", r.fitted_slope, r.slope_ci.first,
                r.slope_ci.second, r.metadata.count("target_slope") ? r.metadata.at("target_slope").c_str() : "?");
  }
  for (const auto& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
}

int cmd_grover(unsigned m, std::uint64_t marked, std::optional<std::uint64_t> k, std::uint64_t shots,
               std::uint64_t seed) {
  if (m == 0 || m > 20) throw configuration_error("m must lie in 1..20");
  const std::uint64_t size = std::uint64_t{1} << m;
  if (marked == 0 || marked > size) throw configuration_error("marked must lie in 1..2^m");
  std::vector<std::uint64_t> chosen(marked);
  for (std::uint64_t i = 0; i < marked; ++i) chosen[i] = i;
  const auto oracle = grover::BitOracle::from_marked(m, chosen);
  const std::uint64_t iters = k.value_or(grover::default_iterations(m));

  ResourceLedger ledger;
  const auto state = grover::grover_state(oracle, iters, &ledger);
  const auto state_ledger = ledger;
  Rng rng = derive_stream(seed);
  std::uint64_t hits = 0;
  for (std::uint64_t s = 0; s < shots; ++s)
    if (oracle(qsim::measure(state, rng))) ++hits;

  std::printf("m %u  marked %llu  iterations %llu\n", m, static_cast<unsigned long long>(marked),
              static_cast<unsigned long long>(iters));
  std::printf("analytic success %.6f\n", grover::success_probability_analytic(size, marked, iters));
  std::printf("simulated mass   %.6f\n", grover::marked_mass(oracle, state));
  std::printf("empirical        %.6f  (%llu/%llu shots)\n", shots ? double(hits) / double(shots) : 0.0,
              static_cast<unsigned long long>(hits), static_cast<unsigned long long>(shots));
  std::printf("queries per run %llu  gates per run %llu\n",
              static_cast<unsigned long long>(state_ledger.quantum_queries),
              static_cast<unsigned long long>(state_ledger.gates));
  return 0;
}

int cmd_mean(std::uint64_t n, const std::string& dist, double value, double eps, const std::string& mode_name,
             unsigned trials, std::uint64_t seed, unsigned repetitions) {
  if (n == 0) throw configuration_error("n must be positive");
  if (!(eps > 0.0 && eps < 1.0)) throw configuration_error("eps must lie in (0, 1)");
  if (trials == 0) throw configuration_error("trials must be positive");
  if (repetitions % 2 == 0) throw configuration_error("repetitions must be odd");
  const auto mode = parse_amp_mode(mode_name);
  const std::uint64_t power = amp_est::power_for_precision(eps);
  if (mode == amp_est::Mode::exact_simulation && 2 * std::bit_ceil(n) * power > (std::uint64_t{1} << 24))
    throw configuration_error("exact mode needs 2 n M <= 2^24 amplitudes; use --mode analytic");

  Rng values_rng = derive_stream(seed, 1);
  std::vector<double> x(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    if (dist == "const") {
      if (!(value >= 0.0 && value <= 1.0)) throw configuration_error("value must lie in [0, 1]");
      x[i] = value;
    } else if (dist == "alternating") {
      x[i] = static_cast<double>(i % 2);
    } else if (dist == "uniform-random") {
      x[i] = uniform01(values_rng);
    } else {
      throw configuration_error("unknown distribution '" + dist + "'");
    }
  }
  const amp_est::RealOracle oracle(x);
  const double truth = oracle.mean();

  unsigned ok = 0;
  ResourceLedger total;
  for (unsigned t = 0; t < trials; ++t) {
    Rng rng = derive_stream(seed, 2, t);
    ResourceLedger ledger;
    const auto est = amp_est::median_boost(
        [&](Rng& g) { return amp_est::estimate_mean(oracle, power, mode, g, &ledger); }, repetitions, rng);
    if (std::abs(est.value - truth) <= eps) ++ok;
    total += ledger;
  }
  std::printf("n %llu  mean %.6f  eps %g  M %llu  repetitions %u  mode %s\n", static_cast<unsigned long long>(n),
              truth, eps, static_cast<unsigned long long>(power), repetitions, amp_est::to_string(mode));
  std::printf("success rate %.4f  (%u/%u within eps)\n", double(ok) / trials, ok, trials);
  std::printf("mean queries %.1f  mean gates %.1f\n", double(total.quantum_queries) / trials,
              double(total.gates) / trials);
  return 0;
}

int cmd_fool(unsigned d, unsigned k, double alpha, std::uint64_t n, const std::string& signs_kind,
             std::uint64_t seed, std::optional<double> c, unsigned resolution) {
  const auto spec = spec_or_config_error(d, k, alpha);
  const std::uint64_t per_axis = holder::integer_root(n, d);
  if (per_axis == 0 || holder::detail::ipow(per_axis, d) != n)
    throw configuration_error("n must be a perfect d-th power");
  Rng rng = derive_stream(seed);
  const auto inst = holder::fooling_family(spec, n, make_signs(signs_kind, n, rng), c);
  std::printf("bumps %llu (%llu per axis)  c_geom %.6g  height %.6e\n", static_cast<unsigned long long>(n),
              static_cast<unsigned long long>(per_axis), inst.c_geom, inst.height);
  std::printf("single bump integral v %.10e\n", inst.bump_integral);
  std::printf("exact integral       %.10e\n", inst.exact_integral);
  if (resolution == 0) resolution = static_cast<unsigned>(std::min<std::uint64_t>(8 * per_axis, 256));
  if (holder::detail::ipow(resolution, d) > (std::uint64_t{1} << 22)) {
    std::printf("membership: skipped (grid %u^%u too large)\n", resolution, d);
    return 0;
  }
  const auto rep = holder::verify_membership(inst.as_function(), resolution);
  std::printf("membership %s at resolution %u: sup %.6f  worst quotient %.6f\n", rep.pass ? "PASS" : "FAIL",
              rep.resolution, rep.sup_norm, rep.worst_ratio);
  if (!rep.witness_x.empty()) {
    print_vector("  witness x", rep.witness_x);
    print_vector("  witness y", rep.witness_y);
  }
  return 0;
}

struct HarnessArgs {
  std::string method = "det";
  unsigned d = 1, k = 0;
  double alpha = 1.0;
  std::string fn = "sumsq";
  unsigned trials = 20;
  std::uint64_t seed = 1;
  std::string mode = "query";
  std::string amp_mode = "analytic";
  std::string out;
  std::string format = "csv";
  unsigned threads = 0;
};

ratelab::RunConfig make_config(const HarnessArgs& a) {
  ratelab::RunConfig cfg;
  cfg.method = ratelab::parse_method(a.method);
  cfg.spec = spec_or_config_error(a.d, a.k, a.alpha);
  cfg.function = a.fn;
  cfg.trials = a.trials;
  cfg.seed = a.seed;
  cfg.cost = parse_cost(a.mode);
  cfg.amp_mode = parse_amp_mode(a.amp_mode);
  cfg.threads = a.threads;
  return cfg;
}

void write_out(const ratelab::ConvergenceReport& r, const HarnessArgs& a) {
  if (a.out.empty()) return;
  ratelab::export_report(r, ratelab::parse_format(a.format), a.out);
  std::printf("wrote %s\n", a.out.c_str());
}

void add_harness_options(CLI::App* sub, HarnessArgs& a) {
  sub->add_option("--method", a.method, "det|mc|mcvr|coin|quantum|rand-quantum")->required();
  sub->add_option("--d", a.d, "dimension")->capture_default_str();
  sub->add_option("--k", a.k, "smoothness order")->capture_default_str();
  sub->add_option("--alpha", a.alpha, "Hölder exponent")->capture_default_str();
  sub->add_option("--fn", a.fn, "suite function name or 'fool'")->capture_default_str();
  sub->add_option("--trials", a.trials)->capture_default_str();
  sub->add_option("--seed", a.seed)->capture_default_str();
  sub->add_option("--mode", a.mode, "quantum cost model: query|bit")->capture_default_str();
  sub->add_option("--amp-mode", a.amp_mode, "exact|analytic")->capture_default_str();
  sub->add_option("--out", a.out, "report path");
  sub->add_option("--format", a.format, "csv|json")->capture_default_str();
  sub->add_option("--threads", a.threads, "worker threads (0 = all, capped by QINTLAB_THREADS)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qintlab: quantum and classical integration experiments"};
  app.require_subcommand(1);

  unsigned g_m = 4;
  std::uint64_t g_marked = 1, g_shots = 1000, g_seed = 1;
  std::optional<std::uint64_t> g_k;
  auto* grover_cmd = app.add_subcommand("grover", "search with Grover iterations");
  grover_cmd->add_option("--m", g_m, "index qubits")->required();
  grover_cmd->add_option("--marked", g_marked, "number of marked elements")->required();
  grover_cmd->add_option("--k", g_k, "iterations (default floor(pi 2^(m/2-2)))");
  grover_cmd->add_option("--shots", g_shots)->capture_default_str();
  grover_cmd->add_option("--seed", g_seed)->capture_default_str();

  std::uint64_t m_n = 16, m_seed = 1;
  std::string m_dist = "uniform-random", m_mode = "analytic";
  double m_value = 0.5, m_eps = 0.05;
  unsigned m_trials = 100, m_reps = 1;
  auto* mean_cmd = app.add_subcommand("mean", "amplitude-estimated mean of n values");
  mean_cmd->add_option("--n", m_n)->required();
  mean_cmd->add_option("--dist", m_dist, "const|alternating|uniform-random")->capture_default_str();
  mean_cmd->add_option("--value", m_value, "value for --dist const")->capture_default_str();
  mean_cmd->add_option("--eps", m_eps)->capture_default_str();
  mean_cmd->add_option("--mode", m_mode, "exact|analytic")->capture_default_str();
  mean_cmd->add_option("--trials", m_trials)->capture_default_str();
  mean_cmd->add_option("--seed", m_seed)->capture_default_str();
  mean_cmd->add_option("--repetitions", m_reps, "odd number of runs for the median")->capture_default_str();

  unsigned f_d = 1, f_k = 0, f_res = 0;
  double f_alpha = 1.0;
  std::uint64_t f_n = 4, f_seed = 1;
  std::string f_signs = "all-plus";
  std::optional<double> f_c;
  auto* fool_cmd = app.add_subcommand("fool", "bump family used in the lower bounds");
  fool_cmd->add_option("--d", f_d)->capture_default_str();
  fool_cmd->add_option("--k", f_k)->capture_default_str();
  fool_cmd->add_option("--alpha", f_alpha)->capture_default_str();
  fool_cmd->add_option("--n", f_n, "number of bumps, a perfect d-th power")->capture_default_str();
  fool_cmd->add_option("--signs", f_signs, "all-plus|alternating|random")->capture_default_str();
  fool_cmd->add_option("--seed", f_seed)->capture_default_str();
  fool_cmd->add_option("--c", f_c, "bump constant (default: auto)");
  fool_cmd->add_option("--resolution", f_res, "membership grid per axis (default 8 per bump, max 256)");

  HarnessArgs ia;
  double i_eps1 = 0.01;
  std::optional<std::uint64_t> i_budget;
  auto* integrate_cmd = app.add_subcommand("integrate", "integrate one function at a target accuracy");
  add_harness_options(integrate_cmd, ia);
  integrate_cmd->add_option("--eps1", i_eps1, "target accuracy")->capture_default_str();
  integrate_cmd->add_option("--budget", i_budget, "plan from a cost budget instead of --eps1");

  HarnessArgs ra;
  std::string r_budgets = "2^4..2^14";
  auto* rates_cmd = app.add_subcommand("rates", "budget sweep with a fitted convergence rate");
  add_harness_options(rates_cmd, ra);
  rates_cmd->add_option("--budgets", r_budgets, "2^a..2^b, x..y (doubling) or a comma list")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*grover_cmd) return cmd_grover(g_m, g_marked, g_k, g_shots, g_seed);
    if (*mean_cmd) return cmd_mean(m_n, m_dist, m_value, m_eps, m_mode, m_trials, m_seed, m_reps);
    if (*fool_cmd) return cmd_fool(f_d, f_k, f_alpha, f_n, f_signs, f_seed, f_c, f_res);
    if (*integrate_cmd) {
      auto cfg = make_config(ia);
      ratelab::ConvergenceReport r;
      if (i_budget) {
        cfg.budgets = {*i_budget};
        r = ratelab::run_convergence(cfg);
      } else {
        r = ratelab::run_at_accuracy(cfg, i_eps1);
      }
      print_summary(r);
      write_out(r, ia);
      return 0;
    }
    if (*rates_cmd) {
      auto cfg = make_config(ra);
      cfg.budgets = ratelab::parse_budgets(r_budgets);
      const auto r = ratelab::run_convergence(cfg);
      print_summary(r);
      write_out(r, ra);
      return 0;
    }
  } catch (const configuration_error& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const domain_error& e) {
    std::fprintf(stderr, "invalid argument: %s\n", e.what());
    return 2;
  } catch (const io_error& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
