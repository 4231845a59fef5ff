// End-to-end acceptance checks C1..C11. Prints one PASS/FAIL line per
// criterion and exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "qintlab/qintlab.hpp"

using namespace qintlab;
using holder::make_spec;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + ("failed: " + what);
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// C1: simulated marked mass vs sin^2((2k+1) theta).
Outcome c1_grover_exactness() {
  Outcome out;
  double worst = 0.0;
  for (unsigned m = 2; m <= 8; ++m) {
    for (std::uint64_t t : {1, 2, 4}) {
      // Spread the marked elements instead of taking 0..t-1.
      std::vector<std::uint64_t> marked;
      for (std::uint64_t i = 0; i < t; ++i) marked.push_back((i * 37 + 5) % (std::uint64_t{1} << m));
      const auto oracle = grover::BitOracle::from_marked(m, marked);
      if (oracle.marked_count() != t) continue;
      const double theta = std::asin(std::sqrt(double(t) / std::ldexp(1.0, m)));
      auto state = qsim::apply_walsh_hadamard(qsim::basis_state(m, 0));
      for (unsigned k = 0; k <= 12; ++k) {
        const double s = std::sin((2 * k + 1) * theta);
        worst = std::max(worst, std::abs(grover::marked_mass(oracle, state) - s * s));
        state = grover::grover_iteration(oracle, std::move(state));
      }
    }
  }
  out.require(worst <= 1e-10, "max deviation <= 1e-10");
  out.note(fmt("max |sim - analytic| = %.2e", worst));
  return out;
}

// C2: m = 2, one marked, k = 1 is certain.
Outcome c2_grover_certainty() {
  Outcome out;
  int all_ok = 0;
  double worst = 0.0;
  for (std::uint64_t target = 0; target < 4; ++target) {
    const auto oracle = grover::BitOracle::from_marked(2, {target});
    const auto state = grover::grover_state(oracle, 1);
    worst = std::max(worst, std::abs(grover::marked_mass(oracle, state) - 1.0));
    Rng rng = derive_stream(2, target);
    bool ok = true;
    for (int s = 0; s < 10000; ++s) ok &= qsim::measure(state, rng) == target;
    all_ok += ok;
  }
  out.require(worst <= 1e-12, "success probability 1 within 1e-12");
  out.require(all_ok == 4, "all 10^4 shots return the marked index");
  out.note(fmt("max |p - 1| = %.1e, %g/4 targets with 10^4 hits", worst, all_ok));
  return out;
}

// C3: amplitude estimation error law and exact-simulation agreement.
Outcome c3_amplitude_estimation() {
  Outcome out;
  const double floor_p = 8.0 / (std::numbers::pi * std::numbers::pi) - 1e-9;
  double min_mass = 1.0, max_tv = 0.0;
  for (double a : {0.1, 0.3, 0.5, 0.7}) {
    for (std::uint64_t power : {16, 64, 256}) {
      const double mm = static_cast<double>(power);
      const double bound = 2 * std::numbers::pi * std::sqrt(a * (1 - a)) / mm + std::numbers::pi * std::numbers::pi / (mm * mm);
      const auto dist = amp_est::phase_estimation_distribution(a, power);
      double mass = 0.0;
      for (std::size_t j = 0; j < dist.estimates.size(); ++j)
        if (std::abs(dist.estimates[j] - a) <= bound) mass += dist.probabilities[j];
      min_mass = std::min(min_mass, mass);

      // Four values with mean a; no padding, so the register sees a exactly.
      const amp_est::RealOracle oracle({a, a, a, a});
      const auto state = amp_est::simulate_phase_estimation(oracle, power);
      Rng rng = derive_stream(3, power, static_cast<std::uint64_t>(a * 1000));
      std::vector<double> freq(dist.probabilities.size(), 0.0);
      const int shots = 10000;
      for (int s = 0; s < shots; ++s) {
        const std::uint64_t j = qsim::measure(state, rng) / (2 * oracle.padded_size());
        freq[amp_est::fold_register(j, power)] += 1.0 / shots;
      }
      double tv = 0.0;
      for (std::size_t j = 0; j < freq.size(); ++j) tv += 0.5 * std::abs(freq[j] - dist.probabilities[j]);
      max_tv = std::max(max_tv, tv);
    }
  }
  out.require(min_mass >= floor_p, "mass within the error bound >= 8/pi^2");
  out.require(max_tv <= 0.02, "exact-simulation TV <= 0.02");
  out.note(fmt("min mass %.4f (8/pi^2 = %.4f), max TV %.4f", min_mass, floor_p + 1e-9, max_tv));
  return out;
}

// C4: smallest M (power of two) whose worst-case success probability over a
// grid of means is at least 3/4, as a function of eps.
Outcome c4_query_scaling() {
  Outcome out;
  std::vector<double> grid;
  for (int i = 0; i <= 200; ++i) grid.push_back(i / 200.0);
  std::vector<double> log_inv_eps, log_m, products;
  std::string list;
  for (int e = 3; e <= 8; ++e) {
    const double eps = std::ldexp(1.0, -e);
    std::uint64_t found = 0;
    for (std::uint64_t power = 2; power <= (1u << 16) && !found; power *= 2) {
      double worst = 1.0;
      for (double a : grid) {
        const auto dist = amp_est::phase_estimation_distribution(a, power);
        worst = std::min(worst, dist.mass_within(a, eps));
      }
      if (worst >= 0.75) found = power;
    }
    out.require(found != 0, "M found for eps = 2^-" + std::to_string(e));
    if (!found) continue;
    // Empirical confirmation at the chosen M on the hardest region a = 1/2.
    Rng rng = derive_stream(4, e);
    int ok = 0;
    for (int t = 0; t < 2000; ++t) ok += std::abs(amp_est::estimate_amplitude_analytic(0.5, found, 4, rng) - 0.5) <= eps;
    out.require(ok >= 1500, "empirical frequency >= 3/4 at a = 1/2");
    log_inv_eps.push_back(std::log(1 / eps));
    log_m.push_back(std::log(double(found)));
    products.push_back(double(found) * eps);
    list += (list.empty() ? "" : ",") + std::to_string(found);
  }
  const auto [lo, hi] = std::minmax_element(products.begin(), products.end());
  const auto [slope, intercept] = ratelab::detail::ols(log_inv_eps, log_m);
  (void)intercept;
  out.require(*hi / *lo <= 4.0, "M * eps within a factor 4");
  out.note("M = {" + list + "}" + fmt(" for eps = 2^-3..2^-8, max/min of M eps = %.2f, log-log slope %.3f", *hi / *lo, slope));
  return out;
}

ratelab::RunConfig sweep(ratelab::Method m, holder::HolderClassSpec spec, const std::string& fn,
                         const std::string& budgets, unsigned trials, std::uint64_t seed) {
  ratelab::RunConfig cfg;
  cfg.method = m;
  cfg.spec = spec;
  cfg.function = fn;
  cfg.budgets = ratelab::parse_budgets(budgets);
  cfg.trials = trials;
  cfg.seed = seed;
  return cfg;
}

void check_slope(Outcome& out, const ratelab::ConvergenceReport& r, double target, double tol, bool ci_overlap,
                 const std::string& label) {
  const bool in_tol = std::abs(r.fitted_slope - target) <= tol;
  out.require(in_tol, label + " slope within tolerance");
  if (ci_overlap) out.require(r.slope_ci.first <= target && r.slope_ci.second >= target, label + " 95% CI must contain the target");
  out.note(label + fmt(" slope %.3f CI [%.3f, %.3f]", r.fitted_slope, r.slope_ci.first, r.slope_ci.second));
}

// C5: quantum query-mode rate on two functions.
Outcome c5_quantum_rate() {
  Outcome out;
  const auto spec = make_spec(1, 0, 1);
  for (const char* fn : {"sumsq", "exp"}) {
    const auto r = ratelab::run_convergence(sweep(ratelab::Method::quantum, spec, fn, "2^5..2^12", 20, 5));
    check_slope(out, r, -2.0, 0.3, true, fn);
  }
  return out;
}

// C6: deterministic midpoint rate -gamma on the worst-case bump family.
Outcome c6_deterministic_rate() {
  Outcome out;
  for (auto spec : {make_spec(1, 0, 1), make_spec(2, 0, 1)}) {
    const auto r = ratelab::run_convergence(sweep(ratelab::Method::det, spec, "fool", "2^4..2^14", 1, 6));
    check_slope(out, r, -spec.gamma, 0.15, false, "d=" + std::to_string(spec.d));
  }
  return out;
}

// C7: variance-reduced Monte Carlo rate -(gamma + 1/2).
Outcome c7_randomized_rate() {
  Outcome out;
  const auto spec = make_spec(1, 0, 1);
  const auto r = ratelab::run_convergence(sweep(ratelab::Method::mcvr, spec, "sumsq", "2^6..2^14", 50, 7));
  check_slope(out, r, -1.5, 0.3, false, "mcvr");
  return out;
}

// C8: coin Monte Carlo vs variance-reduced MC at equal classical evaluations,
// and exact bit cost for dyadic node counts.
Outcome c8_coin_parity() {
  Outcome out;
  const auto spec = make_spec(1, 0, 1);
  const auto f = *holder::find_in_suite(spec, "sumsq");
  const double exact = *f.exact_integral;
  const int trials = 50;
  double worst_ratio = 1.0;
  for (double eps1 : {0.1, 0.04, 0.015}) {
    std::vector<double> coin_err, vr_err;
    std::uint64_t evals = 0;
    for (int t = 0; t < trials; ++t) {
      CoinStream coin(derive_stream(8, 0, t));
      const auto rc = integrators::integrate_coin(f, spec, eps1, coin);
      coin_err.push_back(std::abs(rc.estimate - exact));
      evals = rc.ledger.classical_evals;
      out.require(rc.ledger.quantum_queries == 0, "coin uses no queries");
    }
    for (int t = 0; t < trials; ++t) {
      Rng rng = derive_stream(8, 1, t);
      const auto rv = integrators::integrate_mc(f, spec, evals / 2, rng, true);
      vr_err.push_back(std::abs(rv.estimate - exact));
    }
    const double ratio = ratelab::median_of(coin_err) / ratelab::median_of(vr_err);
    worst_ratio = std::max(worst_ratio, std::max(ratio, 1 / ratio));
    out.note(fmt("eps1 %g: evals %.0f, coin/mcvr median error ratio %.2f", eps1, double(evals), ratio));
  }
  out.require(worst_ratio <= 4.0, "error ratio within a factor 4");

  bool exact_bits = true;
  for (auto s : {make_spec(1, 0, 1), make_spec(2, 0, 1), make_spec(2, 1, 1)}) {
    const auto g = holder::test_suite(s).front();
    for (double eps1 : {0.2, 0.05}) {
      CoinStream coin(derive_stream(8, 2, s.d));
      const auto r = integrators::integrate_coin(g, s, eps1, coin, {.dyadic_nodes = true});
      const auto bits = static_cast<std::uint64_t>(std::countr_zero(r.params.nodes));
      exact_bits &= std::has_single_bit(r.params.nodes) && r.ledger.random_bits == r.params.samples * bits;
    }
  }
  out.require(exact_bits, "random bits = draws * log2 N for dyadic N");
  out.note(exact_bits ? "bits per draw = log2 N exactly" : "bit count mismatch");
  return out;
}

// C9: expectation pipeline at eps = 0.1 with a Bernoulli(0.3) sampler.
Outcome c9_expectation_pipeline() {
  Outcome out;
  const double eps = 0.1, p = 0.3;
  out.require(integrators::expectation_sample_count(eps) == 7200, "n = 7200");
  int ok = 0, cheb = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    Rng rng = derive_stream(9, t);
    const auto r = integrators::expectation_randomized_quantum([p](Rng& g) { return uniform01(g) < p; },
                                                               [](bool x) { return x ? 1.0 : 0.0; }, eps, rng);
    ok += std::abs(r.estimate - p) <= eps;
    cheb += std::abs(r.sample_mean - p) <= eps / 3;
  }
  // Chebyshev step on a worst-variance variable (+-1 fair) at eps = 0.2.
  int cheb_pm = 0;
  for (int t = 0; t < 400; ++t) {
    Rng rng = derive_stream(9, 1000 + t);
    const auto r = integrators::expectation_randomized_quantum([](Rng& g) { return uniform01(g) < 0.5; },
                                                               [](bool x) { return x ? 1.0 : -1.0; }, 0.2, rng);
    cheb_pm += std::abs(r.sample_mean) <= 0.2 / 3;
  }
  out.require(ok >= 150, ">= 150/200 within eps");
  out.require(cheb >= 0.85 * trials, "Chebyshev step >= 85% (Bernoulli)");
  out.require(cheb_pm >= 0.85 * 400, "Chebyshev step >= 85% (+-1)");
  out.note(fmt("%g/200 within eps, sample mean within eps/3 in %g/200", ok, cheb) +
           fmt(", +-1 variable at eps 0.2: %g/400", cheb_pm));
  return out;
}

// C10: midpoint rule against the adversarial bump instance.
Outcome c10_fooling_hardness() {
  Outcome out;
  int cases = 0;
  double min_margin = 1e300;
  for (auto spec : {make_spec(1, 0, 1), make_spec(1, 1, 0.5), make_spec(2, 0, 1), make_spec(2, 1, 1), make_spec(3, 0, 0.5)}) {
    for (std::uint64_t bumps_axis : {3u, 4u, 7u, 10u}) {
      const std::uint64_t n = holder::detail::ipow(bumps_axis, spec.d);
      if (n > 4096) continue;
      for (std::uint64_t l = 1; holder::detail::ipow(l, spec.d) < n; ++l) {
        const std::uint64_t b = holder::detail::ipow(l, spec.d);
        // Cells holding a midpoint node get sign 0, the rest +1.
        auto probe = holder::fooling_family(spec, n, holder::all_plus_signs(n));
        std::vector<double> signs(n, 1.0);
        std::vector<double> x(spec.d);
        for (std::uint64_t node = 0; node < b; ++node) {
          std::uint64_t rem = node;
          for (unsigned a = spec.d; a-- > 0;) {
            x[a] = quadrature::cell_midpoint(rem % l, l);
            rem /= l;
          }
          signs[probe.cell_of(x)] = 0.0;
        }
        const auto inst = holder::fooling_family(spec, n, signs, probe.c_geom);
        const auto r = integrators::integrate_deterministic(inst.as_function(), spec, l);
        const double err = std::abs(r.estimate - inst.exact_integral);
        const double need = 0.5 * double(n - b) * inst.bump_integral;
        out.require(r.ledger.classical_evals == b, "budget respected");
        if (err < need) out.require(false, "error bound d=" + std::to_string(spec.d) + " n=" + std::to_string(n) + " b=" + std::to_string(b));
        min_margin = std::min(min_margin, err / need);
        ++cases;
      }
    }
  }
  out.note(fmt("%g (class, n, b) cases, min error / (0.5 (n - b) v) = %.3f", cases, min_margin));
  return out;
}

// C11: ledger discipline over classes x suite functions.
Outcome c11_ledger_matrix() {
  Outcome out;
  int runs = 0;
  for (auto spec : {make_spec(1, 0, 1), make_spec(1, 1, 0.5), make_spec(2, 0, 1), make_spec(2, 1, 1),
                    make_spec(3, 0, 1), make_spec(1, 2, 1)}) {
    for (const auto& f : holder::test_suite(spec)) {
      for (std::uint64_t l : {1u, 3u, 8u}) {
        const auto r = integrators::integrate_deterministic(f, spec, l);
        out.require(r.ledger.random_bits == 0 && r.ledger.quantum_queries == 0 && r.ledger.gates == 0,
                    "det " + f.name + " uses no randomness or queries");
        ++runs;
      }
      for (double eps1 : {0.3, 0.1}) {
        CoinStream coin(derive_stream(11, runs));
        const auto r = integrators::integrate_coin(f, spec, eps1, coin);
        out.require(r.ledger.quantum_queries == 0 && r.ledger.gates == 0, "coin " + f.name + " uses no queries");
        out.require(r.ledger.random_bits == coin.flips(), "coin " + f.name + " charges every flip");
        ++runs;
      }
      {
        Rng rng = derive_stream(11, runs);
        const auto r = integrators::integrate_mc(f, spec, 64, rng, true);
        out.require(r.ledger.quantum_queries == 0, "mc " + f.name + " uses no queries");
        ++runs;
      }
      {
        Rng rng = derive_stream(11, runs);
        const auto r = integrators::integrate_quantum(f, spec, 0.1, integrators::QuantumCost::query, rng);
        // Randomness is only the measurement draw of each amplitude estimation.
        out.require(r.ledger.random_bits == (r.ledger.quantum_queries > 0 ? bits_per_uniform : 0),
                    "quantum " + f.name + " random bits only for measurement");
        ++runs;
      }
    }
  }
  out.note(std::to_string(runs) + " runs checked");
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"C1  grover exactness", c1_grover_exactness},
      {"C2  grover m=2 certainty", c2_grover_certainty},
      {"C3  amplitude estimation contract", c3_amplitude_estimation},
      {"C4  mean query scaling", c4_query_scaling},
      {"C5  quantum integration rate", c5_quantum_rate},
      {"C6  deterministic rate", c6_deterministic_rate},
      {"C7  variance-reduced MC rate", c7_randomized_rate},
      {"C8  coin vs MC parity", c8_coin_parity},
      {"C9  expectation pipeline", c9_expectation_pipeline},
      {"C10 fooling-family hardness", c10_fooling_hardness},
      {"C11 ledger zero-checks", c11_ledger_matrix},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s  %-34s %7.1fs  %s\n", o.pass ? "PASS" : "FAIL", name, secs, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
