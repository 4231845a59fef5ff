#pragma once

// The integration algorithm families on Hölder classes:
//
//   integrate_deterministic  product midpoint rule
//   integrate_mc             plain Monte Carlo, or P_n f integrated exactly
//                            plus Monte Carlo on the residual
//   integrate_coin           A(f) = I(P_n f) + Monte Carlo estimate of the
//                            midpoint rule Q_N(f - P_n f) using coin flips only
//   integrate_quantum        A(f) = I(P_n f) + amplitude-estimated Q_N(f - P_n f)
//
// plus expectation_randomized_quantum for bounded random variables.
//
// Every run returns its estimate together with a ResourceLedger and the
// exact parameters it used.

#include <algorithm>
#include <bit>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "qintlab/amp_est.hpp"
#include "qintlab/holder.hpp"
#include "qintlab/quadrature.hpp"

namespace qintlab::integrators {

using holder::HolderClassSpec;
using holder::HolderFunction;

/// Query mode counts oracle calls; bit mode also pays for the index
/// register width and takes n ~ eps^-1 log eps^-1.
enum class QuantumCost { query, bit };

inline const char* to_string(QuantumCost c) { return c == QuantumCost::query ? "query" : "bit"; }

struct IntegrationParameters {
  std::uint64_t n = 0;        // interpolation points used by P_n
  std::uint64_t nodes = 0;    // N, midpoint nodes of the residual rule
  std::uint64_t samples = 0;  // Monte Carlo draws
  std::uint64_t power = 0;    // amplitude-estimation M
  double eps1 = 0.0;
  double beta = 0.0;
  double residual_bound = 0.0;  // B
  double interpolant_integral = std::numeric_limits<double>::quiet_NaN();
  /// Q_N(f - P_n f) computed classically; diagnostic only (quantum runs).
  double residual_midpoint = std::numeric_limits<double>::quiet_NaN();
  /// The stage-two estimate of the residual mean.
  double residual_estimate = std::numeric_limits<double>::quiet_NaN();
  std::string mode;
};

struct IntegrationResult {
  double estimate = 0.0;
  ResourceLedger ledger;
  IntegrationParameters params;
};

/// beta = alpha/d for k = 0, 1/d for k > 0, capped at 0.9.
inline double beta_for(const HolderClassSpec& spec) {
  const double beta = spec.k == 0 ? spec.alpha / spec.d : 1.0 / spec.d;
  return std::min(beta, 0.9);
}

/// Midpoint-node count N: the smallest l^d with N^{-beta} <= n^{-gamma} eps1
/// and N >= 4n. With `dyadic` the per-axis count is rounded up to a power of
/// two.
inline std::uint64_t residual_nodes(const HolderClassSpec& spec, std::uint64_t n, double eps1, bool dyadic = false) {
  const double beta = beta_for(spec);
  const double target = std::pow(static_cast<double>(n), -spec.gamma) * eps1;
  const double raw = std::pow(target, -1.0 / beta);
  const double per_axis_raw = std::max(std::pow(raw, 1.0 / spec.d), std::pow(4.0 * n, 1.0 / spec.d));
  if (!(per_axis_raw < 0x1.0p40)) throw domain_error("residual_nodes: node count overflow");
  auto per_axis = static_cast<std::uint64_t>(std::ceil(per_axis_raw - 1e-9));
  while (holder::detail::ipow(per_axis, spec.d) < 4 * n) ++per_axis;
  if (dyadic) per_axis = std::bit_ceil(per_axis);
  const double total = std::pow(static_cast<double>(per_axis), spec.d);
  if (!(total < 0x1.0p62)) throw domain_error("residual_nodes: node count overflow");
  return holder::detail::ipow(per_axis, spec.d);
}

inline std::uint64_t local_points(const HolderClassSpec& spec) { return holder::detail::ipow(spec.k + 1, spec.d); }

inline void check_eps1(double eps1) {
  if (!(eps1 > 0.0 && eps1 < 0.5)) throw domain_error("eps1 must lie in (0, 1/2)");
}

/// Interpolation budget for the coin method: eps1^-2 log(1/eps1).
inline std::uint64_t coin_interpolation_budget(const HolderClassSpec& spec, double eps1) {
  const double n = std::pow(eps1, -2.0) * std::log(1.0 / eps1);
  return std::max(local_points(spec), static_cast<std::uint64_t>(std::llround(n)));
}

inline std::uint64_t coin_samples(double eps1) {
  return static_cast<std::uint64_t>(std::ceil(std::pow(eps1, -2.0) - 1e-9));
}

/// Interpolation budget for the quantum method: eps1^-1 (query) or
/// eps1^-1 log(1/eps1) (bit).
inline std::uint64_t quantum_interpolation_budget(const HolderClassSpec& spec, double eps1, QuantumCost cost) {
  double n = 1.0 / eps1;
  if (cost == QuantumCost::bit) n *= std::log(1.0 / eps1);
  return std::max(local_points(spec), static_cast<std::uint64_t>(std::llround(n)));
}

/// Residuals whose probe sup is at most this are treated as zero.
inline constexpr double zero_residual_threshold = 64 * std::numeric_limits<double>::epsilon();

inline IntegrationResult integrate_deterministic(const HolderFunction& f, const HolderClassSpec& spec,
                                                 std::uint64_t cells_per_axis) {
  if (cells_per_axis < 1) throw domain_error("integrate_deterministic: need l >= 1");
  IntegrationResult r;
  r.estimate = quadrature::midpoint_rule(f, spec.d, cells_per_axis, &r.ledger);
  r.params.nodes = r.ledger.classical_evals;
  r.params.mode = "det";
  return r;
}

namespace detail {
inline std::vector<double>& uniform_point(std::vector<double>& x, Rng& rng, ResourceLedger* ledger) {
  for (auto& v : x) v = uniform01(rng, ledger);
  return x;
}
}  // namespace detail

/// Plain mode: mean of f at `samples` uniform points. Variance-reduced mode:
/// I(P_n f) with n = samples, plus the mean of f - P_n f at `samples` uniform
/// points.
inline IntegrationResult integrate_mc(const HolderFunction& f, const HolderClassSpec& spec, std::uint64_t samples,
                                      Rng& rng, bool variance_reduced) {
  if (samples < 1) throw domain_error("integrate_mc: need at least one sample");
  IntegrationResult r;
  r.params.samples = samples;
  std::vector<double> x(spec.d);
  if (!variance_reduced) {
    r.params.mode = "mc";
    double sum = 0.0;
    for (std::uint64_t i = 0; i < samples; ++i) sum += f(detail::uniform_point(x, rng, &r.ledger), &r.ledger);
    r.estimate = sum / static_cast<double>(samples);
    return r;
  }
  r.params.mode = "mcvr";
  const std::uint64_t budget = std::max(samples, local_points(spec));
  auto p = std::make_shared<const quadrature::PiecewiseInterpolant>(quadrature::interpolate(f, budget, &r.ledger));
  r.params.n = p->n_points();
  r.params.interpolant_integral = p->exact_integral();
  double sum = 0.0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    detail::uniform_point(x, rng, &r.ledger);
    sum += f(x, &r.ledger) - (*p)(x);
  }
  r.params.residual_estimate = sum / static_cast<double>(samples);
  r.estimate = r.params.interpolant_integral + r.params.residual_estimate;
  return r;
}

struct CoinOptions {
  /// Round the per-axis node count up to a power of two so every node draw
  /// costs exactly log2 N flips.
  bool dyadic_nodes = false;
};

/// Restricted Monte Carlo. n ~ eps1^-2 log(1/eps1) interpolation points,
/// N from N^-beta ~ n^-gamma eps1, and ceil(eps1^-2) residual values at
/// midpoint nodes chosen with coin flips only.
inline IntegrationResult integrate_coin(const HolderFunction& f, const HolderClassSpec& spec, double eps1,
                                        CoinStream& coin, CoinOptions options = {}) {
  check_eps1(eps1);
  IntegrationResult r;
  r.params.mode = "coin";
  r.params.eps1 = eps1;
  r.params.beta = beta_for(spec);
  auto p = std::make_shared<const quadrature::PiecewiseInterpolant>(
      quadrature::interpolate(f, coin_interpolation_budget(spec, eps1), &r.ledger));
  r.params.n = p->n_points();
  r.params.interpolant_integral = p->exact_integral();
  r.params.nodes = residual_nodes(spec, r.params.n, eps1, options.dyadic_nodes);
  r.params.samples = coin_samples(eps1);

  const std::uint64_t per_axis = holder::integer_root(r.params.nodes, spec.d);
  std::vector<double> x(spec.d);
  double sum = 0.0;
  for (std::uint64_t s = 0; s < r.params.samples; ++s) {
    std::uint64_t node = draw_uniform_index(r.params.nodes, coin, &r.ledger);
    for (unsigned a = spec.d; a-- > 0;) {
      x[a] = quadrature::cell_midpoint(node % per_axis, per_axis);
      node /= per_axis;
    }
    sum += f(x, &r.ledger) - (*p)(x);
  }
  r.params.residual_estimate = sum / static_cast<double>(r.params.samples);
  r.estimate = r.params.interpolant_integral + r.params.residual_estimate;
  return r;
}

/// Quantum integration. I(P_n f) is computed exactly; the residual
/// g = f - P_n f is mapped into [0,1] by g -> (g + B)/(2B) with
/// B = 2 * (probe sup of |g|), its midpoint rule on N nodes is estimated by
/// amplitude estimation with worst-case precision eps1, and the scaling is
/// undone. A zero residual returns I(P_n f) without any query.
inline IntegrationResult integrate_quantum(const HolderFunction& f, const HolderClassSpec& spec, double eps1,
                                           QuantumCost cost, Rng& rng,
                                           amp_est::Mode amp_mode = amp_est::Mode::analytic_distribution) {
  check_eps1(eps1);
  IntegrationResult r;
  r.params.mode = to_string(cost);
  r.params.eps1 = eps1;
  r.params.beta = beta_for(spec);
  auto p = std::make_shared<const quadrature::PiecewiseInterpolant>(
      quadrature::interpolate(f, quantum_interpolation_budget(spec, eps1, cost), &r.ledger));
  r.params.n = p->n_points();
  r.params.interpolant_integral = p->exact_integral();

  const double sup = quadrature::residual_sup(f, *p);
  if (sup <= zero_residual_threshold) {
    r.params.residual_estimate = 0.0;
    r.estimate = r.params.interpolant_integral;
    return r;
  }
  const double bound = std::max(2.0 * sup, std::numeric_limits<double>::epsilon());
  r.params.residual_bound = bound;
  r.params.nodes = residual_nodes(spec, r.params.n, eps1);
  if (r.params.nodes > (std::uint64_t{1} << 27)) throw domain_error("integrate_quantum: too many residual nodes");
  r.params.power = amp_est::power_for_precision(eps1);

  // Oracle values at the N midpoints.
  const std::uint64_t per_axis = holder::integer_root(r.params.nodes, spec.d);
  std::vector<double> values;
  if (amp_mode == amp_est::Mode::exact_simulation) values.reserve(r.params.nodes);
  double residual_sum = 0.0, oracle_sum = 0.0;
  quadrature::for_each_midpoint(spec.d, per_axis, [&](std::span<const double> x) {
    const double g = f(x) - (*p)(x);
    residual_sum += g;
    const double y = std::clamp((g + bound) / (2.0 * bound), 0.0, 1.0);
    oracle_sum += y;
    if (amp_mode == amp_est::Mode::exact_simulation) values.push_back(y);
  });
  const double n_nodes = static_cast<double>(r.params.nodes);
  r.params.residual_midpoint = residual_sum / n_nodes;

  double mean_estimate;
  if (amp_mode == amp_est::Mode::exact_simulation) {
    const amp_est::RealOracle oracle(std::move(values));
    mean_estimate = amp_est::estimate_mean(oracle, r.params.power, amp_mode, rng, &r.ledger).value;
  } else {
    const std::uint64_t padded = std::bit_ceil(r.params.nodes);
    const auto index_qubits = static_cast<unsigned>(std::countr_zero(padded));
    const double padded_mean = oracle_sum / static_cast<double>(padded);
    const double est = amp_est::estimate_amplitude_analytic(padded_mean, r.params.power, index_qubits, rng, &r.ledger);
    mean_estimate = std::clamp(est * static_cast<double>(padded) / n_nodes, 0.0, 1.0);
  }
  r.params.residual_estimate = 2.0 * bound * mean_estimate - bound;
  r.estimate = r.params.interpolant_integral + r.params.residual_estimate;
  return r;
}

struct ExpectationResult {
  double estimate = 0.0;
  /// (1/n) sum of the oracle values at the drawn points; never used by the
  /// algorithm itself.
  double sample_mean = 0.0;
  std::uint64_t n = 0;
  std::uint64_t power = 0;
  unsigned repetitions = 1;
  ResourceLedger ledger;
};

/// n = ceil(72 eps^-2).
inline std::uint64_t expectation_sample_count(double eps) {
  return static_cast<std::uint64_t>(std::ceil(72.0 / (eps * eps) - 1e-9));
}

/// Smallest odd r whose median fails with probability at most 1/8 when each
/// run fails with probability 1 - 8/pi^2.
inline unsigned expectation_repetitions() {
  const double single_failure = 1.0 - 8.0 / (std::numbers::pi * std::numbers::pi);
  unsigned r = 1;
  while (amp_est::median_failure_bound(r, single_failure) > 0.125) r += 2;
  return r;
}

/// M for the expectation algorithm: the mean of (v + 1)/2 must be found to
/// eps/6 after undoing the zero padding of the n values.
inline std::uint64_t expectation_power(double eps) {
  const std::uint64_t n = expectation_sample_count(eps);
  const double shrink = static_cast<double>(n) / static_cast<double>(std::bit_ceil(n));
  return amp_est::power_for_precision(eps / 6.0 * shrink);
}

/// Expectation of a random variable bounded by 1: draws n = ceil(72 eps^-2)
/// points with the (free) generator, queries the approximate evaluator at
/// them, and estimates the mean of the returned values to eps/3 with
/// probability at least 7/8 by median-boosted amplitude estimation.
template <class Sampler, class Oracle>
  requires std::invocable<Sampler&, Rng&>
ExpectationResult expectation_randomized_quantum(Sampler&& sampler, Oracle&& f_oracle, double eps, Rng& rng,
                                                 amp_est::Mode mode = amp_est::Mode::analytic_distribution) {
  if (!(eps > 0.0 && eps <= 0.5)) throw domain_error("expectation_randomized_quantum: eps must lie in (0, 1/2]");
  ExpectationResult r;
  r.n = expectation_sample_count(eps);
  r.power = expectation_power(eps);
  r.repetitions = expectation_repetitions();

  std::vector<double> shifted(r.n);
  double sum = 0.0;
  for (std::uint64_t i = 0; i < r.n; ++i) {
    const auto point = sampler(rng);
    const double v = std::clamp(static_cast<double>(f_oracle(point)), -1.0, 1.0);
    sum += v;
    shifted[i] = 0.5 * (v + 1.0);
  }
  r.sample_mean = sum / static_cast<double>(r.n);

  const amp_est::RealOracle oracle(std::move(shifted));
  const auto boosted = amp_est::median_boost(
      [&](Rng& g) { return amp_est::estimate_mean(oracle, r.power, mode, g, &r.ledger); }, r.repetitions, rng);
  r.estimate = 2.0 * boosted.value - 1.0;
  return r;
}

}  // namespace qintlab::integrators
