#pragma once

// Quantum mean estimation of n numbers in [0, 1].
//
// The real-number oracle R maps b_l (x) e_0 to b_l (x) (sqrt(x_l) e_0 +
// sqrt(1 - x_l) e_1). With A = R (W_p (x) I) the ancilla reads e_0 with
// probability a = mean(x). Amplitude estimation runs canonical phase
// estimation on the Grover operator Q = -A S_0 A^{-1} S_chi (S_chi negates
// the ancilla-e_0 branch), whose eigenphases are +-theta/pi with
// sin^2(theta) = a, and reports sin^2(pi j / M) for the measured register
// value j.
//
// Two modes produce the measured j:
//   exact_simulation       the full t + p + 1 qubit circuit on the simulator;
//   analytic_distribution  a draw from phase_estimation_distribution(a, M).

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "qintlab/qsim.hpp"

namespace qintlab::amp_est {

using qsim::amplitude;
using qsim::QuantumState;

enum class Mode { exact_simulation, analytic_distribution };

inline const char* to_string(Mode mode) {
  return mode == Mode::exact_simulation ? "exact" : "analytic";
}

inline bool is_power_of_two(std::uint64_t m) { return m != 0 && std::has_single_bit(m); }

inline unsigned exact_log2(std::uint64_t m) {
  if (!is_power_of_two(m)) throw domain_error("amplitude estimation: M must be a power of two");
  return static_cast<unsigned>(std::countr_zero(m));
}

/// Values x_l in [0, 1], padded with zeros up to the next power of two.
class RealOracle {
 public:
  explicit RealOracle(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw domain_error("RealOracle: n must be positive");
    for (double x : values_)
      if (!(x >= 0.0 && x <= 1.0)) throw domain_error("RealOracle: values must lie in [0, 1]");
    padded_ = std::bit_ceil(values_.size());
    index_qubits_ = static_cast<unsigned>(std::countr_zero(padded_));
  }

  std::size_t size() const { return values_.size(); }
  std::size_t padded_size() const { return padded_; }
  unsigned index_qubits() const { return index_qubits_; }
  double value(std::size_t l) const { return l < values_.size() ? values_[l] : 0.0; }
  std::span<const double> values() const { return values_; }

  /// S_n(x).
  double mean() const {
    double sum = 0.0;
    for (double x : values_) sum += x;
    return sum / static_cast<double>(values_.size());
  }

  /// Mean over the padded register, the amplitude the circuit estimates.
  double padded_mean() const { return mean() * static_cast<double>(values_.size()) / static_cast<double>(padded_); }

  /// R on a work register laid out as index 2l + ancilla.
  void rotate(std::span<amplitude> work, bool inverse) const {
    for (std::size_t l = 0; l < padded_; ++l) {
      const double c = std::sqrt(value(l)), s = std::sqrt(1.0 - value(l));
      const amplitude a0 = work[2 * l], a1 = work[2 * l + 1];
      if (!inverse) {
        work[2 * l] = c * a0 - s * a1;
        work[2 * l + 1] = s * a0 + c * a1;
      } else {
        work[2 * l] = c * a0 + s * a1;
        work[2 * l + 1] = -s * a0 + c * a1;
      }
    }
  }

 private:
  std::vector<double> values_;
  std::size_t padded_;
  unsigned index_qubits_;
};

struct MeanEstimate {
  double value;
  std::uint64_t queries_used;
  Mode mode;
};

namespace detail {

/// Hadamard on every index qubit of a 2l + ancilla work register.
inline void walsh_on_index(std::span<amplitude> work) {
  const double s = 1.0 / std::numbers::sqrt2;
  for (std::size_t half = 2; half < work.size(); half <<= 1) {
    for (std::size_t i = 0; i < work.size(); i += 2 * half) {
      for (std::size_t j = i; j < i + half; ++j) {
        const amplitude x0 = work[j], x1 = work[j + half];
        work[j] = s * (x0 + x1);
        work[j + half] = s * (x0 - x1);
      }
    }
  }
}

inline std::uint64_t grover_operator_gates(unsigned index_qubits) { return 2ULL * index_qubits + 2; }

}  // namespace detail

/// A|0>: the uniform superposition of indices with the ancilla rotated by R.
inline QuantumState prepare_state(const RealOracle& oracle, ResourceLedger* ledger = nullptr) {
  std::vector<amplitude> work(2 * oracle.padded_size(), 0.0);
  work[0] = 1.0;
  detail::walsh_on_index(work);
  oracle.rotate(work, false);
  charge_gates(ledger, oracle.index_qubits());
  charge_queries(ledger, 1);
  return QuantumState(oracle.index_qubits() + 1, std::move(work));
}

/// Probability that the ancilla (last qubit) of `work` reads e_0.
inline double ancilla_zero_probability(const QuantumState& work) {
  double p = 0.0;
  for (std::size_t i = 0; i < work.dimension(); i += 2) p += std::norm(work[i]);
  return p;
}

/// Q = -A S_0 A^{-1} S_chi on a work register, in place. The pair R, R^{-1}
/// is charged as one query.
inline void apply_grover_operator(const RealOracle& oracle, std::span<amplitude> work,
                                  ResourceLedger* ledger = nullptr) {
  for (std::size_t i = 0; i < work.size(); i += 2) work[i] = -work[i];  // S_chi
  oracle.rotate(work, true);
  detail::walsh_on_index(work);
  work[0] = -work[0];  // S_0
  detail::walsh_on_index(work);
  oracle.rotate(work, false);
  for (auto& a : work) a = -a;
  charge_queries(ledger, 1);
  charge_gates(ledger, detail::grover_operator_gates(oracle.index_qubits()));
}

/// sin^2(pi j / M).
inline double estimate_from_register(std::uint64_t j, std::uint64_t power) {
  const double s = std::sin(std::numbers::pi * static_cast<double>(j) / static_cast<double>(power));
  return s * s;
}

/// j and M - j give the same estimate; fold onto 0..M/2.
inline std::uint64_t fold_register(std::uint64_t j, std::uint64_t power) {
  return std::min(j, power - j);
}

/// Distribution of the amplitude estimate over {sin^2(pi j / M) : j = 0..M/2}.
struct PhaseDistribution {
  std::uint64_t power;
  std::vector<double> estimates;
  std::vector<double> probabilities;

  /// Probability that |estimate - a| <= radius.
  double mass_within(double a, double radius) const {
    double p = 0.0;
    for (std::size_t j = 0; j < estimates.size(); ++j)
      if (std::abs(estimates[j] - a) <= radius) p += probabilities[j];
    return p;
  }
};

namespace detail {
/// |M^{-1} sum_{c<M} e^{2 pi i c delta}|^2.
inline double fejer(double delta, std::uint64_t power) {
  const double m = static_cast<double>(power);
  const double den = std::sin(std::numbers::pi * delta);
  if (std::abs(den) < 1e-13) return 1.0;
  const double num = std::sin(std::numbers::pi * m * delta);
  return (num * num) / (m * m * den * den);
}
}  // namespace detail

/// Exact outcome distribution of t-bit phase estimation (M = 2^t) on the
/// Grover operator for amplitude a, folded to amplitude estimates.
inline PhaseDistribution phase_estimation_distribution(double a, std::uint64_t power) {
  exact_log2(power);
  if (!(a >= 0.0 && a <= 1.0)) throw domain_error("phase_estimation_distribution: a must lie in [0, 1]");
  const double omega = std::asin(std::sqrt(a)) / std::numbers::pi;
  const std::uint64_t half = power / 2;
  PhaseDistribution dist{power, {}, {}};
  dist.estimates.resize(half + 1);
  dist.probabilities.assign(half + 1, 0.0);
  for (std::uint64_t j = 0; j < power; ++j) {
    const double x = static_cast<double>(j) / static_cast<double>(power);
    const double p = 0.5 * (detail::fejer(omega - x, power) + detail::fejer(-omega - x, power));
    dist.probabilities[fold_register(j, power)] += p;
  }
  for (std::uint64_t j = 0; j <= half; ++j) dist.estimates[j] = estimate_from_register(j, power);
  return dist;
}

/// Gates charged by one phase-estimation run with t register qubits on a
/// p-qubit index register.
inline std::uint64_t phase_estimation_gates(unsigned index_qubits, std::uint64_t power) {
  const unsigned t = exact_log2(power);
  return t + index_qubits + (power - 1) * detail::grover_operator_gates(index_qubits) +
         qsim::inverse_qft_gate_count(t);
}

/// Full circuit state after the inverse Fourier transform, on
/// t + p + 1 qubits with the phase register leading.
///
/// After Hadamards on the register and the controlled powers Q^{2^i}, the
/// block of register value c holds Q^c A|0> / sqrt(M); the blocks are built
/// by repeated application of Q, which is the same unitary action.
inline QuantumState simulate_phase_estimation(const RealOracle& oracle, std::uint64_t power,
                                              ResourceLedger* ledger = nullptr) {
  const unsigned t = exact_log2(power);
  const unsigned work_qubits = oracle.index_qubits() + 1;
  if (t + work_qubits > qsim::max_qubits) throw domain_error("simulate_phase_estimation: too many qubits");

  const QuantumState prepared = prepare_state(oracle, ledger);
  charge_gates(ledger, t);

  const std::size_t block = prepared.dimension();
  std::vector<amplitude> amps(block * power);
  std::vector<amplitude> work(prepared.amplitudes().begin(), prepared.amplitudes().end());
  const double scale = 1.0 / std::sqrt(static_cast<double>(power));
  for (std::uint64_t c = 0; c < power; ++c) {
    if (c > 0) apply_grover_operator(oracle, work, ledger);
    for (std::size_t i = 0; i < block; ++i) amps[c * block + i] = scale * work[i];
  }
  QuantumState state(t + work_qubits, std::move(amps));
  return qsim::inverse_qft(std::move(state), 1, t, ledger);
}

/// Folded register distribution read off a simulated circuit state.
inline PhaseDistribution exact_outcome_distribution(const RealOracle& oracle, std::uint64_t power) {
  const QuantumState state = simulate_phase_estimation(oracle, power);
  const std::size_t block = 2 * oracle.padded_size();
  PhaseDistribution dist{power, {}, {}};
  dist.estimates.resize(power / 2 + 1);
  dist.probabilities.assign(power / 2 + 1, 0.0);
  for (std::size_t i = 0; i < state.dimension(); ++i)
    dist.probabilities[fold_register(i / block, power)] += std::norm(state[i]);
  for (std::uint64_t j = 0; j <= power / 2; ++j) dist.estimates[j] = estimate_from_register(j, power);
  return dist;
}

/// Draws one folded outcome index from `dist` with a single uniform variate.
inline std::uint64_t sample_outcome(const PhaseDistribution& dist, Rng& rng, ResourceLedger* ledger = nullptr) {
  const double u = uniform01(rng, ledger);
  double cumulative = 0.0;
  std::uint64_t last = 0;
  for (std::size_t j = 0; j < dist.probabilities.size(); ++j) {
    if (dist.probabilities[j] <= 0.0) continue;
    last = j;
    cumulative += dist.probabilities[j];
    if (u < cumulative) return j;
  }
  return last;
}

/// Analytic-mode estimate of an amplitude a known to the simulator. Charges
/// the same queries and gates the circuit would.
inline double estimate_amplitude_analytic(double amplitude_value, std::uint64_t power, unsigned index_qubits,
                                          Rng& rng, ResourceLedger* ledger = nullptr) {
  const PhaseDistribution dist = phase_estimation_distribution(std::clamp(amplitude_value, 0.0, 1.0), power);
  const std::uint64_t j = sample_outcome(dist, rng, ledger);
  charge_queries(ledger, power);
  charge_gates(ledger, phase_estimation_gates(index_qubits, power));
  return dist.estimates[j];
}

/// Mean of the oracle's values. Uses M - 1 Grover-operator applications plus
/// the state preparation, so queries_used = M.
inline MeanEstimate estimate_mean(const RealOracle& oracle, std::uint64_t power, Mode mode, Rng& rng,
                                  ResourceLedger* ledger = nullptr) {
  exact_log2(power);
  ResourceLedger local;
  double padded_estimate;
  if (mode == Mode::exact_simulation) {
    const QuantumState state = simulate_phase_estimation(oracle, power, &local);
    const std::uint64_t outcome = qsim::measure(state, rng, &local);
    padded_estimate = estimate_from_register(outcome / (2 * oracle.padded_size()), power);
  } else {
    padded_estimate = estimate_amplitude_analytic(oracle.padded_mean(), power, oracle.index_qubits(), rng, &local);
  }
  if (ledger) *ledger += local;
  const double rescale = static_cast<double>(oracle.padded_size()) / static_cast<double>(oracle.size());
  return {std::clamp(padded_estimate * rescale, 0.0, 1.0), local.quantum_queries, mode};
}

/// Worst-case single-run error bound 2 pi sqrt(a(1 - a))/M + pi^2/M^2 at a = 1/2.
inline double worst_case_precision(std::uint64_t power) {
  const double m = static_cast<double>(power);
  return std::numbers::pi / m + std::numbers::pi * std::numbers::pi / (m * m);
}

/// Error bound 2 pi sqrt(a(1 - a))/M + pi^2/M^2, holding with probability
/// at least 8/pi^2.
inline double error_bound(double a, std::uint64_t power) {
  const double m = static_cast<double>(power);
  return 2.0 * std::numbers::pi * std::sqrt(a * (1.0 - a)) / m + std::numbers::pi * std::numbers::pi / (m * m);
}

/// Smallest power of two M whose worst-case bound is at most `precision`.
inline std::uint64_t power_for_precision(double precision) {
  if (!(precision > 0.0)) throw domain_error("power_for_precision: precision must be positive");
  std::uint64_t power = 1;
  while (worst_case_precision(power) > precision) {
    if (power >= (std::uint64_t{1} << 40)) throw domain_error("power_for_precision: precision too small");
    power <<= 1;
  }
  return power;
}

/// Median of r independent single-run estimates; queries are summed.
inline MeanEstimate median_boost(const std::function<MeanEstimate(Rng&)>& single_run, unsigned repetitions,
                                 Rng& rng) {
  if (repetitions % 2 == 0) throw domain_error("median_boost: repetitions must be odd");
  std::vector<double> values;
  values.reserve(repetitions);
  std::uint64_t queries = 0;
  Mode mode = Mode::analytic_distribution;
  for (unsigned i = 0; i < repetitions; ++i) {
    const MeanEstimate run = single_run(rng);
    values.push_back(run.value);
    queries += run.queries_used;
    mode = run.mode;
  }
  std::nth_element(values.begin(), values.begin() + repetitions / 2, values.end());
  return {values[repetitions / 2], queries, mode};
}

/// Pr[Binomial(r, p) >= ceil(r/2)]: failure probability of the median of r
/// runs that each fail with probability at most p.
inline double median_failure_bound(unsigned repetitions, double p) {
  const unsigned need = (repetitions + 1) / 2;
  double total = 0.0;
  for (unsigned k = need; k <= repetitions; ++k) {
    double log_binom = std::lgamma(repetitions + 1.0) - std::lgamma(k + 1.0) - std::lgamma(repetitions - k + 1.0);
    total += std::exp(log_binom + k * std::log(p) + (repetitions - k) * std::log1p(-p));
  }
  return total;
}

}  // namespace qintlab::amp_est
