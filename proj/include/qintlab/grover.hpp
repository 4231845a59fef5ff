#pragma once

// Grover search on the state-vector simulator, plus the closed-form success
// probability used to validate it.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

#include "qintlab/qsim.hpp"

namespace qintlab::grover {

using qsim::QuantumState;

/// Boolean predicate on {0, ..., 2^m - 1}. Quantum access goes through the
/// XOR oracle Q_f(b_l (x) e_i) = b_l (x) e_{i xor f(l)} on m + 1 qubits.
class BitOracle {
 public:
  BitOracle(unsigned m, const std::function<bool(std::uint64_t)>& predicate) : m_(m) {
    if (m == 0 || m >= qsim::max_qubits) throw domain_error("BitOracle: qubit count out of range");
    marked_.resize(std::size_t{1} << m);
    for (std::size_t l = 0; l < marked_.size(); ++l) marked_[l] = predicate(l) ? 1 : 0;
  }

  static BitOracle from_marked(unsigned m, const std::vector<std::uint64_t>& marked) {
    std::vector<std::uint8_t> table(std::size_t{1} << m, 0);
    for (auto l : marked) {
      if (l >= table.size()) throw domain_error("BitOracle: marked index out of range");
      table[l] = 1;
    }
    return BitOracle(m, [&](std::uint64_t l) { return table[l] != 0; });
  }

  unsigned qubits() const { return m_; }
  std::uint64_t domain_size() const { return marked_.size(); }
  bool operator()(std::uint64_t l) const { return marked_[l] != 0; }

  std::uint64_t marked_count() const {
    std::uint64_t t = 0;
    for (auto v : marked_) t += v;
    return t;
  }

  /// One application of Q_f on m + 1 qubits (ancilla is the last qubit).
  /// Charged as one query and one gate.
  QuantumState apply_xor(QuantumState state, ResourceLedger* ledger = nullptr) const {
    if (state.qubits() != m_ + 1) throw domain_error("BitOracle: Q_f acts on m + 1 qubits");
    auto& amps = qsim::detail::state_access::amps(state);
    for (std::size_t l = 0; l < marked_.size(); ++l)
      if (marked_[l]) std::swap(amps[2 * l], amps[2 * l + 1]);
    charge_queries(ledger, 1);
    charge_gates(ledger, 1);
    return state;
  }

 private:
  unsigned m_;
  std::vector<std::uint8_t> marked_;
};

/// S_f: negates the amplitude of b_l iff f(l) = 1, using a single application
/// of Q_f to psi (x) (e_0 - e_1)/sqrt(2).
inline QuantumState sign_oracle(const BitOracle& oracle, const QuantumState& state,
                                ResourceLedger* ledger = nullptr) {
  if (state.qubits() != oracle.qubits()) throw domain_error("sign_oracle: dimension mismatch");
  const double s = 1.0 / std::numbers::sqrt2;
  const QuantumState minus(1, {s, -s});
  QuantumState extended = oracle.apply_xor(qsim::tensor(state, minus), ledger);

  // The ancilla is left in (e_0 - e_1)/sqrt(2); read the system amplitudes
  // off the e_0 branch.
  std::vector<qsim::amplitude> amps(state.dimension());
  for (std::size_t l = 0; l < amps.size(); ++l) amps[l] = extended[2 * l] / s;
  return qsim::detail::state_access::make_unchecked(state.qubits(), std::move(amps));
}

/// One Grover iteration -W_m S_0 W_m S_f. Charged 2m + 2 gates and one query.
inline QuantumState grover_iteration(const BitOracle& oracle, QuantumState state,
                                     ResourceLedger* ledger = nullptr) {
  state = sign_oracle(oracle, state, ledger);
  state = qsim::apply_walsh_hadamard(std::move(state), ledger);
  state = qsim::apply_zero_reflection(std::move(state), ledger);
  state = qsim::apply_walsh_hadamard(std::move(state), ledger);
  return qsim::negate(std::move(state));
}

/// (-W_m S_0 W_m S_f)^iterations W_m(b_0).
inline QuantumState grover_state(const BitOracle& oracle, std::uint64_t iterations,
                                 ResourceLedger* ledger = nullptr) {
  QuantumState state = qsim::apply_walsh_hadamard(qsim::basis_state(oracle.qubits(), 0), ledger);
  for (std::uint64_t i = 0; i < iterations; ++i) state = grover_iteration(oracle, std::move(state), ledger);
  return state;
}

/// floor(pi 2^(m/2 - 2)), at least 1.
inline std::uint64_t default_iterations(unsigned m) {
  const double k = std::floor(std::numbers::pi * std::exp2(0.5 * m - 2.0));
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(k));
}

/// sin^2((2k + 1) theta) with sin^2 theta = t / N.
inline double success_probability_analytic(std::uint64_t domain_size, std::uint64_t marked,
                                           std::uint64_t iterations) {
  if (domain_size == 0 || marked == 0 || marked > domain_size)
    throw domain_error("success_probability_analytic: need 1 <= t <= N");
  const double theta = std::asin(std::sqrt(static_cast<double>(marked) / static_cast<double>(domain_size)));
  const double s = std::sin((2.0 * static_cast<double>(iterations) + 1.0) * theta);
  return s * s;
}

/// Total probability of the marked set in `state`.
inline double marked_mass(const BitOracle& oracle, const QuantumState& state) {
  double mass = 0.0;
  for (std::size_t l = 0; l < state.dimension(); ++l)
    if (oracle(l)) mass += std::norm(state[l]);
  return mass;
}

struct SearchResult {
  std::uint64_t outcome;
  std::uint64_t iterations;
};

/// Runs the iteration and measures. An instance without marked elements
/// still returns a measured index; checking it classically is the caller's
/// job.
inline SearchResult grover_search(const BitOracle& oracle, Rng& rng,
                                  std::optional<std::uint64_t> iterations = std::nullopt,
                                  ResourceLedger* ledger = nullptr) {
  const std::uint64_t k = iterations.value_or(default_iterations(oracle.qubits()));
  const QuantumState state = grover_state(oracle, k, ledger);
  return {qsim::measure(state, rng, ledger), k};
}

}  // namespace qintlab::grover
