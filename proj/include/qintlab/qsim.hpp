#pragma once

// Dense state-vector simulator for pure states of m qubits.
//
// Basis index l corresponds to the bit string (i_1, ..., i_m) through
// l = sum_j i_j 2^(m-j): qubit 1 is the most significant bit. Qubit indices in
// the public API are 1-based.
//
// States are values. Every operation takes its input by value and returns the
// transformed state, so callers that no longer need the input can std::move it
// in and avoid a copy.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "qintlab/core.hpp"

namespace qintlab::qsim {

using amplitude = std::complex<double>;

inline constexpr double norm_tolerance = 1e-10;
inline constexpr double unitarity_tolerance = 1e-10;
inline constexpr unsigned max_qubits = 30;

class QuantumState;

namespace detail {
struct state_access;
}

class QuantumState {
 public:
  /// Validates dimension 2^m and unit norm (within norm_tolerance).
  QuantumState(unsigned m, std::vector<amplitude> amplitudes) : m_(m), amps_(std::move(amplitudes)) {
    if (m == 0 || m > max_qubits) throw domain_error("QuantumState: qubit count out of range");
    if (amps_.size() != (std::size_t{1} << m))
      throw domain_error("QuantumState: amplitude count must be 2^m");
    double deviation = std::abs(norm() - 1.0);
    if (!(deviation <= norm_tolerance))
      throw validation_error("QuantumState: amplitudes not normalized (deviation " +
                             std::to_string(deviation) + ")");
  }

  unsigned qubits() const { return m_; }
  std::size_t dimension() const { return amps_.size(); }
  std::span<const amplitude> amplitudes() const { return amps_; }
  const amplitude& operator[](std::size_t index) const { return amps_[index]; }

  double norm() const {
    double sum = 0.0;
    for (const auto& a : amps_) sum += std::norm(a);
    return std::sqrt(sum);
  }

 private:
  friend struct detail::state_access;
  struct unchecked_tag {};
  QuantumState(unchecked_tag, unsigned m, std::vector<amplitude> amplitudes)
      : m_(m), amps_(std::move(amplitudes)) {}

  unsigned m_;
  std::vector<amplitude> amps_;
};

namespace detail {
/// Mutable access for the structured updates implemented in this library.
struct state_access {
  static std::vector<amplitude>& amps(QuantumState& s) { return s.amps_; }
  static QuantumState make_unchecked(unsigned m, std::vector<amplitude> amps) {
    return QuantumState(QuantumState::unchecked_tag{}, m, std::move(amps));
  }
};

inline std::size_t bit_of(unsigned m, unsigned qubit) { return std::size_t{1} << (m - qubit); }
}  // namespace detail

/// Bit i_j of basis index l (qubit j, 1-based, qubit 1 most significant).
inline unsigned basis_bit(unsigned m, std::uint64_t index, unsigned qubit) {
  return static_cast<unsigned>((index >> (m - qubit)) & 1U);
}

/// Bit string (i_1, ..., i_m) of basis index l.
inline std::vector<unsigned> basis_bits(unsigned m, std::uint64_t index) {
  std::vector<unsigned> bits(m);
  for (unsigned j = 1; j <= m; ++j) bits[j - 1] = basis_bit(m, index, j);
  return bits;
}

/// Inverse of basis_bits: l = sum_j i_j 2^(m-j).
inline std::uint64_t basis_index(std::span<const unsigned> bits) {
  std::uint64_t index = 0;
  for (unsigned b : bits) index = (index << 1) | (b & 1U);
  return index;
}

inline QuantumState basis_state(unsigned m, std::uint64_t index) {
  if (m == 0 || m > max_qubits) throw domain_error("basis_state: qubit count out of range");
  if (index >= (std::uint64_t{1} << m)) throw domain_error("basis_state: index out of range");
  std::vector<amplitude> amps(std::size_t{1} << m);
  amps[index] = 1.0;
  return detail::state_access::make_unchecked(m, std::move(amps));
}

/// A unitary acting on one or two qubits, identity elsewhere.
class LocalUnitary {
 public:
  /// 2x2 matrix, row-major.
  LocalUnitary(unsigned target, std::span<const amplitude> matrix) : arity_(1), targets_{target, 0} {
    if (matrix.size() != 4) throw domain_error("LocalUnitary: one-qubit matrix needs 4 entries");
    if (target == 0) throw domain_error("LocalUnitary: qubit indices are 1-based");
    std::copy(matrix.begin(), matrix.end(), matrix_.begin());
    check_unitary();
  }

  /// 4x4 matrix, row-major; local basis index is 2*bit(first) + bit(second).
  LocalUnitary(unsigned first, unsigned second, std::span<const amplitude> matrix)
      : arity_(2), targets_{first, second} {
    if (matrix.size() != 16) throw domain_error("LocalUnitary: two-qubit matrix needs 16 entries");
    if (first == 0 || second == 0) throw domain_error("LocalUnitary: qubit indices are 1-based");
    if (first == second) throw validation_error("LocalUnitary: targets must be distinct");
    std::copy(matrix.begin(), matrix.end(), matrix_.begin());
    check_unitary();
  }

  unsigned arity() const { return arity_; }
  unsigned target(unsigned i) const { return targets_[i]; }
  std::size_t dim() const { return std::size_t{1} << arity_; }
  const amplitude& entry(std::size_t row, std::size_t col) const { return matrix_[row * dim() + col]; }

  LocalUnitary adjoint() const {
    std::vector<amplitude> m(dim() * dim());
    for (std::size_t r = 0; r < dim(); ++r)
      for (std::size_t c = 0; c < dim(); ++c) m[r * dim() + c] = std::conj(entry(c, r));
    return arity_ == 1 ? LocalUnitary(targets_[0], m) : LocalUnitary(targets_[0], targets_[1], m);
  }

 private:
  void check_unitary() const {
    const std::size_t n = dim();
    double worst = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        amplitude sum = 0.0;
        for (std::size_t k = 0; k < n; ++k) sum += std::conj(entry(k, r)) * entry(k, c);
        worst = std::max(worst, std::abs(sum - amplitude(r == c ? 1.0 : 0.0)));
      }
    }
    if (!(worst <= unitarity_tolerance))
      throw validation_error("LocalUnitary: matrix is not unitary (deviation " + std::to_string(worst) +
                             ")");
  }

  unsigned arity_;
  std::array<unsigned, 2> targets_;
  std::array<amplitude, 16> matrix_{};
};

// Common gates.

inline LocalUnitary hadamard(unsigned q) {
  const double s = 1.0 / std::numbers::sqrt2;
  const amplitude m[] = {s, s, s, -s};
  return LocalUnitary(q, m);
}

inline LocalUnitary pauli_x(unsigned q) {
  const amplitude m[] = {0.0, 1.0, 1.0, 0.0};
  return LocalUnitary(q, m);
}

inline LocalUnitary phase_gate(unsigned q, double angle) {
  const amplitude m[] = {1.0, 0.0, 0.0, std::polar(1.0, angle)};
  return LocalUnitary(q, m);
}

/// diag(1, 1, 1, e^{i angle}) on (control, target).
inline LocalUnitary controlled_phase(unsigned control, unsigned target, double angle) {
  std::vector<amplitude> m(16, 0.0);
  m[0] = m[5] = m[10] = 1.0;
  m[15] = std::polar(1.0, angle);
  return LocalUnitary(control, target, m);
}

inline LocalUnitary swap_gate(unsigned a, unsigned b) {
  std::vector<amplitude> m(16, 0.0);
  m[0] = m[6] = m[9] = m[15] = 1.0;
  return LocalUnitary(a, b, m);
}

/// Applies u to the targeted qubits; charges one gate.
inline QuantumState apply_local_unitary(QuantumState state, const LocalUnitary& u,
                                        ResourceLedger* ledger = nullptr) {
  const unsigned m = state.qubits();
  for (unsigned i = 0; i < u.arity(); ++i)
    if (u.target(i) > m) throw domain_error("apply_local_unitary: target qubit out of range");

  auto& amps = detail::state_access::amps(state);
  const std::size_t n = amps.size();
  if (u.arity() == 1) {
    const std::size_t bit = detail::bit_of(m, u.target(0));
    const amplitude a = u.entry(0, 0), b = u.entry(0, 1), c = u.entry(1, 0), d = u.entry(1, 1);
    for (std::size_t i = 0; i < n; ++i) {
      if (i & bit) continue;
      const amplitude x0 = amps[i], x1 = amps[i | bit];
      amps[i] = a * x0 + b * x1;
      amps[i | bit] = c * x0 + d * x1;
    }
  } else {
    const std::size_t hi = detail::bit_of(m, u.target(0));
    const std::size_t lo = detail::bit_of(m, u.target(1));
    for (std::size_t i = 0; i < n; ++i) {
      if (i & (hi | lo)) continue;
      const std::size_t idx[4] = {i, i | lo, i | hi, i | hi | lo};
      amplitude in[4], out[4];
      for (int k = 0; k < 4; ++k) in[k] = amps[idx[k]];
      for (int r = 0; r < 4; ++r) {
        out[r] = 0.0;
        for (int c = 0; c < 4; ++c) out[r] += u.entry(r, c) * in[c];
      }
      for (int k = 0; k < 4; ++k) amps[idx[k]] = out[k];
    }
  }
  charge_gates(ledger, 1);
  return state;
}

/// Entry l is |beta_l|^2.
inline std::vector<double> probability_vector(const QuantumState& state) {
  std::vector<double> p(state.dimension());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(state[i]);
  return p;
}

/// Samples a basis index with probability |beta_l|^2 using one uniform draw.
inline std::uint64_t measure(const QuantumState& state, Rng& rng, ResourceLedger* ledger = nullptr) {
  const double u = uniform01(rng, ledger);
  double cumulative = 0.0;
  std::uint64_t last_nonzero = 0;
  for (std::size_t i = 0; i < state.dimension(); ++i) {
    const double p = std::norm(state[i]);
    if (p == 0.0) continue;
    last_nonzero = i;
    cumulative += p;
    if (u < cumulative) return i;
  }
  // u landed in the rounding gap above the accumulated mass.
  return last_nonzero;
}

// Structured operators. Each is charged as the number of <=2-qubit gates it
// stands for.

/// W_m: Hadamard on every qubit, via the in-place fast Walsh-Hadamard
/// butterfly. Charged m gates.
inline void walsh_hadamard_inplace(std::span<amplitude> amps) {
  const double s = 1.0 / std::numbers::sqrt2;
  for (std::size_t half = 1; half < amps.size(); half <<= 1) {
    for (std::size_t i = 0; i < amps.size(); i += 2 * half) {
      for (std::size_t j = i; j < i + half; ++j) {
        const amplitude x0 = amps[j], x1 = amps[j + half];
        amps[j] = s * (x0 + x1);
        amps[j + half] = s * (x0 - x1);
      }
    }
  }
}

inline QuantumState apply_walsh_hadamard(QuantumState state, ResourceLedger* ledger = nullptr) {
  walsh_hadamard_inplace(detail::state_access::amps(state));
  charge_gates(ledger, state.qubits());
  return state;
}

/// Negates the amplitude of b_0 (S_0). Charged one gate.
inline QuantumState apply_zero_reflection(QuantumState state, ResourceLedger* ledger = nullptr) {
  detail::state_access::amps(state)[0] *= -1.0;
  charge_gates(ledger, 1);
  return state;
}

/// Multiplies every amplitude by -1. A global phase; not charged.
inline QuantumState negate(QuantumState state) {
  for (auto& a : detail::state_access::amps(state)) a = -a;
  return state;
}

/// psi (x) phi on m + k qubits; psi occupies the leading qubits.
inline QuantumState tensor(const QuantumState& psi, const QuantumState& phi) {
  const unsigned m = psi.qubits() + phi.qubits();
  if (m > max_qubits) throw domain_error("tensor: too many qubits");
  std::vector<amplitude> amps(psi.dimension() * phi.dimension());
  for (std::size_t i = 0; i < psi.dimension(); ++i)
    for (std::size_t j = 0; j < phi.dimension(); ++j) amps[i * phi.dimension() + j] = psi[i] * phi[j];
  return detail::state_access::make_unchecked(m, std::move(amps));
}

/// Inverse quantum Fourier transform on `count` consecutive qubits starting
/// at `first`, built from Hadamards, controlled phases and swaps. Maps
/// M^{-1/2} sum_c e^{2 pi i c j / M} |c> to |j>, M = 2^count, where the
/// register value c reads qubit `first` as its most significant bit.
inline QuantumState inverse_qft(QuantumState state, unsigned first, unsigned count,
                                ResourceLedger* ledger = nullptr) {
  if (count == 0) return state;
  if (first == 0 || first + count - 1 > state.qubits())
    throw domain_error("inverse_qft: register out of range");
  const unsigned last = first + count - 1;
  for (unsigned i = 0; i < count / 2; ++i)
    state = apply_local_unitary(std::move(state), swap_gate(first + i, last - i), ledger);
  for (unsigned i = last + 1; i-- > first;) {
    for (unsigned j = last; j > i; --j) {
      const double angle = -2.0 * std::numbers::pi / static_cast<double>(std::uint64_t{1} << (j - i + 1));
      state = apply_local_unitary(std::move(state), controlled_phase(j, i, angle), ledger);
    }
    state = apply_local_unitary(std::move(state), hadamard(i), ledger);
  }
  return state;
}

/// Number of gates charged by inverse_qft on `count` qubits.
inline std::uint64_t inverse_qft_gate_count(unsigned count) {
  return count + static_cast<std::uint64_t>(count) * (count - 1) / 2 + count / 2;
}

}  // namespace qintlab::qsim
