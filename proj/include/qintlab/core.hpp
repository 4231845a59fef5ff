#pragma once

// Shared plumbing: error types, the resource ledger and seeded random streams.

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace qintlab {

/// Raised when an argument violates a documented precondition (index out of
/// range, wrong dimension, budget too small, ...).
using domain_error = std::domain_error;

/// Raised when a constructed object fails an algebraic check such as
/// unitarity or normalization.
class validation_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by the experiment harness and CLI for unusable configurations.
class configuration_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cost counters for one run. Every counter only ever grows.
struct ResourceLedger {
  std::uint64_t classical_evals = 0;
  std::uint64_t quantum_queries = 0;
  std::uint64_t random_bits = 0;
  std::uint64_t gates = 0;

  void add_evals(std::uint64_t n) { classical_evals += n; }
  void add_queries(std::uint64_t n) { quantum_queries += n; }
  void add_random_bits(std::uint64_t n) { random_bits += n; }
  void add_gates(std::uint64_t n) { gates += n; }

  ResourceLedger& operator+=(const ResourceLedger& other) {
    classical_evals += other.classical_evals;
    quantum_queries += other.quantum_queries;
    random_bits += other.random_bits;
    gates += other.gates;
    return *this;
  }

  friend bool operator==(const ResourceLedger&, const ResourceLedger&) = default;
};

inline void charge_evals(ResourceLedger* ledger, std::uint64_t n) {
  if (ledger) ledger->add_evals(n);
}
inline void charge_queries(ResourceLedger* ledger, std::uint64_t n) {
  if (ledger) ledger->add_queries(n);
}
inline void charge_random_bits(ResourceLedger* ledger, std::uint64_t n) {
  if (ledger) ledger->add_random_bits(n);
}
inline void charge_gates(ResourceLedger* ledger, std::uint64_t n) {
  if (ledger) ledger->add_gates(n);
}

using Rng = std::mt19937_64;

/// Bits drawn from the engine per uniform variate.
inline constexpr std::uint64_t bits_per_uniform = 64;

/// Uniform double in [0, 1) built from the top 53 bits of one engine draw.
/// Written out by hand so results do not depend on the standard library's
/// distribution implementation.
inline double uniform01(Rng& rng, ResourceLedger* ledger = nullptr) {
  charge_random_bits(ledger, bits_per_uniform);
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Independent stream for (seed, a, b), used to split trials across threads
/// without the result depending on scheduling.
inline Rng derive_stream(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return Rng(seq);
}

/// Fair coin source that counts every flip. The only randomness available to
/// restricted Monte Carlo methods.
class CoinStream {
 public:
  explicit CoinStream(std::uint64_t seed) : rng_(seed) {}
  explicit CoinStream(Rng rng) : rng_(std::move(rng)) {}

  bool flip() {
    if (available_ == 0) {
      buffer_ = rng_();
      available_ = 64;
    }
    bool bit = buffer_ & 1U;
    buffer_ >>= 1;
    --available_;
    ++flips_;
    return bit;
  }

  /// Reads `bits` flips as an unsigned integer, most significant first.
  std::uint64_t read_bits(unsigned bits) {
    std::uint64_t value = 0;
    for (unsigned i = 0; i < bits; ++i) value = (value << 1) | static_cast<std::uint64_t>(flip());
    return value;
  }

  std::uint64_t flips() const { return flips_; }

 private:
  Rng rng_;
  std::uint64_t buffer_ = 0;
  unsigned available_ = 0;
  std::uint64_t flips_ = 0;
};

/// Uniform index in [0, count) from coin flips: draws ceil(log2 count) bits
/// and rejects values >= count. Charges the flips to `ledger`.
inline std::uint64_t draw_uniform_index(std::uint64_t count, CoinStream& coin,
                                        ResourceLedger* ledger = nullptr) {
  if (count == 0) throw domain_error("draw_uniform_index: empty range");
  unsigned bits = 0;
  while ((std::uint64_t{1} << bits) < count) ++bits;
  for (;;) {
    std::uint64_t before = coin.flips();
    std::uint64_t value = coin.read_bits(bits);
    charge_random_bits(ledger, coin.flips() - before);
    if (value < count) return value;
  }
}

}  // namespace qintlab
