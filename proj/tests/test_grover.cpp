#include "qintlab/grover.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

using namespace qintlab;
using namespace qintlab::grover;

namespace {

qsim::QuantumState uniform(unsigned m) { return qsim::apply_walsh_hadamard(qsim::basis_state(m, 0)); }

// Independent oracle: the Grover iteration restricted to the two-dimensional
// span of the marked and unmarked uniform vectors, iterated as a rotation.
double two_dim_success(std::uint64_t N, std::uint64_t t, std::uint64_t k) {
  double good = std::sqrt(double(t) / double(N));
  double bad = std::sqrt(double(N - t) / double(N));
  const double sn = good, cs = bad;  // sin theta, cos theta
  const double c2 = cs * cs - sn * sn, s2 = 2 * sn * cs;
  for (std::uint64_t i = 0; i < k; ++i) {
    const double g = s2 * bad + c2 * good;
    const double b = c2 * bad - s2 * good;
    good = g;
    bad = b;
  }
  return good * good;
}

}  // namespace

TEST(SignOracle, MarkedZeroOnUniform) {
  auto oracle = BitOracle::from_marked(2, {0});
  ResourceLedger ledger;
  auto s = sign_oracle(oracle, uniform(2), &ledger);
  EXPECT_NEAR(s[0].real(), -0.5, 1e-15);
  for (int l = 1; l < 4; ++l) EXPECT_NEAR(s[l].real(), 0.5, 1e-15);
  EXPECT_EQ(ledger.quantum_queries, 1u);
}

TEST(SignOracle, EmptyPredicateLeavesStateUnchanged) {
  BitOracle oracle(3, [](std::uint64_t) { return false; });
  auto in = uniform(3);
  auto s = sign_oracle(oracle, in);
  for (std::size_t l = 0; l < 8; ++l) EXPECT_NEAR(std::abs(s[l] - in[l]), 0.0, 1e-15);
}

TEST(SignOracle, FullPredicateIsGlobalSign) {
  BitOracle oracle(2, [](std::uint64_t) { return true; });
  const qsim::QuantumState in(2, {0.6, 0.0, qsim::amplitude(0.0, 0.8), 0.0});
  auto s = sign_oracle(oracle, in);
  for (std::size_t l = 0; l < 4; ++l) EXPECT_NEAR(std::abs(s[l] + in[l]), 0.0, 1e-15);
  EXPECT_EQ(qsim::probability_vector(s), qsim::probability_vector(in));
}

TEST(SignOracle, DimensionMismatch) {
  auto oracle = BitOracle::from_marked(2, {1});
  EXPECT_THROW(sign_oracle(oracle, uniform(3)), domain_error);
}

TEST(Analytic, Examples) {
  EXPECT_NEAR(success_probability_analytic(4, 1, 1), 1.0, 1e-15);
  EXPECT_NEAR(success_probability_analytic(16, 16, 0), 1.0, 1e-15);
  EXPECT_NEAR(success_probability_analytic(1024, 1024, 0), 1.0, 1e-15);
  const double expected = std::pow(std::sin(7.0 * std::asin(0.25)), 2);
  EXPECT_NEAR(success_probability_analytic(16, 1, 3), expected, 1e-15);
  EXPECT_NEAR(success_probability_analytic(16, 1, 3), 0.9613, 5e-5);
  EXPECT_THROW(success_probability_analytic(4, 5, 1), domain_error);
}

TEST(Analytic, MatchesTwoDimensionalRotation) {
  for (std::uint64_t N : {4u, 16u, 64u, 256u})
    for (std::uint64_t t : {1u, 2u, 4u})
      for (std::uint64_t k = 0; k <= 12; ++k)
        EXPECT_NEAR(success_probability_analytic(N, t, k), two_dim_success(N, t, k), 1e-12);
}

TEST(GroverSearch, TwoQubitsOneIterationIsCertain) {
  auto oracle = BitOracle::from_marked(2, {2});
  EXPECT_NEAR(marked_mass(oracle, grover_state(oracle, 1)), 1.0, 1e-12);
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(grover_search(oracle, rng, 1).outcome, 2u);
}

TEST(GroverSearch, ZeroIterationsIsUniform) {
  auto oracle = BitOracle::from_marked(3, {5});
  for (double p : qsim::probability_vector(grover_state(oracle, 0))) EXPECT_NEAR(p, 0.125, 1e-15);
}

TEST(GroverSearch, FourQubitsThreeIterations) {
  auto oracle = BitOracle::from_marked(4, {9});
  EXPECT_NEAR(marked_mass(oracle, grover_state(oracle, 3)), std::pow(std::sin(7.0 * std::asin(0.25)), 2), 1e-12);
}

TEST(GroverSearch, QueryAndGateAccounting) {
  for (unsigned m = 2; m <= 6; ++m) {
    auto oracle = BitOracle::from_marked(m, {1});
    Rng rng(m);
    ResourceLedger ledger;
    auto result = grover_search(oracle, rng, std::nullopt, &ledger);
    EXPECT_EQ(result.iterations, default_iterations(m));
    EXPECT_EQ(ledger.quantum_queries, result.iterations);
    // initial W_m, then per iteration S_f (1) + 2 W_m (2m) + S_0 (1)
    EXPECT_EQ(ledger.gates, m + result.iterations * (2 * m + 2));
  }
}

TEST(GroverSearch, DefaultIterations) {
  EXPECT_EQ(default_iterations(1), 1u);
  EXPECT_EQ(default_iterations(2), 1u);
  EXPECT_EQ(default_iterations(4), 3u);
  EXPECT_EQ(default_iterations(8), 12u);
  for (unsigned m = 2; m <= 10; ++m)
    EXPECT_GT(success_probability_analytic(std::uint64_t{1} << m, 1, default_iterations(m)), 0.9) << m;
}

TEST(Properties, SimulatedMatchesAnalytic) {
  for (unsigned m = 2; m <= 8; ++m) {
    for (std::uint64_t t : {1u, 2u, 4u}) {
      if (t >= (std::uint64_t{1} << m)) continue;
      std::vector<std::uint64_t> marked;
      for (std::uint64_t i = 0; i < t; ++i) marked.push_back((3 * i + 1) % (std::uint64_t{1} << m));
      auto oracle = BitOracle::from_marked(m, marked);
      auto state = grover_state(oracle, 0);
      for (std::uint64_t k = 0; k <= 12; ++k) {
        EXPECT_NEAR(marked_mass(oracle, state), success_probability_analytic(std::uint64_t{1} << m, t, k), 1e-10)
            << "m=" << m << " t=" << t << " k=" << k;
        state = grover_iteration(oracle, std::move(state));
      }
    }
  }
}

TEST(Properties, MarkedMassInvariantUnderRelabeling) {
  Rng rng(31);
  for (unsigned m = 2; m <= 6; ++m) {
    const std::uint64_t N = std::uint64_t{1} << m;
    for (std::uint64_t t = 1; t < N && t <= 5; ++t) {
      std::vector<std::uint64_t> perm(N);
      for (std::uint64_t i = 0; i < N; ++i) perm[i] = i;
      std::vector<double> reference;
      for (int rep = 0; rep < 3; ++rep) {
        std::shuffle(perm.begin(), perm.end(), rng);
        auto oracle = BitOracle::from_marked(m, {perm.begin(), perm.begin() + t});
        std::vector<double> masses;
        auto state = grover_state(oracle, 0);
        for (int k = 0; k < 5; ++k) {
          masses.push_back(marked_mass(oracle, state));
          state = grover_iteration(oracle, std::move(state));
        }
        if (reference.empty()) reference = masses;
        for (std::size_t k = 0; k < masses.size(); ++k) EXPECT_NEAR(masses[k], reference[k], 1e-12);
      }
    }
  }
}

TEST(Properties, EmpiricalSuccessMatchesAnalytic) {
  auto oracle = BitOracle::from_marked(4, {6});
  Rng rng(2);
  const int shots = 20000;
  int hits = 0;
  for (int i = 0; i < shots; ++i) hits += grover_search(oracle, rng, 2).outcome == 6;
  const double p = success_probability_analytic(16, 1, 2);
  EXPECT_NEAR(hits / double(shots), p, 4 * std::sqrt(p * (1 - p) / shots));
}
