#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "twoway/qquery.hpp"

using namespace twoway;

namespace {

Bits B(const char* s) { return parse_bits(s); }

StateVector random_state(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  StateVector v(d);
  for (auto& a : v) a = {g(rng), g(rng)};
  const double nrm = std::sqrt(norm_squared(v));
  for (auto& a : v) a /= nrm;
  return v;
}

double max_dev(std::span<const Complex> a, std::span<const Complex> b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Dense matrix-vector product as an independent oracle for structured operators.
StateVector dense_apply(const std::vector<Complex>& M, std::span<const Complex> v) {
  const std::size_t d = v.size();
  StateVector out(d);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) out[r] += M[r * d + c] * v[c];
  return out;
}

}  // namespace

TEST(Operators, StructuredAgreeWithDenseAndAreUnitary) {
  const Layout L{5, 2, 4};
  auto table = std::make_shared<const std::vector<std::uint8_t>>(std::vector<std::uint8_t>{0, 1, 1, 0});
  const std::vector<Operator> ops{
      ops::Diffusion{L, 0},
      ops::UniformPrep{L, 0},
      ops::UniformPrep{L, 2},
      ops::ControlledXor{L, 0, 3, 2, 1},
      ops::GadgetXor{L, 0, 1, 2, 1, table},
      ops::oracle(L, 0, 1, B("10110")),
      ops::hadamard(L, 1),
      ops::pauli_x(L, 1),
      ops::sequence({ops::Diffusion{L, 0}, ops::hadamard(L, 1)}),
      extend(ops::Diffusion{Layout{5, 2}, 0}, 4),
  };
  std::mt19937_64 rng(11);
  for (const auto& op : ops) {
    EXPECT_NO_THROW(validate(op));
    const auto M = to_dense(op);
    EXPECT_LE(unitarity_defect(M, L.size()), kUnitarityTol);
    auto psi = random_state(L.size(), rng);
    const auto want = dense_apply(M, psi);
    twoway::apply(op, psi);
    EXPECT_LE(max_dev(psi, want), 1e-12);
  }
}

TEST(Operators, RejectsNonUnitaryDense) {
  EXPECT_THROW(validate(ops::dense(2, {1, 1, 0, 1})), SpecError);
  EXPECT_THROW(ops::dense(2, {1, 0, 0}), InputError);
}

TEST(Measurement, RegisterProbabilitiesSumToOne) {
  const Layout L{3, 2, 2};
  std::mt19937_64 rng(2);
  const auto psi = random_state(L.size(), rng);
  const auto m = Measurement::of_register(L, 0);
  EXPECT_NO_THROW(m.validate());
  const auto p = m.probabilities(psi);
  double total = 0;
  for (double q : p) total += q;
  EXPECT_NEAR(total, 1.0, 1e-12);
  double via_projection = 0;
  for (std::size_t k = 0; k < m.outcomes(); ++k) via_projection += norm_squared(m.project(k, psi));
  EXPECT_NEAR(via_projection, 1.0, 1e-12);
}

TEST(Measurement, ProjectorValidation) {
  const Complex h = 0.5;
  auto ok = Measurement::projectors(2, {{h, h, h, h}, {h, -h, -h, h}});
  EXPECT_NO_THROW(ok.validate());
  auto bad = Measurement::projectors(2, {{1, 0, 0, 0}, {1, 0, 0, 0}});
  EXPECT_THROW(bad.validate(), SpecError);
}

TEST(Oracle, FlipsAnswerBit) {
  const Layout L{2, 2, 3};
  auto psi = basis_state(L.size(), 1 * L.stride(0) + 0 * L.stride(1) + 2 * L.stride(2));
  apply_oracle(B("01"), psi, L);
  EXPECT_NEAR(std::abs(psi[1 * L.stride(0) + 1 * L.stride(1) + 2 * L.stride(2)]), 1.0, 1e-15);
  // z = 10: index 1 holds 0, so nothing changes there.
  auto phi = basis_state(L.size(), 0);
  apply_oracle(B("10"), phi, L);
  EXPECT_NEAR(std::abs(phi[L.stride(1)]), 1.0, 1e-15);
}

TEST(Oracle, IsAnInvolution) {
  const Layout L{6, 2, 2};
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto z = random_bits(6, rng);
    const auto psi = random_state(L.size(), rng);
    auto phi = psi;
    apply_oracle(z, phi, L);
    apply_oracle(z, phi, L);
    EXPECT_LE(max_dev(phi, psi), 1e-12);
  }
}

TEST(Oracle, PhaseKickback) {
  const std::size_t n = 4;
  const Layout L{n, 2, 1};
  const auto z = B("0110");
  StateVector psi(L.size());
  const double a = 1.0 / std::sqrt(2.0 * n);
  for (std::size_t i = 0; i < n; ++i) {
    psi[i * L.stride(0)] = a;
    psi[i * L.stride(0) + L.stride(1)] = -a;
  }
  apply_oracle(z, psi, L);
  for (std::size_t i = 0; i < n; ++i) {
    const double sign = z[i] ? -1.0 : 1.0;
    EXPECT_NEAR(psi[i * L.stride(0)].real(), sign * a, 1e-15);
    EXPECT_NEAR(psi[i * L.stride(0) + L.stride(1)].real(), -sign * a, 1e-15);
  }
}

TEST(Oracle, RejectsDimensionMismatch) {
  StateVector psi(8);
  EXPECT_THROW(apply_oracle(B("101"), psi, Layout{4, 2}), InputError);
}

TEST(Grover, Examples) {
  const auto g4 = grover_or(4);
  EXPECT_NEAR(run_query_alg(g4, B("0000")), 0.0, 1e-12);
  EXPECT_NEAR(run_query_alg(g4, B("0001")), 1.0, 1e-9);
  EXPECT_NEAR(run_query_alg(g4, B("0100")), 1.0, 1e-9);
}

TEST(Grover, OneSidedAndBoundedError) {
  std::mt19937_64 rng(8);
  for (std::size_t n : {1, 2, 3, 5, 8, 16, 33, 64}) {
    const auto g = grover_or(n);
    EXPECT_NO_THROW(g.validate());
    EXPECT_LE(run_query_alg(g, Bits(n, 0)), 1e-12) << n;
    for (int trial = 0; trial < 12; ++trial) {
      Bits z = random_bits(n, rng);
      z[rng() % n] = 1;
      EXPECT_GE(run_query_alg(g, z), 2.0 / 3.0) << n;
    }
  }
}

TEST(Grover, ExhaustiveSmallN) {
  for (std::size_t n = 1; n <= 8; ++n) {
    const auto g = grover_or(n);
    for (std::size_t v = 0; v < (std::size_t{1} << n); ++v) {
      const double p = run_query_alg(g, bits_of(v, n));
      if (v == 0) {
        ASSERT_LE(p, 1e-12);
      } else {
        ASSERT_GE(p, 2.0 / 3.0) << n << " " << v;
      }
    }
  }
}

TEST(Grover, QueryCountWithinDeclaredConstant) {
  for (std::size_t n : {4, 16, 64, 256, 1024}) {
    const auto g = grover_or(n);
    ASSERT_TRUE(g.query_constant());
    EXPECT_EQ(*g.query_constant(), kGroverQueryConstant);
    EXPECT_LE(static_cast<double>(g.calls()), kGroverQueryConstant * std::sqrt(static_cast<double>(n))) << n;
    std::size_t t = 0;
    for (auto j : grover_schedule(n)) t += j + 1;
    EXPECT_EQ(g.calls(), t);
  }
  EXPECT_THROW(grover_or(0), InputError);
}

TEST(Parity, Examples) {
  EXPECT_NEAR(run_query_alg(exact_parity(2), B("00")), 0.0, 1e-9);
  EXPECT_NEAR(run_query_alg(exact_parity(2), B("10")), 1.0, 1e-9);
  const auto p4 = exact_parity(4);
  EXPECT_EQ(p4.calls(), 2u);
  EXPECT_NEAR(run_query_alg(p4, B("1111")), 0.0, 1e-9);
  EXPECT_THROW(exact_parity(3), InputError);
}

TEST(Parity, ExactOnEveryInput) {
  for (std::size_t n = 2; n <= 10; n += 2) {
    const auto a = exact_parity(n);
    EXPECT_EQ(a.calls(), n / 2);
    for (std::size_t v = 0; v < (std::size_t{1} << n); ++v) {
      const auto z = bits_of(v, n);
      const double want = std::popcount(v) % 2;
      ASSERT_NEAR(run_query_alg(a, z), want, 1e-9) << n << " " << v;
    }
  }
}

TEST(StateAfterCalls, NormAndEndpoints) {
  const auto g = grover_or(8);
  const auto z = B("00100000");
  for (std::size_t j = 0; j <= g.calls(); ++j) {
    const auto psi = state_after_calls(g, z, j);
    EXPECT_LE(norm_squared(psi), 1.0 + 1e-9);
  }
  EXPECT_THROW(state_after_calls(g, z, g.calls() + 1), InputError);
}

TEST(DecisionTree, DepthExamples) {
  EXPECT_EQ(dt_optimal_depth(fn::constant_fn(3, true)), 0u);
  EXPECT_EQ(dt_optimal_depth(fn::dictator_fn(4, 1)), 1u);
  EXPECT_EQ(dt_optimal_depth(fn::or_fn(3)), 3u);
  EXPECT_THROW(dt_optimal_depth(fn::or_fn(11)), RefusalError);
}

TEST(DecisionTree, EvasiveFunctionsAndBound) {
  for (std::size_t p = 1; p <= 6; ++p) {
    EXPECT_EQ(dt_optimal_depth(fn::or_fn(p)), p);
    EXPECT_EQ(dt_optimal_depth(fn::xor_fn(p)), p);
  }
  // x1 ? x2 : x3 has depth 2 < 3.
  const auto mux = BoolFunction("mux", 3, [](BitSpan x) { return x[0] ? x[1] != 0 : x[2] != 0; });
  EXPECT_EQ(dt_optimal_depth(mux), 2u);
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t p = 1 + rng() % 5;
    std::vector<std::uint8_t> table(std::size_t{1} << p);
    for (auto& v : table) v = rng() & 1;
    const auto h = BoolFunction::from_truth_table("r", p, table);
    const auto tree = dt_optimal_tree(h);
    EXPECT_LE(tree.depth(), p);
    EXPECT_EQ(tree.depth(), dt_optimal_depth(h));
    for (std::size_t v = 0; v < table.size(); ++v) {
      const auto x = bits_of(v, p);
      const auto [value, path] = tree.evaluate(x);
      ASSERT_EQ(value, table[v] != 0);
      std::set<std::size_t> distinct(path.begin(), path.end());
      ASSERT_EQ(distinct.size(), path.size());
    }
  }
}

TEST(QueryAlgorithm, ValidationCatchesBadDescriptions) {
  const Layout L{2, 2, 1};
  QueryRound r;
  r.unitaries = {ops::identity(4)};
  r.measurement = Measurement::of_register(L, kAnswerReg);
  r.accepting = {0, 1};
  QueryAlgorithm ok("t0", 2, 1, basis_state(4, 0), {r}, 0.0);
  EXPECT_NO_THROW(ok.validate());
  EXPECT_EQ(ok.calls(), 0u);
  QueryAlgorithm bad_eps("e", 2, 1, basis_state(4, 0), {r}, 0.5);
  EXPECT_THROW(bad_eps.validate(), SpecError);
  QueryAlgorithm bad_init("i", 2, 1, StateVector(4, 0.0), {r}, 0.1);
  EXPECT_THROW(bad_init.validate(), SpecError);
  QueryRound nonunitary = r;
  nonunitary.unitaries = {ops::dense(4, std::vector<Complex>(16, 1.0))};
  QueryAlgorithm bad_u("u", 2, 1, basis_state(4, 0), {nonunitary}, 0.1);
  EXPECT_THROW(bad_u.validate(), SpecError);
}
