#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "twoway/commlab.hpp"
#include "twoway/compiler.hpp"
#include "twoway/handcrafted.hpp"

using namespace twoway;

namespace {

Bits B(const char* s) { return parse_bits(s); }

// Independent D^cc lower bound: log2 of the number of distinct rows/columns
// is a lower bound (rank over the reals is not needed for these tiny cases).
std::size_t fooling_lower_bound_eq(std::size_t k) { return k + 1; }

}  // namespace

TEST(Extract, EqDfaOneCrossing) {
  const auto m = build_eq_dfa(4);
  const auto x = B("0110");
  const auto p = extract_protocol(m, x, x);
  EXPECT_TRUE(p.output);
  EXPECT_EQ(p.transcript.crossings, 1u);
  EXPECT_EQ(p.transcript.total_bits(), static_cast<std::size_t>(std::ceil(declared_space(m))) + 1);
  EXPECT_EQ(p.certificate_violations, 0u);
  EXPECT_EQ(p.transcript.messages.back().what, "output");
  EXPECT_EQ(p.transcript.messages.back().bits, 1u);
}

TEST(Extract, DfaOutcomeMatchesMonolithic) {
  for (std::size_t n = 1; n <= 5; ++n) {
    const auto m = build_eq_dfa(n);
    for (std::size_t a = 0; a < (std::size_t{1} << n); ++a)
      for (std::size_t b = 0; b < (std::size_t{1} << n); ++b) {
        const auto x = bits_of(a, n), y = bits_of(b, n);
        const auto p = extract_protocol(m, x, y);
        const auto r = run_dfa(m, lifted_word(x, y));
        ASSERT_EQ(p.output, r.outcome == Outcome::Accept);
        ASSERT_EQ(p.steps, r.trace.steps);
        ASSERT_LE(p.transcript.crossings * n, p.steps);
        ASSERT_EQ(p.certificate_violations, 0u);
      }
  }
}

TEST(Extract, PfaDistributionMatches) {
  const auto m = build_eq_pfa(5);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = random_bits(5, rng), y = trial % 3 ? random_bits(5, rng) : x;
    const auto p = extract_protocol(m, x, y);
    EXPECT_NEAR(p.accept_probability, detail::to_double(eq_pfa_exact_prob(5, x, y)), 1e-12);
    EXPECT_EQ(p.branches, PrimeTable(5).count());
    EXPECT_EQ(p.certificate_violations, 0u);
  }
}

TEST(Extract, PfaSampleSharesTheRandomStream) {
  const auto m = build_eq_pfa(4);
  const auto x = B("0000"), y = B("1100");
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto p = extract_protocol_sample(m, x, y, seed);
    const auto r = run_pfa_sample(m, lifted_word(x, y), seed);
    ASSERT_EQ(p.output, r.outcome == Outcome::Accept) << seed;
    ASSERT_EQ(p.steps, r.trace.steps);
  }
}

TEST(Extract, CompiledGroverMatchesMonolithic) {
  const auto r = compile_query_to_qcfa(grover_or(8), fn::and1());
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = random_bits(8, rng), y = random_bits(8, rng);
    const auto p = extract_protocol(*r.machine, x, y);
    const auto e = run_qcfa_exact(*r.machine, lifted_word(x, y));
    EXPECT_NEAR(p.accept_probability, e.accept, 1e-9);
    EXPECT_EQ(p.certificate_violations, 0u);
    EXPECT_LE(p.transcript.crossings * 8, p.steps);
    // Circular tape: one extra bit per crossing names the entry side.
    EXPECT_EQ(crossing_message_bits(*r.machine), static_cast<std::size_t>(std::ceil(declared_space(*r.machine))) + 1);
  }
}

TEST(Extract, SplitTapeKeepsHalvesPrivate) {
  const SplitTape t(B("01"), B("10"), false);
  EXPECT_EQ(t.read(Party::Alice, 1), Symbol::Zero);
  EXPECT_EQ(t.read(Party::Bob, 5), Symbol::One);  // ¢ 0 1 # # 1 0 $
  EXPECT_EQ(t.read(Party::Bob, 6), Symbol::Zero);
  EXPECT_THROW(t.read(Party::Alice, 5), SpecError);
  EXPECT_THROW(t.read(Party::Bob, 1), SpecError);
  EXPECT_EQ(t.holder_after(Party::Alice, 5), Party::Bob);
  EXPECT_EQ(t.holder_after(Party::Alice, 3), Party::Alice);
  EXPECT_EQ(t.holder_after(Party::Bob, 2), Party::Alice);
}

TEST(Composed, ConstantFunctionCostsNothing) {
  const auto tree = dt_optimal_tree(fn::constant_fn(2, false));
  const auto r = composed_protocol_cost(tree, send_block_protocol(fn::and1()), 1, B("11"), B("11"));
  EXPECT_EQ(r.bits, 0u);
  EXPECT_FALSE(r.output);
}

TEST(Composed, OrAndWithinDepthTimesGadgetCost) {
  const auto h = fn::or_fn(2);
  const auto tree = dt_optimal_tree(h);
  const auto gp = send_block_protocol(fn::and1());
  EXPECT_EQ(gp.cost, 2u);
  std::size_t worst = 0;
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b) worst = std::max(worst, composed_protocol_cost(tree, gp, 1, bits_of(a, 2), bits_of(b, 2)).bits);
  EXPECT_EQ(worst, 4u);
}

TEST(Composed, OutputMatchesComposeEvalExhaustively) {
  const std::vector<ComposedFunction> fs{{fn::or_fn(5), fn::and1()}, {fn::xor_fn(2), fn::ip(2)},
                                         {fn::ne_fn(3), fn::ip(3)}, {fn::or_fn(2), fn::ip(5)}};
  for (const auto& f : fs) {
    const auto tree = dt_optimal_tree(f.outer());
    const auto gp = send_block_protocol(f.gadget());
    const std::size_t n = f.n();
    for (std::size_t a = 0; a < (std::size_t{1} << n); ++a)
      for (std::size_t b = 0; b < (std::size_t{1} << n); ++b) {
        const auto x = bits_of(a, n), y = bits_of(b, n);
        const auto r = composed_protocol_cost(tree, gp, f.m(), x, y);
        ASSERT_EQ(r.output, compose_eval(f, x, y)) << f.name();
        ASSERT_LE(r.bits, tree.depth() * gp.cost);
      }
  }
  EXPECT_THROW(composed_protocol_cost(dt_optimal_tree(fn::or_fn(2)), send_block_protocol(fn::and1()), 1, B("1"), B("11")),
               InputError);
}

TEST(Dcc, Examples) {
  EXPECT_EQ(bruteforce_dcc(FunctionMatrix({{0, 0}, {0, 0}})), 0u);
  EXPECT_EQ(bruteforce_dcc(FunctionMatrix::eq(1)), 2u);
  EXPECT_EQ(bruteforce_dcc(FunctionMatrix::eq(2)), 3u);
  EXPECT_EQ(bruteforce_dcc(FunctionMatrix::eq(3)), fooling_lower_bound_eq(3));
}

TEST(Dcc, KnownSmallValues) {
  // Dictator on Alice's bit: Alice announces it.
  EXPECT_EQ(bruteforce_dcc(FunctionMatrix({{0, 0}, {1, 1}})), 1u);
  // AND of two bits: 2.
  EXPECT_EQ(bruteforce_dcc(FunctionMatrix({{0, 0}, {0, 1}})), 2u);
  // GT on 2-bit inputs: 3 by a fooling-set argument (4 diagonal-adjacent witnesses).
  const auto gt = FunctionMatrix::from_function(2, 2, [](BitSpan u, BitSpan v) { return value_of(u) > value_of(v); });
  EXPECT_EQ(bruteforce_dcc(gt), 3u);
}

TEST(Dcc, NeverExceedsTrivialProtocol) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t a = 1 + rng() % 3, b = 1 + rng() % 3;
    std::vector<std::vector<std::uint8_t>> cells(std::size_t{1} << a, std::vector<std::uint8_t>(std::size_t{1} << b));
    for (auto& r : cells)
      for (auto& c : r) c = rng() & 1;
    const FunctionMatrix M(cells);
    const auto d = bruteforce_dcc(M);
    EXPECT_LE(d, std::min(a, b) + 1);
    EXPECT_LE(d, a + b);
    // Transpose symmetry.
    std::vector<std::vector<std::uint8_t>> t(cells.front().size(), std::vector<std::uint8_t>(cells.size()));
    for (std::size_t i = 0; i < cells.size(); ++i)
      for (std::size_t j = 0; j < cells[i].size(); ++j) t[j][i] = cells[i][j];
    EXPECT_EQ(bruteforce_dcc(FunctionMatrix(t)), d);
  }
}

TEST(Dcc, RefusesLargeMatrices) {
  EXPECT_THROW(bruteforce_dcc(FunctionMatrix::eq(4)), RefusalError);
}

TEST(Dcc, MatrixParsing) {
  std::istringstream in("# EQ_1\n1 0\n0 1\n");
  const auto M = FunctionMatrix::parse(in);
  EXPECT_EQ(M.rows(), 2u);
  EXPECT_EQ(bruteforce_dcc(M), 2u);
  std::istringstream ragged("10\n1\n");
  EXPECT_THROW(FunctionMatrix::parse(ragged), InputError);
  std::istringstream three("1\n0\n1\n");
  EXPECT_THROW(FunctionMatrix::parse(three), InputError);
}

TEST(Fingerprint, EqualInputsAlwaysAccepted) {
  std::mt19937_64 rng(4);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto x = random_bits(10, rng);
    EXPECT_TRUE(fingerprint_protocol(x, x, seed).output);
  }
}

TEST(Fingerprint, TenBitBudgetAndError) {
  std::mt19937_64 rng(3);
  std::vector<std::pair<Bits, Bits>> pairs;
  for (int trial = 0; trial < 200; ++trial) {
    auto x = random_bits(10, rng), y = random_bits(10, rng);
    if (x == y) y[9] ^= 1;
    EXPECT_LE(fingerprint_protocol(x, y, static_cast<std::uint64_t>(trial)).total_bits(), 15u);
    pairs.emplace_back(std::move(x), std::move(y));
  }
  EXPECT_LE(fingerprint_worst_error(10, pairs), Probability(9, 25));
}

TEST(Fingerprint, BitBudgetAcrossN) {
  for (std::size_t n = 2; n <= 40; ++n) {
    const auto t = fingerprint_protocol(Bits(n, 1), Bits(n, 0), 1);
    EXPECT_LE(t.total_bits(), 2 * static_cast<std::size_t>(std::ceil(std::log2(double(n * n)))) + 1) << n;
  }
}
