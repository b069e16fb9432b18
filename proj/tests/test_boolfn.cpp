#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "twoway/boolfn.hpp"

using namespace twoway;

namespace {

Bits B(const char* s) { return parse_bits(s); }

// Independent evaluation: materialize z first, then call h.
bool direct_eval(const BoolFunction& h, const Gadget& g, BitSpan x, BitSpan y) {
  const std::size_t m = g.width();
  Bits z;
  for (std::size_t i = 0; i < h.arity(); ++i) {
    int acc = 0;
    if (g.name() == "and1") {
      acc = x[i] & y[i];
    } else {
      for (std::size_t j = 0; j < m; ++j) acc ^= x[i * m + j] & y[i * m + j];
    }
    z.push_back(static_cast<std::uint8_t>(acc));
  }
  return h(z);
}

}  // namespace

TEST(Ip, HandEvaluations) {
  EXPECT_FALSE(eval_ip(B("11"), B("11")));
  EXPECT_TRUE(eval_ip(B("1"), B("1")));
  EXPECT_FALSE(eval_ip(B("101"), B("111")));
  EXPECT_THROW(eval_ip(B("10"), B("1")), InputError);
}

TEST(Compose, Examples) {
  const ComposedFunction or_and(fn::or_fn(2), fn::and1());
  EXPECT_FALSE(compose_eval(or_and, B("00"), B("11")));
  EXPECT_TRUE(compose_eval(or_and, B("01"), B("01")));
  const ComposedFunction xor_ip(fn::xor_fn(2), fn::ip(2));
  EXPECT_FALSE(compose_eval(xor_ip, B("1111"), B("1111")));
  EXPECT_THROW(compose_eval(or_and, B("0"), B("01")), InputError);
}

TEST(Compose, MatchesDirectEvaluationExhaustively) {
  // n = p·m up to 12 bits per side.
  const std::vector<ComposedFunction> fs{
      {fn::or_fn(6), fn::and1()}, {fn::xor_fn(4), fn::ip(3)}, {fn::ne_fn(3), fn::ip(4)}, {fn::or_fn(12), fn::and1()}};
  for (const auto& f : fs) {
    const std::size_t n = f.n();
    std::vector<Bits> all;
    for (std::size_t v = 0; v < (std::size_t{1} << n); ++v) all.push_back(bits_of(v, n));
    std::size_t mismatches = 0;
    const std::size_t stride = n >= 12 ? 7 : 1;  // full grid on one axis, thinned on the other at n = 12
    for (std::size_t a = 0; a < all.size(); ++a)
      for (std::size_t b = a % stride; b < all.size(); b += stride)
        mismatches += compose_eval(f, all[a], all[b]) != direct_eval(f.outer(), f.gadget(), all[a], all[b]);
    EXPECT_EQ(mismatches, 0u) << f.name();
  }
}

TEST(Membership, Examples) {
  EXPECT_TRUE(membership(LanguageSpec::eq(2), "01##01"));
  EXPECT_FALSE(membership(LanguageSpec::ints(2), "00##11"));
  EXPECT_FALSE(membership(LanguageSpec::eq(2), "0#0"));
  EXPECT_FALSE(membership(LanguageSpec::eq(2), ""));
  EXPECT_FALSE(membership(LanguageSpec::eq(2), "01#001"));
  EXPECT_FALSE(membership(LanguageSpec::eq(2), "01##01#"));
  EXPECT_FALSE(membership(LanguageSpec::eq(2), "0###01"));
}

TEST(Membership, LiftedAgreesWithComposeEval) {
  for (std::size_t n = 1; n <= 8; ++n) {
    const ComposedFunction f(fn::xor_fn(n), fn::and1());
    const auto L = LanguageSpec::lifted(f);
    for (std::size_t a = 0; a < (std::size_t{1} << n); ++a)
      for (std::size_t b = 0; b < (std::size_t{1} << n); ++b) {
        const auto x = bits_of(a, n), y = bits_of(b, n);
        ASSERT_EQ(membership(L, lifted_word(x, y)), compose_eval(f, x, y));
      }
  }
}

TEST(Membership, IntsAndRne) {
  EXPECT_TRUE(membership(LanguageSpec::ints(3), "011###110"));
  EXPECT_FALSE(membership(LanguageSpec::ints(3), "010###101"));
  EXPECT_TRUE(membership(language_from_id("rne", 3), "110###010"));   // z = 010
  EXPECT_FALSE(membership(language_from_id("rne", 3), "101###010"));  // z = 000
}

TEST(Ne, Examples) {
  EXPECT_FALSE(eval_ne(B("000")));
  EXPECT_TRUE(eval_ne(B("010")));
  EXPECT_TRUE(eval_ne(B("000111010")));
  EXPECT_FALSE(eval_ne(B("111111111")));
  EXPECT_THROW(eval_ne(B("0101")), InputError);
  EXPECT_THROW(eval_ne(B("")), InputError);
}

TEST(Ne, TopLevelBlocksCommute) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const Bits x = random_bits(27, rng);
    std::vector<Bits> blocks{Bits(x.begin(), x.begin() + 9), Bits(x.begin() + 9, x.begin() + 18),
                             Bits(x.begin() + 18, x.end())};
    const bool v = eval_ne(x);
    std::vector<int> order{0, 1, 2};
    do {
      Bits y;
      for (int k : order) y.insert(y.end(), blocks[k].begin(), blocks[k].end());
      ASSERT_EQ(eval_ne(y), v);
    } while (std::next_permutation(order.begin(), order.end()));
  }
}

TEST(BoolFunction, TruthTableAgreesWithEvaluator) {
  const auto h = fn::ne_fn(9);
  const auto& table = h.truth_table();
  ASSERT_TRUE(table);
  for (std::size_t v = 0; v < table->size(); ++v) ASSERT_EQ((*table)[v] != 0, eval_ne(bits_of(v, 9)));
  const auto t = BoolFunction::from_truth_table("t", 2, {0, 1, 1, 0});
  EXPECT_TRUE(t(B("10")));
  EXPECT_FALSE(t(B("11")));
  EXPECT_THROW(BoolFunction::from_truth_table("bad", 2, {0, 1}), InputError);
  EXPECT_FALSE(fn::or_fn(21).truth_table());
}

TEST(Ids, ParseAndReject) {
  EXPECT_EQ(function_from_id("or:5").arity(), 5u);
  EXPECT_EQ(function_from_id("xor", 4).arity(), 4u);
  EXPECT_EQ(gadget_from_id("ip:3").width(), 3u);
  EXPECT_EQ(gadget_from_id("and1").width(), 1u);
  EXPECT_THROW(function_from_id("nand:2"), InputError);
  EXPECT_THROW(function_from_id("or"), InputError);
  EXPECT_THROW(gadget_from_id("ip:0"), InputError);
  EXPECT_THROW(language_from_id("pal", 2), InputError);
}

TEST(DefaultGadgetWidth, CeilLog2) {
  EXPECT_EQ(default_gadget_width(1), 1u);
  EXPECT_EQ(default_gadget_width(2), 1u);
  EXPECT_EQ(default_gadget_width(5), 3u);
  EXPECT_EQ(default_gadget_width(8), 3u);
}

TEST(Bits, RoundTripsAndResidues) {
  EXPECT_EQ(to_string(bits_of(6, 4)), "0110");
  EXPECT_EQ(value_of(B("1100")), 12u);
  EXPECT_EQ(residue(B("1100"), 5), 2u);
  EXPECT_EQ(lifted_word(B("01"), B("10")), "01##10");
  EXPECT_THROW(parse_bits("01x"), InputError);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto x = random_bits(40, rng);
    EXPECT_EQ(residue(x, 97), value_of(x) % 97);
  }
}
