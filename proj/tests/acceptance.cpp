// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "twoway/harness.hpp"

using namespace twoway;

namespace {

// Tolerances and ranges, pinned.
constexpr double kFingerprintMaxError = 0.36;
constexpr double kCompilerTol = 1e-6;
constexpr double kExactTol = 1e-9;
constexpr double kSegmentTol = 1e-9;
constexpr double kEqDfaSlopeLo = 1.85, kEqDfaSlopeHi = 2.15;
constexpr double kEqPfaSlopeLo = 0.85, kEqPfaSlopeHi = 1.15;
constexpr double kIntsSlopeLo = 1.3, kIntsSlopeHi = 1.7;
constexpr double kSigmas = 4.0;
constexpr int kMcSamples = 10000;
constexpr std::uint64_t kSeed = 20240601;
constexpr std::size_t kSweepSamples = 16;

struct Result {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Shared across criteria 3, 6 and 7.
struct CompilerStats {
  bool time_ok = true, states_ok = true;
  std::uint64_t worst_T = 0;
  std::string first_bad;
};
CompilerStats g_compiler;
std::size_t g_sweep_violations = 0, g_sweep_runs = 0;

Result criterion1() {
  constexpr std::size_t n = 10;
  const auto m = build_eq_pfa(n);
  const PrimeTable primes(n);
  std::mt19937_64 rng(kSeed);
  std::vector<std::pair<Bits, Bits>> pairs;
  while (pairs.size() < 500) {
    auto x = random_bits(n, rng), y = random_bits(n, rng);
    if (x != y) pairs.emplace_back(std::move(x), std::move(y));
  }
  // Adversarial: x ≡ y modulo as many small primes as possible, i.e. |x - y| with the most prime divisors.
  std::vector<std::pair<std::size_t, std::uint64_t>> by_bad;
  for (std::uint64_t d = 1; d < (1u << n); ++d) {
    std::size_t bad = 0;
    for (auto p : primes.primes()) bad += d % p == 0;
    by_bad.emplace_back(bad, d);
  }
  std::sort(by_bad.rbegin(), by_bad.rend());
  std::size_t k = 0;
  for (std::size_t i = 0; pairs.size() < 550; ++i) {
    const auto d = by_bad[k].second;
    const std::uint64_t x = i % ((1u << n) - d);
    pairs.emplace_back(bits_of(x, n), bits_of(x + d, n));
    if (i % 10 == 9) ++k;
  }
  Probability worst = 0;
  for (const auto& [x, y] : pairs) worst = std::max(worst, pfa_exact_prob(m, lifted_word(x, y)));
  bool members_ok = true;
  for (int i = 0; i < 50; ++i) {
    const auto x = random_bits(n, rng);
    members_ok = members_ok && pfa_exact_prob(m, lifted_word(x, x)) == 1;
  }
  const double w = worst.convert_to<double>();
  return {w <= kFingerprintMaxError && members_ok,
          "worst non-member acceptance " + fmt("%.6g", w) + (members_ok ? ", members exactly 1" : ", a member < 1")};
}

Result criterion2() {
  const auto d1 = bruteforce_dcc(FunctionMatrix::eq(1)), d2 = bruteforce_dcc(FunctionMatrix::eq(2));
  return {d1 == 2 && d2 == 3, "D(EQ_1)=" + std::to_string(d1) + " D(EQ_2)=" + std::to_string(d2)};
}

double compiled_deviation(const QueryAlgorithm& a, const CompilationReport& r, BitSpan x, BitSpan y,
                          StateCensus<CompiledQcfa::State>& census) {
  const auto e = run_qcfa_exact(*r.machine, lifted_word(x, y), {}, &census);
  const double n = static_cast<double>(r.n), t = static_cast<double>(r.t);
  if (static_cast<double>(e.max_steps) > 8 * t * (n + 2) + 4 * (n + 2)) {
    g_compiler.time_ok = false;
    if (g_compiler.first_bad.empty()) g_compiler.first_bad = a.name() + " " + lifted_word(x, y);
  }
  g_compiler.worst_T = std::max(g_compiler.worst_T, e.max_steps);
  std::vector<std::uint8_t> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] & y[i];
  return std::abs(e.accept - run_query_alg(a, z));
}

Result criterion3() {
  double worst = 0;
  std::size_t runs = 0;
  std::mt19937_64 rng(kSeed + 3);
  for (bool parity : {false, true}) {
    for (std::size_t n : {1, 2, 3, 4, 5, 6, 16, 32, 64}) {
      if (parity && n % 2) continue;  // exact parity is defined for even n
      const auto a = parity ? exact_parity(n) : grover_or(n);
      const auto r = compile_query_to_qcfa(a, fn::and1());
      StateCensus<CompiledQcfa::State> census;
      if (n <= 6) {
        for (std::size_t u = 0; u < (std::size_t{1} << n); ++u)
          for (std::size_t v = 0; v < (std::size_t{1} << n); ++v, ++runs)
            worst = std::max(worst, compiled_deviation(a, r, bits_of(u, n), bits_of(v, n), census));
      } else {
        for (int k = 0; k < 200; ++k, ++runs) {
          const auto x = random_bits(n, rng), y = random_bits(n, rng);
          worst = std::max(worst, compiled_deviation(a, r, x, y, census));
        }
      }
      if (census.saturated() || static_cast<double>(census.size()) > r.declared_states) {
        g_compiler.states_ok = false;
        if (g_compiler.first_bad.empty()) g_compiler.first_bad = a.name() + " census";
      }
    }
  }
  return {worst <= kCompilerTol, std::to_string(runs) + " runs, max deviation " + fmt("%.3g", worst)};
}

Result criterion4() {
  double worst = 0;
  std::mt19937_64 rng(kSeed + 4);
  std::size_t runs = 0;
  for (std::size_t n : {2, 4, 8, 16}) {
    const auto r = compile_query_to_qcfa(exact_parity(n), fn::and1());
    const std::size_t trials = n <= 4 ? (std::size_t{1} << (2 * n)) : 100;
    for (std::size_t k = 0; k < trials; ++k, ++runs) {
      Bits x, y;
      if (n <= 4) {
        x = bits_of(k >> n, n);
        y = bits_of(k & ((std::size_t{1} << n) - 1), n);
      } else {
        x = random_bits(n, rng);
        y = random_bits(n, rng);
      }
      const double p = run_qcfa_exact(*r.machine, lifted_word(x, y)).accept;
      worst = std::max(worst, std::min(p, std::abs(1 - p)));
    }
  }
  return {worst <= kExactTol, std::to_string(runs) + " runs, max distance from {0,1} " + fmt("%.3g", worst)};
}

Result criterion5() {
  const auto a = grover_or(8);
  const auto r = compile_query_to_qcfa(a, fn::and1());
  std::mt19937_64 rng(kSeed + 5);
  std::uniform_int_distribution<std::size_t> pick(0, a.calls());
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    const auto x = random_bits(8, rng), y = random_bits(8, rng);
    worst = std::max(worst, verify_segment_equivalence(a, *r.machine, x, y, pick(rng)));
  }
  return {worst <= kSegmentTol, "max amplitude deviation " + fmt("%.3g", worst)};
}

Result criterion6() {
  return {g_compiler.time_ok && g_compiler.states_ok,
          "worst T " + std::to_string(g_compiler.worst_T) +
              (g_compiler.first_bad.empty() ? "" : ", first failure: " + g_compiler.first_bad)};
}

std::vector<SweepRow> sweep(const std::string& family, std::vector<std::size_t> ns) {
  auto rows = sweep_ts(family, std::move(ns), kSweepSamples, kSeed);
  for (const auto& r : rows) {
    g_sweep_violations += r.certificate_violations;
    g_sweep_runs += r.inputs;
  }
  return rows;
}

std::vector<SweepRow> g_dfa, g_pfa, g_ints;

Result criterion8() {
  g_dfa = sweep("eq-dfa", {8, 16, 32, 64, 128, 256});
  g_pfa = sweep("eq-pfa", {8, 16, 32, 64, 128, 256});
  const double a = fit_scaling(g_dfa).slope, b = fit_scaling(g_pfa, LogCorrection::DivideByLogN).slope;
  return {a >= kEqDfaSlopeLo && a <= kEqDfaSlopeHi && b >= kEqPfaSlopeLo && b <= kEqPfaSlopeHi,
          "eq-dfa slope " + fmt("%.4f", a) + ", eq-pfa slope/log " + fmt("%.4f", b)};
}

Result criterion9() {
  g_ints = sweep("grover-ints", {16, 64, 256, 1024});
  const double s = fit_scaling(g_ints, LogCorrection::DivideByLogN).slope;
  return {s >= kIntsSlopeLo && s <= kIntsSlopeHi, "grover-ints slope/log " + fmt("%.4f", s)};
}

Result criterion7() {
  return {g_sweep_violations == 0 && g_sweep_runs > 0,
          std::to_string(g_sweep_violations) + " violations over " + std::to_string(g_sweep_runs) + " runs"};
}

template <class Exact, class Sample>
bool within_sigmas(Exact exact, Sample sample, double& z) {
  const double p = exact();
  int hits = 0;
  for (int s = 0; s < kMcSamples; ++s) hits += sample(static_cast<std::uint64_t>(s) + kSeed) == Outcome::Accept;
  const double sigma = std::sqrt(p * (1 - p) / kMcSamples);
  const double dev = std::abs(hits / double(kMcSamples) - p);
  z = sigma > 0 ? dev / sigma : (dev == 0 ? 0 : INFINITY);
  return dev <= kSigmas * sigma;
}

Result criterion10() {
  std::vector<std::pair<std::string, std::function<bool(double&)>>> cases;
  const auto pfa = [&](std::size_t n, std::string w) {
    auto m = std::make_shared<EqPfa>(build_eq_pfa(n));
    cases.emplace_back("eq-pfa " + w, [m, w](double& z) {
      return within_sigmas([&] { return pfa_exact_prob(*m, w).convert_to<double>(); },
                           [&](std::uint64_t s) { return run_pfa_sample(*m, w, s).outcome; }, z);
    });
  };
  const auto qcfa = [&](QueryAlgorithm a, Gadget g, std::string w) {
    const std::string name = a.name() + "∘" + g.name();
    auto r = std::make_shared<CompilationReport>(compile_query_to_qcfa(a, g));
    cases.emplace_back(name + " " + w, [r, w](double& z) {
      return within_sigmas([&] { return run_qcfa_exact(*r->machine, w).accept; },
                           [&](std::uint64_t s) { return run_qcfa_sample(*r->machine, w, s).outcome; }, z);
    });
  };
  pfa(4, "0000####1100");
  pfa(4, "0110####0110");
  pfa(6, "000000######000110");
  pfa(10, lifted_word(bits_of(0, 10), bits_of(210, 10)));
  pfa(10, lifted_word(bits_of(37, 10), bits_of(997, 10)));
  qcfa(grover_or(4), fn::and1(), "0001####0001");
  qcfa(grover_or(5), fn::and1(), "01100#####00101");
  qcfa(grover_or(8), fn::and1(), "10000000########10000001");
  qcfa(exact_parity(4), fn::and1(), "1101####1011");
  qcfa(grover_or(3), fn::ip(2), "110101######100110");
  double worst = 0;
  bool ok = true;
  std::string bad;
  for (auto& [name, run] : cases) {
    double z = 0;
    if (!run(z)) {
      ok = false;
      if (bad.empty()) bad = ", first failure: " + name;
    }
    worst = std::max(worst, z);
  }
  return {ok, std::to_string(cases.size()) + " pairs, worst deviation " + fmt("%.2f", worst) + " sigma" + bad};
}

}  // namespace

int main() {
  // Criterion 7 reads the sweeps run by 8 and 9, so it reports last.
  const std::vector<std::pair<int, std::function<Result()>>> order{
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
      {6, criterion6}, {8, criterion8}, {9, criterion9}, {7, criterion7}, {10, criterion10}};
  int failures = 0;
  for (const auto& [id, run] : order) {
    const auto t0 = std::chrono::steady_clock::now();
    Result r;
    try {
      r = run();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !r.pass;
    std::printf("criterion %d: %s  %s (%.1f s)\n", id, r.pass ? "PASS" : "FAIL", r.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
