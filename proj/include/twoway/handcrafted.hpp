#pragma once

// The two explicit recognizers of L_EQ(n): a tree-shaped 2DFA that
// remembers x, and a prime-fingerprint 2PFA.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "twoway/automata.hpp"
#include "twoway/bits.hpp"
#include "twoway/errors.hpp"
#include "twoway/tape.hpp"

namespace twoway {

inline bool is_prime_trial(std::uint64_t v) {
  if (v < 2) return false;
  for (std::uint64_t d = 2; d * d <= v; ++d)
    if (v % d == 0) return false;
  return true;
}

/// The primes p <= max(n², 2).
class PrimeTable {
 public:
  explicit PrimeTable(std::size_t n) : n_(n) {
    if (n == 0) throw InputError("PrimeTable: n must be positive");
    limit_ = std::max<std::uint64_t>(static_cast<std::uint64_t>(n) * n, 2);
    std::vector<bool> composite(limit_ + 1, false);
    for (std::uint64_t v = 2; v <= limit_; ++v) {
      if (composite[v]) continue;
      primes_.push_back(v);
      for (std::uint64_t k = v * v; k <= limit_; k += v) composite[k] = true;
    }
  }

  std::size_t n() const { return n_; }
  std::uint64_t limit() const { return limit_; }
  const std::vector<std::uint64_t>& primes() const { return primes_; }
  /// π(n²).
  std::size_t count() const { return primes_.size(); }

  /// Bad(x, y): primes with x ≡ y (mod p), integers read MSB first.
  std::vector<std::uint64_t> bad(BitSpan x, BitSpan y) const {
    std::vector<std::uint64_t> out;
    for (auto p : primes_)
      if (residue(x, p) == residue(y, p)) out.push_back(p);
    return out;
  }

 private:
  std::size_t n_;
  std::uint64_t limit_ = 2;
  std::vector<std::uint64_t> primes_;
};

/// |Bad(x, y)| / π(n²).
inline Probability eq_pfa_exact_prob(std::size_t n, BitSpan x, BitSpan y) {
  if (x.size() != n || y.size() != n) throw InputError("eq_pfa_exact_prob: |x| and |y| must equal n");
  const PrimeTable primes(n);
  return Probability(primes.bad(x, y).size(), primes.count());
}

// ---------------------------------------------------------------------------

/// Single left-to-right sweep: remember x, count the # block, compare y.
class EqDfa {
 public:
  enum class Phase : std::uint8_t { Start, ReadX, Count, Compare, Accept, Reject };

  struct State {
    Phase phase = Phase::Start;
    std::uint32_t k = 0;  // ReadX: bits read; Count: #'s read; Compare: y bits matched
    std::string x;        // remembered prefix of x

    bool operator==(const State&) const = default;

    std::size_t hash() const {
      std::size_t h = std::hash<std::string>{}(x);
      hash_combine(h, static_cast<std::size_t>(phase));
      hash_combine(h, k);
      return h;
    }

    std::string describe() const {
      static constexpr const char* names[] = {"start", "read-x", "count", "compare", "accept", "reject"};
      return std::string(names[static_cast<int>(phase)]) + "(k=" + std::to_string(k) + ",x=" + x + ")";
    }
  };

  static constexpr MachineKind kind = MachineKind::Dfa;

  explicit EqDfa(std::size_t n) : n_(n) {
    if (n == 0) throw InputError("eq-dfa: n must be positive");
    if (n > 4096) throw UnsupportedError("eq-dfa: n above 4096");
  }

  std::size_t n() const { return n_; }
  State initial_state() const { return {}; }
  bool circular() const { return false; }

  Halt halt_status(const State& s) const {
    if (s.phase == Phase::Accept) return Halt::Accept;
    if (s.phase == Phase::Reject) return Halt::Reject;
    return Halt::Running;
  }

  /// 1 + (2^{n+1} - 1) + 2n·2^n + 2.
  double declared_log2_states() const {
    const double n = static_cast<double>(n_);
    // log2(2^{n+1} + 2n·2^n + 2) = n + log2(2 + 2n + 2^{1-n}).
    return n + std::log2(2.0 + 2.0 * n + std::exp2(1.0 - n));
  }

  std::string declared_state_formula() const { return "2^(n+1)+2n*2^n+2 with n=" + std::to_string(n_); }

  Transition<State> step(const State& s, Symbol c) const {
    const auto N = static_cast<std::uint32_t>(n_);
    auto reject = [] { return Transition<State>{State{Phase::Reject, 0, {}}, Move::Stay}; };
    switch (s.phase) {
      case Phase::Start:
        return {State{Phase::ReadX, 0, {}}, Move::Right};
      case Phase::ReadX:
        if (s.k < N) {
          if (!is_bit(c)) return reject();
          return {State{Phase::ReadX, s.k + 1, s.x + (bit_of(c) ? '1' : '0')}, Move::Right};
        }
        if (c != Symbol::Hash) return reject();
        return {State{Phase::Count, 1, s.x}, Move::Right};
      case Phase::Count:
        if (s.k < N) {
          if (c != Symbol::Hash) return reject();
          return {State{Phase::Count, s.k + 1, s.x}, Move::Right};
        }
        [[fallthrough]];
      case Phase::Compare: {
        const std::uint32_t j = s.phase == Phase::Count ? 0 : s.k;
        if (j < N) {
          if (!is_bit(c) || (bit_of(c) ? '1' : '0') != s.x[j]) return reject();
          return {State{Phase::Compare, j + 1, s.x}, Move::Right};
        }
        if (c != Symbol::RightEnd) return reject();
        return {State{Phase::Accept, 0, {}}, Move::Stay};
      }
      case Phase::Accept:
      case Phase::Reject: break;
    }
    throw SpecError("eq-dfa stepped from a halting state");
  }

 private:
  std::size_t n_;
};

static_assert(TwoWayDfa<EqDfa>);

inline EqDfa build_eq_dfa(std::size_t n) { return EqDfa(n); }

// ---------------------------------------------------------------------------

/// Form check left to right, walk back to ¢, choose a prime p <= n² uniformly,
/// then one sweep accumulating a = x mod p and b = y mod p; accept iff a = b.
class EqPfa {
 public:
  enum class Phase : std::uint8_t { Form, Back, Choose, ResX, ResY, Accept, Reject };

  struct State {
    Phase phase = Phase::Form;
    std::uint32_t pos = 0;
    std::uint32_t p = 0;
    std::uint32_t a = 0;
    std::uint32_t b = 0;

    bool operator==(const State&) const = default;

    std::size_t hash() const {
      std::size_t h = static_cast<std::size_t>(phase);
      hash_combine(h, pos);
      hash_combine(h, p);
      hash_combine(h, a);
      hash_combine(h, b);
      return h;
    }

    std::string describe() const {
      static constexpr const char* names[] = {"form", "back", "choose", "res-x", "res-y", "accept", "reject"};
      return std::string(names[static_cast<int>(phase)]) + "(pos=" + std::to_string(pos) + ",p=" + std::to_string(p) +
             ",a=" + std::to_string(a) + ",b=" + std::to_string(b) + ")";
    }
  };

  static constexpr MachineKind kind = MachineKind::Pfa;

  explicit EqPfa(std::size_t n) : n_(n), primes_(n) {
    if (primes_.limit() > (std::uint64_t{1} << 31)) throw UnsupportedError("eq-pfa: n too large");
    for (auto p : primes_.primes()) {
      const double d = static_cast<double>(p);
      fingerprint_states_ += d + d * d;
    }
  }

  std::size_t n() const { return n_; }
  const PrimeTable& primes() const { return primes_; }
  State initial_state() const { return {}; }
  bool circular() const { return false; }
  bool one_shot() const { return true; }

  Halt halt_status(const State& s) const {
    if (s.phase == Phase::Accept) return Halt::Accept;
    if (s.phase == Phase::Reject) return Halt::Reject;
    return Halt::Running;
  }

  /// Form 3n+2, back 3n, choose 1, halting 2, and (p, a) plus (p, a, b) per prime.
  double declared_states() const { return 6.0 * static_cast<double>(n_) + 5.0 + fingerprint_states_; }
  double declared_log2_states() const { return std::log2(declared_states()); }
  std::string declared_state_formula() const {
    return "6n+5+sum_{p<=n^2 prime}(p+p^2) with n=" + std::to_string(n_);
  }

  PfaStep<State> step(const State& s, Symbol c) const {
    const auto N = static_cast<std::uint32_t>(n_);
    auto det = [](State next, Move mv) { return PfaStep<State>{{next, mv}, {}}; };
    switch (s.phase) {
      case Phase::Form: {
        const std::uint32_t k = s.pos;
        bool ok;
        if (k == 0) ok = c == Symbol::LeftEnd;
        else if (k <= N || (k > 2 * N && k <= 3 * N)) ok = is_bit(c);
        else if (k <= 2 * N) ok = c == Symbol::Hash;
        else ok = c == Symbol::RightEnd;
        if (!ok) return det(State{Phase::Reject}, Move::Stay);
        if (k == 3 * N + 1) return det(State{Phase::Back, 3 * N}, Move::Left);
        return det(State{Phase::Form, k + 1}, Move::Right);
      }
      case Phase::Back:
        if (s.pos > 1) return det(State{Phase::Back, s.pos - 1}, Move::Left);
        return det(State{Phase::Choose}, Move::Left);
      case Phase::Choose: {
        PfaStep<State> out;
        const Probability each(1, primes_.count());
        for (auto p : primes_.primes()) {
          out.branches.push_back({each, State{Phase::ResX, 0, static_cast<std::uint32_t>(p), 0, 0}, Move::Right});
        }
        return out;
      }
      case Phase::ResX:
        if (is_bit(c)) return det(State{Phase::ResX, 0, s.p, (2 * s.a + bit_of(c)) % s.p, 0}, Move::Right);
        return det(State{Phase::ResY, 0, s.p, s.a, 0}, Move::Right);
      case Phase::ResY:
        if (c == Symbol::Hash) return det(s, Move::Right);
        if (is_bit(c)) return det(State{Phase::ResY, 0, s.p, s.a, (2 * s.b + bit_of(c)) % s.p}, Move::Right);
        return det(State{s.a == s.b ? Phase::Accept : Phase::Reject}, Move::Stay);
      case Phase::Accept:
      case Phase::Reject: break;
    }
    throw SpecError("eq-pfa stepped from a halting state");
  }

 private:
  std::size_t n_;
  PrimeTable primes_;
  double fingerprint_states_ = 0.0;
};

static_assert(TwoWayPfa<EqPfa>);

inline EqPfa build_eq_pfa(std::size_t n) { return EqPfa(n); }

}  // namespace twoway
