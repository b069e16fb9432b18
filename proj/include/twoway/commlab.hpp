#pragma once

// Communication side: the Alice/Bob partitioned simulation of a two-way
// automaton, protocols induced by decision trees over a gadget, a
// brute-force D^cc oracle and the prime fingerprint protocol for EQ.

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "twoway/automata.hpp"
#include "twoway/bits.hpp"
#include "twoway/boolfn.hpp"
#include "twoway/errors.hpp"
#include "twoway/handcrafted.hpp"
#include "twoway/qquery.hpp"
#include "twoway/tape.hpp"

namespace twoway {

enum class Party : std::uint8_t { Alice, Bob };

inline const char* party_name(Party p) { return p == Party::Alice ? "alice" : "bob"; }

struct Message {
  Party sender;
  std::size_t bits;
  std::string what;
};

struct ProtocolTranscript {
  std::vector<Message> messages;
  std::size_t crossings = 0;  // state transfers; the output bit is not one
  bool output = false;

  std::size_t total_bits() const {
    std::size_t s = 0;
    for (const auto& m : messages) s += m.bits;
    return s;
  }

  void send(Party from, std::size_t bits, std::string what) { messages.push_back({from, bits, std::move(what)}); }
};

// ---------------------------------------------------------------------------
// Partitioned simulation

/// Alice holds ¢ x #^n (positions 0..2n), Bob holds #^n y $ (positions
/// n+1..3n+1). Control passes to Bob when the head enters y or $, and back
/// to Alice when it enters x or ¢. Each party reads only its own cells.
class SplitTape {
 public:
  SplitTape(BitSpan x, BitSpan y, bool circular) : n_(x.size()), geometry_(lifted_word(x, y), circular) {
    if (n_ == 0) throw InputError("SplitTape: n must be positive");
    for (std::size_t k = 0; k <= 2 * n_; ++k) alice_.push_back(geometry_.at(k));
    for (std::size_t k = n_ + 1; k <= 3 * n_ + 1; ++k) bob_.push_back(geometry_.at(k));
  }

  std::size_t n() const { return n_; }
  /// Head geometry only; symbols come from read().
  const Tape& geometry() const { return geometry_; }

  Symbol read(Party holder, std::size_t pos) const {
    if (holder == Party::Alice) {
      if (pos > 2 * n_) throw SpecError("partition: Alice read outside her half");
      return alice_[pos];
    }
    if (pos < n_ + 1) throw SpecError("partition: Bob read outside his half");
    return bob_[pos - (n_ + 1)];
  }

  Party holder_after(Party holder, std::size_t pos) const {
    if (holder == Party::Alice && pos >= 2 * n_ + 1) return Party::Bob;
    if (holder == Party::Bob && pos <= n_) return Party::Alice;
    return holder;
  }

 private:
  std::size_t n_;
  Tape geometry_;
  std::vector<Symbol> alice_, bob_;
};

/// Bits per transfer: ⌈S⌉, plus one bit naming the entry side on a circular tape.
template <Machine M>
std::size_t crossing_message_bits(const M& m) {
  return static_cast<std::size_t>(std::ceil(declared_space(m) - 1e-12)) + (m.circular() ? 1 : 0);
}

namespace detail {

struct PartyTrack {
  Party holder = Party::Alice;
  ProtocolTranscript transcript;

  void moved(const SplitTape& tape, std::size_t pos, std::size_t bits) {
    const Party next = tape.holder_after(holder, pos);
    if (next != holder) {
      transcript.send(holder, bits, "state");
      ++transcript.crossings;
      holder = next;
    }
  }

  void finish(bool accept) {
    transcript.output = accept;
    transcript.send(holder, 1, "output");
  }
};

}  // namespace detail

struct CertificateCheck {
  bool bits_ok = true;      // bits <= S·⌊T/n⌋ + 1
  bool crossings_ok = true;  // crossings·n <= T
  bool ok() const { return bits_ok && crossings_ok; }
};

inline CertificateCheck check_certificate(const ProtocolTranscript& t, double S, std::uint64_t steps, std::size_t n) {
  CertificateCheck c;
  const double bound = S * static_cast<double>(steps / n) + 1.0;
  c.bits_ok = static_cast<double>(t.total_bits()) <= bound + 1e-9;
  c.crossings_ok = t.crossings * n <= steps;
  return c;
}

struct ExtractedProtocol {
  double accept_probability = 0.0;  // exact (or 0/1 for a single run)
  bool output = false;              // deterministic or sampled outcome
  ProtocolTranscript transcript;    // the most expensive branch
  std::uint64_t steps = 0;          // steps of that branch
  std::uint64_t max_steps = 0;      // over all branches
  double S = 0.0;
  std::size_t branches = 1;
  std::size_t certificate_violations = 0;
};

namespace detail {

inline void record_branch(ExtractedProtocol& out, const PartyTrack& track, std::uint64_t steps, std::size_t n,
                          bool first) {
  if (!check_certificate(track.transcript, out.S, steps, n).ok()) ++out.certificate_violations;
  out.max_steps = std::max(out.max_steps, steps);
  if (first || track.transcript.total_bits() > out.transcript.total_bits()) {
    out.transcript = track.transcript;
    out.steps = steps;
  }
}

}  // namespace detail

/// Partitioned run of a 2DFA on x #^n y.
template <TwoWayDfa M>
ExtractedProtocol extract_protocol(const M& m, BitSpan x, BitSpan y, const RunOptions& opts = {},
                                   StateCensus<typename M::State>* census = nullptr) {
  const SplitTape tape(x, y, m.circular());
  const std::size_t bits = crossing_message_bits(m);
  ExtractedProtocol out;
  out.S = declared_space(m);
  detail::PartyTrack track;
  auto s = m.initial_state();
  std::size_t pos = 0;
  std::uint64_t steps = 0;
  while (m.halt_status(s) == Halt::Running) {
    if (steps >= opts.max_steps) throw CutoffError("partitioned 2DFA run exceeded the step limit", RunTrace{});
    if (census) census->insert(s);
    auto tr = m.step(s, tape.read(track.holder, pos));
    pos = tape.geometry().move(pos, tr.move);
    s = std::move(tr.next);
    ++steps;
    track.moved(tape, pos, bits);
  }
  out.output = m.halt_status(s) == Halt::Accept;
  out.accept_probability = out.output ? 1.0 : 0.0;
  track.finish(out.output);
  detail::record_branch(out, track, steps, x.size(), true);
  return out;
}

/// Partitioned exact evaluation of a one-shot 2PFA: every random branch is
/// followed, each with its own transcript.
template <TwoWayPfa M>
ExtractedProtocol extract_protocol(const M& m, BitSpan x, BitSpan y, const RunOptions& opts = {},
                                   StateCensus<typename M::State>* census = nullptr) {
  using S = typename M::State;
  if (!m.one_shot()) throw UnsupportedError("partitioned 2PFA evaluation requires one-shot randomness");
  const SplitTape tape(x, y, m.circular());
  const std::size_t bits = crossing_message_bits(m);
  ExtractedProtocol out;
  out.S = declared_space(m);
  out.branches = 0;
  struct Pending {
    S state;
    std::size_t pos;
    Probability weight;
    std::uint64_t steps;
    detail::PartyTrack track;
  };
  Probability accept = 0;
  std::vector<Pending> stack;
  stack.push_back({m.initial_state(), 0, Probability(1), 0, {}});
  while (!stack.empty()) {
    Pending cur = std::move(stack.back());
    stack.pop_back();
    while (m.halt_status(cur.state) == Halt::Running) {
      if (cur.steps >= opts.max_steps) throw CutoffError("partitioned 2PFA branch exceeded the step limit", RunTrace{});
      if (census) census->insert(cur.state);
      auto st = m.step(cur.state, tape.read(cur.track.holder, cur.pos));
      ++cur.steps;
      if (st.is_deterministic()) {
        cur.pos = tape.geometry().move(cur.pos, st.deterministic.move);
        cur.state = std::move(st.deterministic.next);
        cur.track.moved(tape, cur.pos, bits);
        continue;
      }
      detail::check_distribution(st.branches);
      for (std::size_t i = 1; i < st.branches.size(); ++i) {
        auto& b = st.branches[i];
        if (b.probability == 0) continue;
        Pending nb{std::move(b.next), tape.geometry().move(cur.pos, b.move), cur.weight * b.probability, cur.steps,
                   cur.track};
        nb.track.moved(tape, nb.pos, bits);
        stack.push_back(std::move(nb));
      }
      auto& first = st.branches.front();
      cur.weight *= first.probability;
      cur.pos = tape.geometry().move(cur.pos, first.move);
      cur.state = std::move(first.next);
      cur.track.moved(tape, cur.pos, bits);
    }
    const bool acc = m.halt_status(cur.state) == Halt::Accept;
    if (acc) accept += cur.weight;
    cur.track.finish(acc);
    detail::record_branch(out, cur.track, cur.steps, x.size(), out.branches == 0);
    ++out.branches;
  }
  out.accept_probability = accept.template convert_to<double>();
  out.output = out.accept_probability >= 0.5;
  return out;
}

/// Partitioned single trajectory of a 2PFA; with the same seed it consumes
/// the random stream exactly like run_pfa_sample.
template <TwoWayPfa M>
ExtractedProtocol extract_protocol_sample(const M& m, BitSpan x, BitSpan y, std::uint64_t seed,
                                          const RunOptions& opts = {}) {
  const SplitTape tape(x, y, m.circular());
  const std::size_t bits = crossing_message_bits(m);
  ExtractedProtocol out;
  out.S = declared_space(m);
  std::mt19937_64 rng(seed);
  detail::PartyTrack track;
  auto s = m.initial_state();
  std::size_t pos = 0;
  std::uint64_t steps = 0;
  while (m.halt_status(s) == Halt::Running) {
    if (steps >= opts.max_steps) throw CutoffError("partitioned 2PFA sample exceeded the step limit", RunTrace{});
    auto st = m.step(s, tape.read(track.holder, pos));
    Transition<typename M::State> tr;
    if (st.is_deterministic()) {
      tr = std::move(st.deterministic);
    } else {
      detail::check_distribution(st.branches);
      std::vector<double> probs;
      for (const auto& b : st.branches) probs.push_back(detail::to_double(b.probability));
      const auto pick = detail::sample_index(probs, rng);
      tr = {std::move(st.branches[pick].next), st.branches[pick].move};
    }
    pos = tape.geometry().move(pos, tr.move);
    s = std::move(tr.next);
    ++steps;
    track.moved(tape, pos, bits);
  }
  out.output = m.halt_status(s) == Halt::Accept;
  out.accept_probability = out.output ? 1.0 : 0.0;
  track.finish(out.output);
  detail::record_branch(out, track, steps, x.size(), true);
  return out;
}

/// Partitioned exact evaluation of a 2QCFA: the classical state and the
/// quantum register travel together across the boundary.
template <TwoWayQcfa M>
ExtractedProtocol extract_protocol(const M& m, BitSpan x, BitSpan y, const RunOptions& opts = {},
                                   StateCensus<typename M::State>* census = nullptr) {
  using S = typename M::State;
  const SplitTape tape(x, y, m.circular());
  const std::size_t bits = crossing_message_bits(m);
  ExtractedProtocol out;
  out.S = declared_space(m);
  out.branches = 0;
  QcfaStepper<M> stepper(m);
  struct Pending {
    QcfaBranch<S> branch;
    detail::PartyTrack track;
  };
  std::vector<Pending> stack;
  stack.push_back({stepper.start(), {}});
  double accept = 0.0;
  std::vector<QcfaBranch<S>> spawned;
  while (!stack.empty()) {
    Pending cur = std::move(stack.back());
    stack.pop_back();
    bool alive = true;
    while (alive && m.halt_status(cur.branch.state) == Halt::Running) {
      if (cur.branch.steps >= opts.max_steps) {
        throw CutoffError("partitioned 2QCFA branch exceeded the step limit", RunTrace{});
      }
      if (census) census->insert(cur.branch.state);
      spawned.clear();
      alive = stepper.advance(cur.branch, tape.read(cur.track.holder, cur.branch.pos), tape.geometry(), spawned);
      for (auto& nb : spawned) {
        Pending p{std::move(nb), cur.track};
        p.track.moved(tape, p.branch.pos, bits);
        stack.push_back(std::move(p));
      }
      if (alive) cur.track.moved(tape, cur.branch.pos, bits);
    }
    if (!alive) continue;
    const bool acc = m.halt_status(cur.branch.state) == Halt::Accept;
    if (acc) accept += cur.branch.weight;
    cur.track.finish(acc);
    detail::record_branch(out, cur.track, cur.branch.steps, x.size(), out.branches == 0);
    ++out.branches;
  }
  out.accept_probability = accept;
  out.output = accept >= 0.5;
  return out;
}

// ---------------------------------------------------------------------------
// Composed protocols

/// A deterministic protocol for one gadget instance: computes g(a, b) and
/// appends its messages to the transcript.
struct GadgetProtocol {
  std::size_t cost;
  std::function<bool(BitSpan, BitSpan, ProtocolTranscript&)> run;
};

/// Alice sends her m-bit block, Bob answers with g: m + 1 bits.
inline GadgetProtocol send_block_protocol(const Gadget& g) {
  return {g.width() + 1, [g](BitSpan a, BitSpan b, ProtocolTranscript& t) {
            t.send(Party::Alice, a.size(), "block");
            const bool v = g(a, b);
            t.send(Party::Bob, 1, "gadget value");
            return v;
          }};
}

struct ComposedRun {
  bool output = false;
  std::size_t bits = 0;
  ProtocolTranscript transcript;
};

/// Walks T_h; each queried index i costs one run of the gadget protocol on
/// the i-th blocks.
inline ComposedRun composed_protocol_cost(const DecisionTree& tree, const GadgetProtocol& gp, std::size_t m, BitSpan x,
                                          BitSpan y) {
  const std::size_t p = tree.arity();
  if (m == 0 || x.size() != p * m || y.size() != p * m) {
    throw InputError("composed_protocol_cost: inputs must have arity(T_h)·m bits");
  }
  ComposedRun out;
  const auto& nodes = tree.nodes();
  std::size_t v = 0;
  while (nodes[v].var >= 0) {
    const auto i = static_cast<std::size_t>(nodes[v].var);
    const bool z = gp.run(x.subspan(i * m, m), y.subspan(i * m, m), out.transcript);
    v = nodes[v].child[z ? 1 : 0];
  }
  out.output = nodes[v].value;
  out.transcript.output = out.output;
  out.bits = out.transcript.total_bits();
  return out;
}

// ---------------------------------------------------------------------------
// D^cc by exhaustive search

/// 2^a x 2^b 0/1 matrix; row index = Alice's input, column = Bob's.
class FunctionMatrix {
 public:
  FunctionMatrix(std::vector<std::vector<std::uint8_t>> cells) : cells_(std::move(cells)) {
    if (cells_.empty() || cells_.front().empty()) throw InputError("FunctionMatrix: empty matrix");
    for (const auto& r : cells_) {
      if (r.size() != cells_.front().size()) throw InputError("FunctionMatrix: ragged rows");
      for (auto v : r)
        if (v > 1) throw InputError("FunctionMatrix: entries must be 0 or 1");
    }
    if (!std::has_single_bit(rows()) || !std::has_single_bit(cols())) {
      throw InputError("FunctionMatrix: dimensions must be powers of two");
    }
  }

  static FunctionMatrix from_function(std::size_t a, std::size_t b, const std::function<bool(BitSpan, BitSpan)>& f) {
    std::vector<std::vector<std::uint8_t>> cells(std::size_t{1} << a, std::vector<std::uint8_t>(std::size_t{1} << b));
    for (std::size_t i = 0; i < cells.size(); ++i)
      for (std::size_t j = 0; j < cells[i].size(); ++j) cells[i][j] = f(bits_of(i, a), bits_of(j, b)) ? 1 : 0;
    return FunctionMatrix(std::move(cells));
  }

  static FunctionMatrix eq(std::size_t k) {
    return from_function(k, k, [](BitSpan u, BitSpan v) { return std::equal(u.begin(), u.end(), v.begin()); });
  }

  /// Dense 0/1 grid, one row per line; whitespace ignored, '#' starts a comment.
  static FunctionMatrix parse(std::istream& in) {
    std::vector<std::vector<std::uint8_t>> cells;
    std::string line;
    while (std::getline(in, line)) {
      if (auto c = line.find('#'); c != std::string::npos) line.erase(c);
      std::vector<std::uint8_t> row;
      for (char ch : line) {
        if (ch == '0' || ch == '1') {
          row.push_back(static_cast<std::uint8_t>(ch - '0'));
        } else if (!std::isspace(static_cast<unsigned char>(ch)) && ch != ',') {
          throw InputError(std::string("FunctionMatrix: unexpected character '") + ch + "'");
        }
      }
      if (!row.empty()) cells.push_back(std::move(row));
    }
    return FunctionMatrix(std::move(cells));
  }

  static FunctionMatrix load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open matrix file " + path);
    return parse(in);
  }

  std::size_t rows() const { return cells_.size(); }
  std::size_t cols() const { return cells_.front().size(); }
  std::size_t a() const { return static_cast<std::size_t>(std::countr_zero(rows())); }
  std::size_t b() const { return static_cast<std::size_t>(std::countr_zero(cols())); }
  std::uint8_t at(std::size_t r, std::size_t c) const { return cells_[r][c]; }

 private:
  std::vector<std::vector<std::uint8_t>> cells_;
};

inline constexpr std::size_t kDccMaxInputBits = 6;

namespace detail {

/// Sub-matrix with duplicate rows and columns merged; rows are column
/// bitmasks. Duplicates never change D^cc, and the result is a memo key.
struct Rect {
  std::vector<std::uint64_t> rows;
  std::size_t cols = 0;
  bool operator<(const Rect& o) const { return std::tie(cols, rows) < std::tie(o.cols, o.rows); }
};

inline Rect canonical(const std::vector<std::uint64_t>& rows, std::size_t cols) {
  std::vector<std::uint64_t> colmask(cols, 0);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols; ++c)
      if ((rows[r] >> c) & 1U) colmask[c] |= std::uint64_t{1} << r;
  std::sort(colmask.begin(), colmask.end());
  colmask.erase(std::unique(colmask.begin(), colmask.end()), colmask.end());
  Rect out;
  out.cols = colmask.size();
  out.rows.assign(rows.size(), 0);
  for (std::size_t c = 0; c < colmask.size(); ++c)
    for (std::size_t r = 0; r < rows.size(); ++r)
      if ((colmask[c] >> r) & 1U) out.rows[r] |= std::uint64_t{1} << c;
  std::sort(out.rows.begin(), out.rows.end());
  out.rows.erase(std::unique(out.rows.begin(), out.rows.end()), out.rows.end());
  return out;
}

inline bool monochromatic(const Rect& r) {
  const std::uint64_t full = r.cols == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << r.cols) - 1;
  return std::all_of(r.rows.begin(), r.rows.end(), [&](std::uint64_t v) { return v == 0; }) ||
         std::all_of(r.rows.begin(), r.rows.end(), [&](std::uint64_t v) { return v == full; });
}

inline std::size_t ceil_log2(std::size_t v) {
  std::size_t k = 0;
  while ((std::size_t{1} << k) < v) ++k;
  return k;
}

class DccSolver {
 public:
  /// True when some protocol tree of depth <= d has monochromatic leaves.
  bool feasible(const Rect& r, std::size_t d) {
    if (monochromatic(r)) return true;
    if (d == 0) return false;
    auto key = std::make_pair(r, d);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const bool ok = try_rows(r, d) || try_cols(r, d);
    memo_.emplace(std::move(key), ok);
    return ok;
  }

 private:
  bool try_rows(const Rect& r, std::size_t d) {
    const std::size_t k = r.rows.size();
    if (k < 2) return false;
    // Row 0 always goes to the first part, halving the symmetric splits.
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (k - 1)) - 1; ++mask) {
      std::vector<std::uint64_t> p0{r.rows[0]}, p1;
      for (std::size_t i = 1; i < k; ++i) ((mask >> (i - 1)) & 1U ? p1 : p0).push_back(r.rows[i]);
      if (p1.empty()) continue;
      if (feasible(canonical(p0, r.cols), d - 1) && feasible(canonical(p1, r.cols), d - 1)) return true;
    }
    return false;
  }

  bool try_cols(const Rect& r, std::size_t d) {
    const std::size_t k = r.cols;
    if (k < 2) return false;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (k - 1)) - 1; ++mask) {
      const std::uint64_t part1 = mask << 1;  // column 0 stays in part 0
      if (part1 == 0) continue;
      std::vector<std::uint64_t> r0, r1;
      for (auto row : r.rows) {
        r0.push_back(compress(row, ~part1, k));
        r1.push_back(compress(row, part1, k));
      }
      const std::size_t c1 = static_cast<std::size_t>(std::popcount(part1));
      if (feasible(canonical(r0, k - c1), d - 1) && feasible(canonical(r1, c1), d - 1)) return true;
    }
    return false;
  }

  static std::uint64_t compress(std::uint64_t row, std::uint64_t keep, std::size_t k) {
    std::uint64_t out = 0;
    std::size_t j = 0;
    for (std::size_t c = 0; c < k; ++c) {
      if (!((keep >> c) & 1U)) continue;
      if ((row >> c) & 1U) out |= std::uint64_t{1} << j;
      ++j;
    }
    return out;
  }

  std::map<std::pair<Rect, std::size_t>, bool> memo_;
};

}  // namespace detail

/// Exact D^cc with monochromatic leaves; refuses more than 6 input bits.
inline std::size_t bruteforce_dcc(const FunctionMatrix& M) {
  if (M.a() + M.b() > kDccMaxInputBits) {
    throw RefusalError("bruteforce_dcc: " + std::to_string(M.a() + M.b()) + " input bits exceed " +
                       std::to_string(kDccMaxInputBits));
  }
  std::vector<std::uint64_t> rows(M.rows(), 0);
  for (std::size_t r = 0; r < M.rows(); ++r)
    for (std::size_t c = 0; c < M.cols(); ++c)
      if (M.at(r, c)) rows[r] |= std::uint64_t{1} << c;
  const auto rect = detail::canonical(rows, M.cols());
  const std::size_t upper = std::min(detail::ceil_log2(rect.rows.size()), detail::ceil_log2(rect.cols)) + 1;
  detail::DccSolver solver;
  for (std::size_t d = 0; d < upper; ++d)
    if (solver.feasible(rect, d)) return d;
  return upper;
}

// ---------------------------------------------------------------------------
// Fingerprint protocol for EQ

/// Alice draws a uniform prime p <= max(n², 2) with private coins and sends p
/// and x mod p, each in bit_width(largest prime) bits; Bob answers
/// [y mod p == x mod p].
inline ProtocolTranscript fingerprint_protocol(BitSpan x, BitSpan y, std::uint64_t seed) {
  if (x.empty() || x.size() != y.size()) throw InputError("fingerprint_protocol: need |x| = |y| >= 1");
  const PrimeTable table(x.size());
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, table.count() - 1);
  const std::uint64_t p = table.primes()[pick(rng)];
  const auto width = static_cast<std::size_t>(std::bit_width(table.primes().back()));
  ProtocolTranscript t;
  t.send(Party::Alice, width, "prime");
  t.send(Party::Alice, width, "x mod p");
  t.output = residue(x, p) == residue(y, p);
  t.send(Party::Bob, 1, "output");
  return t;
}

/// Worst-case error of the fingerprint protocol over the given pairs:
/// max |Bad(x, y)| / π(n²) among x != y.
inline Probability fingerprint_worst_error(std::size_t n, const std::vector<std::pair<Bits, Bits>>& pairs) {
  const PrimeTable table(n);
  std::size_t worst = 0;
  for (const auto& [x, y] : pairs) {
    if (x == y) continue;
    worst = std::max(worst, table.bad(x, y).size());
  }
  return Probability(worst, table.count());
}

}  // namespace twoway
