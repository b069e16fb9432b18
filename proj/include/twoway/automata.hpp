#pragma once

// Runtime semantics of two-way automata (2DFA, 2PFA, 2QCFA) over lazily
// generated classical state spaces, with time/space cost accounting.
//
// A machine type M exposes
//   M::State                      regular type with hash() and describe()
//   M::kind                       MachineKind tag
//   initial_state(), halt_status(s), circular()
//   declared_log2_states(), declared_state_formula()
// and, per kind,
//   Dfa:  step(s, sym) -> Transition<State>
//   Pfa:  step(s, sym) -> PfaStep<State>, one_shot()
//   Qcfa: action(s, sym) -> QuantumAction<State>, quantum_dim(), initial_amplitudes()
//
// Steps count executed transitions. The visited-state census counts distinct
// non-halting states in which a transition was executed.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "twoway/errors.hpp"
#include "twoway/quantum.hpp"
#include "twoway/tape.hpp"

namespace twoway {

using Probability = boost::multiprecision::cpp_rational;

enum class MachineKind { Dfa, Pfa, Qcfa };
enum class Halt : std::uint8_t { Running, Accept, Reject };
enum class Outcome : std::uint8_t { Accept, Reject, Cutoff };

inline const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Accept: return "accept";
    case Outcome::Reject: return "reject";
    case Outcome::Cutoff: return "cutoff";
  }
  return "?";
}

template <class S>
concept ClassicalState = std::regular<S> && requires(const S& s) {
  { s.hash() } -> std::convertible_to<std::size_t>;
  { s.describe() } -> std::convertible_to<std::string>;
};

struct StateHash {
  template <ClassicalState S>
  std::size_t operator()(const S& s) const {
    return s.hash();
  }
};

template <class S>
struct Transition {
  S next;
  Move move = Move::Stay;
};

template <class S>
struct Branch {
  Probability probability;
  S next;
  Move move = Move::Stay;
};

/// Either a deterministic transition (branches empty) or a distribution.
template <class S>
struct PfaStep {
  Transition<S> deterministic;
  std::vector<Branch<S>> branches;

  bool is_deterministic() const { return branches.empty(); }
};

template <class S>
struct UnitaryStep {
  const Operator* op;
  Transition<S> next;
};

template <class S>
struct MeasureStep {
  const Measurement* measurement;
  std::vector<Transition<S>> on_outcome;
};

template <class S>
using QuantumAction = std::variant<UnitaryStep<S>, MeasureStep<S>>;

template <class M>
concept Machine = requires(const M& m, const typename M::State& s) {
  requires ClassicalState<typename M::State>;
  { M::kind } -> std::convertible_to<MachineKind>;
  { m.initial_state() } -> std::same_as<typename M::State>;
  { m.halt_status(s) } -> std::same_as<Halt>;
  { m.circular() } -> std::convertible_to<bool>;
  { m.declared_log2_states() } -> std::convertible_to<double>;
  { m.declared_state_formula() } -> std::convertible_to<std::string>;
};

template <class M>
concept TwoWayDfa = Machine<M> && (M::kind == MachineKind::Dfa) &&
                    requires(const M& m, const typename M::State& s, Symbol c) {
                      { m.step(s, c) } -> std::same_as<Transition<typename M::State>>;
                    };

template <class M>
concept TwoWayPfa = Machine<M> && (M::kind == MachineKind::Pfa) &&
                    requires(const M& m, const typename M::State& s, Symbol c) {
                      { m.step(s, c) } -> std::same_as<PfaStep<typename M::State>>;
                      { m.one_shot() } -> std::convertible_to<bool>;
                    };

template <class M>
concept TwoWayQcfa = Machine<M> && (M::kind == MachineKind::Qcfa) &&
                     requires(const M& m, const typename M::State& s, Symbol c) {
                       { m.action(s, c) } -> std::same_as<QuantumAction<typename M::State>>;
                       { m.quantum_dim() } -> std::convertible_to<std::size_t>;
                       { m.initial_amplitudes() } -> std::convertible_to<StateVector>;
                     };

template <class M>
std::size_t machine_qubits(const M& m) {
  if constexpr (TwoWayQcfa<M>) {
    return qubits_for(m.quantum_dim());
  } else {
    return 0;
  }
}

/// Space complexity: qubits plus log2 of the declared classical-state bound.
template <Machine M>
double declared_space(const M& m) {
  return static_cast<double>(machine_qubits(m)) + m.declared_log2_states();
}

struct RunOptions {
  std::uint64_t max_steps = 10'000'000;
  bool record_heads = false;
  std::size_t census_limit = std::size_t{1} << 20;
};

/// Distinct-state census; stops growing at `limit` and then reports a lower bound.
template <ClassicalState S>
class StateCensus {
 public:
  explicit StateCensus(std::size_t limit = std::size_t{1} << 20) : limit_(limit) {}

  void insert(const S& s) {
    if (set_.size() >= limit_) {
      if (!set_.contains(s)) saturated_ = true;
      return;
    }
    set_.insert(s);
  }

  std::size_t size() const { return set_.size(); }
  bool saturated() const { return saturated_; }
  bool contains(const S& s) const { return set_.contains(s); }

 private:
  std::size_t limit_;
  bool saturated_ = false;
  std::unordered_set<S, StateHash> set_;
};

struct RunTrace {
  std::uint64_t steps = 0;
  std::size_t head_min = 0;
  std::size_t head_max = 0;
  std::vector<std::uint32_t> heads;  // only with RunOptions::record_heads
  std::size_t visited_states = 0;
  Outcome outcome = Outcome::Cutoff;

  void record(std::size_t pos, bool keep) {
    head_min = std::min(head_min, pos);
    head_max = std::max(head_max, pos);
    if (keep) heads.push_back(static_cast<std::uint32_t>(pos));
  }
};

class CutoffError : public std::runtime_error {
 public:
  CutoffError(const std::string& what, RunTrace trace) : std::runtime_error(what), trace_(std::move(trace)) {}
  const RunTrace& trace() const { return trace_; }

 private:
  RunTrace trace_;
};

inline Outcome outcome_of(Halt h) { return h == Halt::Accept ? Outcome::Accept : Outcome::Reject; }

// ---------------------------------------------------------------------------
// 2DFA

template <class S>
struct DfaRun {
  Outcome outcome;
  RunTrace trace;
};

namespace detail {

/// Brent cycle search from a configuration reached at the cutoff; returns a
/// description of a configuration that repeats.
template <TwoWayDfa M>
std::string find_repeated_configuration(const M& m, const Tape& tape, typename M::State s, std::size_t pos,
                                        std::uint64_t budget) {
  using S = typename M::State;
  auto next = [&](std::pair<S, std::size_t>& c) {
    auto tr = m.step(c.first, tape.at(c.second));
    c.second = tape.move(c.second, tr.move);
    c.first = std::move(tr.next);
  };
  std::pair<S, std::size_t> tortoise{s, pos}, hare{s, pos};
  std::uint64_t power = 1, lam = 1;
  next(hare);
  while (!(tortoise == hare)) {
    if (m.halt_status(hare.first) != Halt::Running || lam > budget) {
      return "no repeat found within budget; last configuration (" + hare.first.describe() + ", pos " +
             std::to_string(hare.second) + ")";
    }
    if (power == lam) {
      tortoise = hare;
      power *= 2;
      lam = 0;
    }
    next(hare);
    ++lam;
  }
  return "repeated configuration (" + hare.first.describe() + ", pos " + std::to_string(hare.second) +
         ") with period " + std::to_string(lam);
}

}  // namespace detail

template <TwoWayDfa M>
DfaRun<typename M::State> run_dfa(const M& m, std::string_view w, const RunOptions& opts = {},
                                  StateCensus<typename M::State>* census = nullptr) {
  using S = typename M::State;
  const Tape tape(w, m.circular());
  StateCensus<S> local(opts.census_limit);
  auto& seen = census ? *census : local;
  RunTrace trace;
  S s = m.initial_state();
  std::size_t pos = 0;
  trace.record(pos, opts.record_heads);
  while (true) {
    const Halt h = m.halt_status(s);
    if (h != Halt::Running) {
      trace.outcome = outcome_of(h);
      break;
    }
    if (trace.steps >= opts.max_steps) {
      trace.visited_states = seen.size();
      throw CutoffError("2DFA exceeded " + std::to_string(opts.max_steps) + " steps (non-halting suspected): " +
                            detail::find_repeated_configuration(m, tape, s, pos, opts.max_steps),
                        trace);
    }
    seen.insert(s);
    auto tr = m.step(s, tape.at(pos));
    pos = tape.move(pos, tr.move);
    s = std::move(tr.next);
    ++trace.steps;
    trace.record(pos, opts.record_heads);
  }
  trace.visited_states = seen.size();
  return {trace.outcome, std::move(trace)};
}

// ---------------------------------------------------------------------------
// 2PFA

namespace detail {

inline double to_double(const Probability& p) { return p.convert_to<double>(); }

/// Draws an index with the given probabilities from one uniform variate;
/// never returns a zero-probability index.
inline std::size_t sample_index(std::span<const double> probs, std::mt19937_64& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  std::size_t pick = probs.size() - 1;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) {
      pick = i;
      break;
    }
  }
  while (probs[pick] <= 0.0 && pick > 0) --pick;
  return pick;
}

template <class S>
void check_distribution(const std::vector<Branch<S>>& branches) {
  Probability total = 0;
  for (const auto& b : branches) {
    if (b.probability < 0 || b.probability > 1) throw SpecError("2PFA transition probability outside [0,1]");
    total += b.probability;
  }
  if (total != 1) throw SpecError("2PFA outgoing probabilities do not sum to 1");
}

}  // namespace detail

template <class S>
struct PfaSample {
  Outcome outcome;
  RunTrace trace;
};

/// One sampled trajectory; the seed fully determines it.
template <TwoWayPfa M>
PfaSample<typename M::State> run_pfa_sample(const M& m, std::string_view w, std::uint64_t seed,
                                            const RunOptions& opts = {},
                                            StateCensus<typename M::State>* census = nullptr) {
  using S = typename M::State;
  const Tape tape(w, m.circular());
  StateCensus<S> local(opts.census_limit);
  auto& seen = census ? *census : local;
  std::mt19937_64 rng(seed);
  RunTrace trace;
  S s = m.initial_state();
  std::size_t pos = 0;
  trace.record(pos, opts.record_heads);
  while (true) {
    const Halt h = m.halt_status(s);
    if (h != Halt::Running) {
      trace.outcome = outcome_of(h);
      break;
    }
    if (trace.steps >= opts.max_steps) {
      trace.visited_states = seen.size();
      throw CutoffError("2PFA sample exceeded " + std::to_string(opts.max_steps) + " steps at (" + s.describe() +
                            ", pos " + std::to_string(pos) + ")",
                        trace);
    }
    seen.insert(s);
    auto st = m.step(s, tape.at(pos));
    Transition<S> tr;
    if (st.is_deterministic()) {
      tr = std::move(st.deterministic);
    } else {
      detail::check_distribution(st.branches);
      std::vector<double> probs;
      for (const auto& b : st.branches) probs.push_back(detail::to_double(b.probability));
      const std::size_t pick = detail::sample_index(probs, rng);
      tr = Transition<S>{std::move(st.branches[pick].next), st.branches[pick].move};
    }
    pos = tape.move(pos, tr.move);
    s = std::move(tr.next);
    ++trace.steps;
    trace.record(pos, opts.record_heads);
  }
  trace.visited_states = seen.size();
  return {trace.outcome, std::move(trace)};
}

struct PfaEnumeration {
  Probability accept = 0;
  Probability reject = 0;
  std::uint64_t max_steps = 0;
  std::uint64_t max_steps_accepting = 0;
  std::uint64_t max_steps_rejecting = 0;
  std::size_t branches = 0;
  std::size_t visited_states = 0;
};

/// Exact branch enumeration for machines carrying the one-shot annotation:
/// every path takes at most one randomized transition.
template <TwoWayPfa M>
PfaEnumeration pfa_enumerate(const M& m, std::string_view w, const RunOptions& opts = {},
                             StateCensus<typename M::State>* census = nullptr) {
  using S = typename M::State;
  if (!m.one_shot()) throw UnsupportedError("branch enumeration requires the one-shot randomness annotation");
  const Tape tape(w, m.circular());
  StateCensus<S> local(opts.census_limit);
  auto& seen = census ? *census : local;
  struct Pending {
    S state;
    std::size_t pos;
    Probability weight;
    std::uint64_t steps;
    bool branched;
  };
  PfaEnumeration out;
  std::vector<Pending> stack;
  stack.push_back({m.initial_state(), 0, Probability(1), 0, false});
  while (!stack.empty()) {
    Pending cur = std::move(stack.back());
    stack.pop_back();
    while (true) {
      const Halt h = m.halt_status(cur.state);
      if (h != Halt::Running) {
        ++out.branches;
        out.max_steps = std::max(out.max_steps, cur.steps);
        if (h == Halt::Accept) {
          out.accept += cur.weight;
          out.max_steps_accepting = std::max(out.max_steps_accepting, cur.steps);
        } else {
          out.reject += cur.weight;
          out.max_steps_rejecting = std::max(out.max_steps_rejecting, cur.steps);
        }
        break;
      }
      if (cur.steps >= opts.max_steps) {
        RunTrace t;
        t.steps = cur.steps;
        throw CutoffError("2PFA branch exceeded " + std::to_string(opts.max_steps) + " steps at (" +
                              cur.state.describe() + ", pos " + std::to_string(cur.pos) + ")",
                          t);
      }
      seen.insert(cur.state);
      auto st = m.step(cur.state, tape.at(cur.pos));
      ++cur.steps;
      if (st.is_deterministic()) {
        cur.pos = tape.move(cur.pos, st.deterministic.move);
        cur.state = std::move(st.deterministic.next);
        continue;
      }
      if (cur.branched) throw SpecError("one-shot 2PFA took a second randomized transition");
      detail::check_distribution(st.branches);
      for (std::size_t i = 1; i < st.branches.size(); ++i) {
        auto& b = st.branches[i];
        if (b.probability == 0) continue;
        stack.push_back({std::move(b.next), tape.move(cur.pos, b.move), cur.weight * b.probability, cur.steps, true});
      }
      auto& first = st.branches.front();
      if (first.probability == 0) break;
      cur.weight *= first.probability;
      cur.pos = tape.move(cur.pos, first.move);
      cur.state = std::move(first.next);
      cur.branched = true;
    }
  }
  out.visited_states = seen.size();
  return out;
}

namespace detail {

/// Exact Gaussian elimination over rationals: solves A x = b in place.
inline std::vector<Probability> solve_rational(std::vector<std::vector<Probability>> a, std::vector<Probability> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && a[piv][col] == 0) ++piv;
    if (piv == n) throw UnsupportedError("absorbing-chain system is singular");
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0) continue;
      const Probability f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<Probability> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

}  // namespace detail

inline constexpr std::size_t kAbsorbingNodeLimit = 1'000'000;
inline constexpr std::size_t kAbsorbingComponentLimit = 256;

/// Exact acceptance probability by solving the absorbing Markov chain on the
/// reachable configuration graph (state, head), one strongly connected
/// component at a time in reverse topological order. Configurations trapped
/// in a closed component never halt and contribute 0.
template <TwoWayPfa M>
Probability pfa_absorbing_prob(const M& m, std::string_view w, std::size_t node_limit = kAbsorbingNodeLimit) {
  using S = typename M::State;
  struct Config {
    S state;
    std::size_t pos;
    bool operator==(const Config&) const = default;
  };
  struct ConfigHash {
    std::size_t operator()(const Config& c) const {
      std::size_t h = c.state.hash();
      hash_combine(h, c.pos);
      return h;
    }
  };
  const Tape tape(w, m.circular());
  std::unordered_map<Config, std::size_t, ConfigHash> index;
  std::vector<Config> nodes;
  std::vector<std::vector<std::pair<std::size_t, Probability>>> edges;
  std::vector<Halt> halt;

  auto intern = [&](Config c) {
    auto [it, fresh] = index.try_emplace(c, nodes.size());
    if (fresh) {
      if (nodes.size() >= node_limit) {
        throw UnsupportedError("configuration graph exceeds " + std::to_string(node_limit) + " nodes");
      }
      nodes.push_back(std::move(c));
      edges.emplace_back();
      halt.push_back(m.halt_status(nodes.back().state));
    }
    return it->second;
  };

  intern({m.initial_state(), 0});
  for (std::size_t v = 0; v < nodes.size(); ++v) {
    if (halt[v] != Halt::Running) continue;
    auto st = m.step(nodes[v].state, tape.at(nodes[v].pos));
    std::vector<std::pair<std::size_t, Probability>> out;
    if (st.is_deterministic()) {
      Config c{std::move(st.deterministic.next), tape.move(nodes[v].pos, st.deterministic.move)};
      out.emplace_back(intern(std::move(c)), Probability(1));
    } else {
      detail::check_distribution(st.branches);
      for (auto& b : st.branches) {
        if (b.probability == 0) continue;
        Config c{std::move(b.next), tape.move(nodes[v].pos, b.move)};
        out.emplace_back(intern(std::move(c)), b.probability);
      }
    }
    edges[v] = std::move(out);
  }

  // Iterative Tarjan; components come out in reverse topological order.
  const std::size_t N = nodes.size();
  constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> order(N, kUnset), low(N, 0), comp(N, kUnset);
  std::vector<bool> on_stack(N, false);
  std::vector<std::size_t> stack;
  std::vector<Probability> value(N);
  std::size_t counter = 0, comp_count = 0;

  auto solve_component = [&](const std::vector<std::size_t>& members) {
    const std::size_t k = members.size();
    std::unordered_map<std::size_t, std::size_t> local;
    for (std::size_t i = 0; i < k; ++i) local[members[i]] = i;
    bool closed = true;
    for (auto v : members) {
      if (halt[v] != Halt::Running) closed = false;
      for (const auto& [u, p] : edges[v])
        if (!local.contains(u)) closed = false;
    }
    if (closed) {
      for (auto v : members) value[v] = 0;
      return;
    }
    if (k == 1 && (halt[members[0]] != Halt::Running ||
                   std::none_of(edges[members[0]].begin(), edges[members[0]].end(),
                                [&](const auto& e) { return e.first == members[0]; }))) {
      const auto v = members[0];
      if (halt[v] == Halt::Accept) {
        value[v] = 1;
      } else if (halt[v] == Halt::Reject) {
        value[v] = 0;
      } else {
        Probability acc = 0;
        for (const auto& [u, p] : edges[v]) acc += p * value[u];
        value[v] = acc;
      }
      return;
    }
    if (k > kAbsorbingComponentLimit) {
      throw UnsupportedError("strongly connected component of " + std::to_string(k) + " configurations is too large");
    }
    std::vector<std::vector<Probability>> a(k, std::vector<Probability>(k, Probability(0)));
    std::vector<Probability> rhs(k, Probability(0));
    for (std::size_t i = 0; i < k; ++i) {
      const auto v = members[i];
      a[i][i] = 1;
      if (halt[v] == Halt::Accept) {
        rhs[i] = 1;
        continue;
      }
      if (halt[v] == Halt::Reject) continue;
      for (const auto& [u, p] : edges[v]) {
        auto it = local.find(u);
        if (it != local.end()) {
          a[i][it->second] -= p;
        } else {
          rhs[i] += p * value[u];
        }
      }
    }
    auto x = detail::solve_rational(std::move(a), std::move(rhs));
    for (std::size_t i = 0; i < k; ++i) value[members[i]] = x[i];
  };

  struct Frame {
    std::size_t v;
    std::size_t edge;
  };
  for (std::size_t root = 0; root < N; ++root) {
    if (order[root] != kUnset) continue;
    std::vector<Frame> call{{root, 0}};
    order[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      auto& f = call.back();
      if (f.edge < edges[f.v].size()) {
        const auto u = edges[f.v][f.edge++].first;
        if (order[u] == kUnset) {
          order[u] = low[u] = counter++;
          stack.push_back(u);
          on_stack[u] = true;
          call.push_back({u, 0});
        } else if (on_stack[u]) {
          low[f.v] = std::min(low[f.v], order[u]);
        }
        continue;
      }
      const auto v = f.v;
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      if (low[v] == order[v]) {
        std::vector<std::size_t> members;
        std::size_t u;
        do {
          u = stack.back();
          stack.pop_back();
          on_stack[u] = false;
          comp[u] = comp_count;
          members.push_back(u);
        } while (u != v);
        ++comp_count;
        solve_component(members);
      }
    }
  }
  return value[0];
}

/// Exact acceptance probability: branch enumeration for one-shot machines,
/// otherwise the absorbing-chain solve.
template <TwoWayPfa M>
Probability pfa_exact_prob(const M& m, std::string_view w, const RunOptions& opts = {}) {
  if (m.one_shot()) return pfa_enumerate(m, w, opts).accept;
  return pfa_absorbing_prob(m, w);
}

// ---------------------------------------------------------------------------
// 2QCFA

template <class S>
struct QcfaBranch {
  S state;
  std::size_t pos = 0;
  StateVector psi;
  double weight = 1.0;
  std::uint64_t steps = 0;
};

/// Applies single 2QCFA steps to branches. Operators and measurements are
/// validated the first time each is used.
template <TwoWayQcfa M>
class QcfaStepper {
 public:
  using S = typename M::State;

  explicit QcfaStepper(const M& m) : m_(m) {}

  QcfaBranch<S> start() const {
    QcfaBranch<S> b{m_.initial_state(), 0, m_.initial_amplitudes(), 1.0, 0};
    if (b.psi.size() != m_.quantum_dim()) throw SpecError("initial quantum state has the wrong dimension");
    if (std::abs(norm_squared(b.psi) - 1.0) > kNormTol) throw SpecError("initial quantum state is not normalized");
    return b;
  }

  /// Advances `b` by one step reading `sym`. For a measurement, `b` keeps the
  /// first surviving outcome and the others are appended to `spawned`;
  /// returns false when every outcome was pruned. With `choose`, only that
  /// outcome is followed and left unnormalized (weight untouched).
  bool advance(QcfaBranch<S>& b, Symbol sym, const Tape& tape, std::vector<QcfaBranch<S>>& spawned,
               std::optional<std::size_t> choose = std::nullopt) {
    auto act = m_.action(b.state, sym);
    ++b.steps;
    if (auto* u = std::get_if<UnitaryStep<S>>(&act)) {
      check(*u->op);
      twoway::apply(*u->op, b.psi);
      if (normalized_ && !is_permutation(*u->op)) {
        const double nrm = norm_squared(b.psi);
        if (std::abs(nrm - 1.0) > kNormTol) {
          throw NumericalError("state norm drifted to " + std::to_string(nrm) + " at " + b.state.describe());
        }
      }
      b.pos = tape.move(b.pos, u->next.move);
      b.state = std::move(u->next.next);
      return true;
    }
    auto& ms = std::get<MeasureStep<S>>(act);
    check(*ms.measurement);
    if (ms.on_outcome.size() != ms.measurement->outcomes()) {
      throw SpecError("measurement step maps " + std::to_string(ms.on_outcome.size()) + " outcomes, expected " +
                      std::to_string(ms.measurement->outcomes()));
    }
    if (choose) {
      b.psi = ms.measurement->project(*choose, b.psi);
      b.pos = tape.move(b.pos, ms.on_outcome[*choose].move);
      b.state = std::move(ms.on_outcome[*choose].next);
      return true;
    }
    const auto probs = ms.measurement->probabilities(b.psi);
    double total = 0.0;
    for (double p : probs) total += p;
    if (std::abs(total - 1.0) > kNormTol) {
      throw NumericalError("measurement probabilities sum to " + std::to_string(total));
    }
    std::optional<QcfaBranch<S>> keep;
    for (std::size_t j = 0; j < probs.size(); ++j) {
      if (b.weight * probs[j] < kBranchPruneTol) {
        pruned_ += b.weight * probs[j];
        continue;
      }
      QcfaBranch<S> nb;
      nb.psi = ms.measurement->project(j, b.psi);
      const double scale = 1.0 / std::sqrt(probs[j]);
      for (auto& a : nb.psi) a *= scale;
      nb.weight = b.weight * probs[j];
      nb.steps = b.steps;
      nb.pos = tape.move(b.pos, ms.on_outcome[j].move);
      nb.state = ms.on_outcome[j].next;
      if (!keep) {
        keep = std::move(nb);
      } else {
        spawned.push_back(std::move(nb));
      }
    }
    if (!keep) return false;
    b = std::move(*keep);
    return true;
  }

  /// Outcome probabilities of a measurement step without collapsing; nullopt
  /// for a unitary step.
  std::optional<std::vector<double>> peek_measurement(const QcfaBranch<S>& b, Symbol sym) {
    auto act = m_.action(b.state, sym);
    auto* ms = std::get_if<MeasureStep<S>>(&act);
    if (!ms) return std::nullopt;
    return ms->measurement->probabilities(b.psi);
  }

  double pruned_mass() const { return pruned_; }

  /// Skip norm checks; used when following a single unnormalized outcome path.
  void allow_unnormalized() { normalized_ = false; }

 private:
  void check(const Operator& op) {
    if (validated_.insert(&op).second) {
      if (dimension(op) != m_.quantum_dim()) throw SpecError("operator dimension does not match the register");
      validate(op);
    }
  }
  void check(const Measurement& ms) {
    if (validated_.insert(&ms).second) {
      if (ms.dimension() != m_.quantum_dim()) throw SpecError("measurement dimension does not match the register");
      ms.validate();
    }
  }

  const M& m_;
  std::unordered_set<const void*> validated_;
  double pruned_ = 0.0;
  bool normalized_ = true;
};

struct QcfaExact {
  double accept = 0.0;
  double reject = 0.0;
  double pruned = 0.0;
  std::uint64_t max_steps = 0;
  std::uint64_t max_steps_accepting = 0;
  std::uint64_t max_steps_rejecting = 0;
  std::size_t branches = 0;
  std::size_t visited_states = 0;
};

/// Exact mode: enumerates measurement-outcome branches, pruning those below 1e-12.
template <TwoWayQcfa M>
QcfaExact run_qcfa_exact(const M& m, std::string_view w, const RunOptions& opts = {},
                         StateCensus<typename M::State>* census = nullptr) {
  using S = typename M::State;
  const Tape tape(w, m.circular());
  StateCensus<S> local(opts.census_limit);
  auto& seen = census ? *census : local;
  QcfaStepper<M> stepper(m);
  QcfaExact out;
  std::vector<QcfaBranch<S>> pending;
  pending.push_back(stepper.start());
  while (!pending.empty()) {
    QcfaBranch<S> b = std::move(pending.back());
    pending.pop_back();
    bool alive = true;
    while (alive) {
      const Halt h = m.halt_status(b.state);
      if (h != Halt::Running) {
        ++out.branches;
        out.max_steps = std::max(out.max_steps, b.steps);
        if (h == Halt::Accept) {
          out.accept += b.weight;
          out.max_steps_accepting = std::max(out.max_steps_accepting, b.steps);
        } else {
          out.reject += b.weight;
          out.max_steps_rejecting = std::max(out.max_steps_rejecting, b.steps);
        }
        break;
      }
      if (b.steps >= opts.max_steps) {
        RunTrace t;
        t.steps = b.steps;
        throw CutoffError("2QCFA branch exceeded " + std::to_string(opts.max_steps) + " steps at (" +
                              b.state.describe() + ", pos " + std::to_string(b.pos) + ")",
                          t);
      }
      seen.insert(b.state);
      alive = stepper.advance(b, tape.at(b.pos), tape, pending);
    }
  }
  out.pruned = stepper.pruned_mass();
  out.visited_states = seen.size();
  return out;
}

template <class S>
struct QcfaSample {
  Outcome outcome;
  RunTrace trace;
};

/// Sample mode: one trajectory with measurement outcomes drawn from a seeded stream.
template <TwoWayQcfa M>
QcfaSample<typename M::State> run_qcfa_sample(const M& m, std::string_view w, std::uint64_t seed,
                                              const RunOptions& opts = {},
                                              StateCensus<typename M::State>* census = nullptr) {
  using S = typename M::State;
  const Tape tape(w, m.circular());
  StateCensus<S> local(opts.census_limit);
  auto& seen = census ? *census : local;
  QcfaStepper<M> stepper(m);
  std::mt19937_64 rng(seed);
  RunTrace trace;
  auto b = stepper.start();
  std::vector<QcfaBranch<S>> unused;
  trace.record(b.pos, opts.record_heads);
  while (true) {
    const Halt h = m.halt_status(b.state);
    if (h != Halt::Running) {
      trace.outcome = outcome_of(h);
      break;
    }
    if (b.steps >= opts.max_steps) {
      trace.steps = b.steps;
      throw CutoffError("2QCFA sample exceeded " + std::to_string(opts.max_steps) + " steps", trace);
    }
    seen.insert(b.state);
    const Symbol sym = tape.at(b.pos);
    std::optional<std::size_t> pick;
    if (auto probs = stepper.peek_measurement(b, sym)) {
      pick = detail::sample_index(*probs, rng);
      const double p = (*probs)[*pick];
      stepper.advance(b, sym, tape, unused, pick);
      const double scale = 1.0 / std::sqrt(p);
      for (auto& a : b.psi) a *= scale;
    } else {
      stepper.advance(b, sym, tape, unused);
    }
    trace.record(b.pos, opts.record_heads);
  }
  trace.steps = b.steps;
  trace.visited_states = seen.size();
  return {trace.outcome, std::move(trace)};
}

// ---------------------------------------------------------------------------
// Cost accounting

struct CostReport {
  std::uint64_t T = 0;            // max steps over all evaluated inputs
  std::uint64_t T_accepting = 0;  // max over accepting runs / branches
  std::uint64_t T_rejecting = 0;  // max over rejecting runs / branches
  std::size_t qubits = 0;
  double log2_declared_states = 0.0;
  std::size_t visited_states = 0;
  bool census_saturated = false;
  double S = 0.0;          // qubits + log2(declared classical states)
  double S_visited = 0.0;  // qubits + log2(visited classical states)
  double TS = 0.0;
};

/// Evaluates `m` on every input (exact mode for probabilistic machines) and
/// aggregates T, S and TS.
template <Machine M>
CostReport cost_report(const M& m, std::span<const std::string> inputs, const RunOptions& opts = {}) {
  if (inputs.empty()) throw InputError("cost_report: no inputs");
  using S = typename M::State;
  StateCensus<S> census(opts.census_limit);
  CostReport r;
  for (const auto& w : inputs) {
    if constexpr (TwoWayDfa<M>) {
      auto run = run_dfa(m, w, opts, &census);
      r.T = std::max(r.T, run.trace.steps);
      auto& side = run.outcome == Outcome::Accept ? r.T_accepting : r.T_rejecting;
      side = std::max(side, run.trace.steps);
    } else if constexpr (TwoWayPfa<M>) {
      auto e = pfa_enumerate(m, w, opts, &census);
      r.T = std::max(r.T, e.max_steps);
      r.T_accepting = std::max(r.T_accepting, e.max_steps_accepting);
      r.T_rejecting = std::max(r.T_rejecting, e.max_steps_rejecting);
    } else {
      auto e = run_qcfa_exact(m, w, opts, &census);
      r.T = std::max(r.T, e.max_steps);
      r.T_accepting = std::max(r.T_accepting, e.max_steps_accepting);
      r.T_rejecting = std::max(r.T_rejecting, e.max_steps_rejecting);
    }
  }
  r.qubits = machine_qubits(m);
  r.log2_declared_states = m.declared_log2_states();
  r.visited_states = census.size();
  r.census_saturated = census.saturated();
  r.S = static_cast<double>(r.qubits) + r.log2_declared_states;
  r.S_visited = static_cast<double>(r.qubits) + (r.visited_states > 0 ? std::log2(static_cast<double>(r.visited_states)) : 0.0);
  if (r.S_visited > r.S + 1e-9) {
    throw SpecError("visited " + std::to_string(r.visited_states) + " classical states, more than the declared bound");
  }
  r.TS = static_cast<double>(r.T) * r.S;
  return r;
}

}  // namespace twoway
