#pragma once

// Quantum query algorithms over |i, b, w> registers, their state-vector
// evaluator, the Grover-OR and exact-parity constructions, and a
// brute-force decision-tree depth oracle.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "twoway/bits.hpp"
#include "twoway/boolfn.hpp"
#include "twoway/errors.hpp"
#include "twoway/quantum.hpp"

namespace twoway {

inline constexpr std::size_t kIndexReg = 0;
inline constexpr std::size_t kAnswerReg = 1;
inline constexpr std::size_t kWorkspaceReg = 2;

/// U_0, O, U_1, O, ..., U_t followed by a measurement. A round whose outcome
/// is not accepting hands its collapsed state to the next round; a
/// non-accepting outcome in the last round rejects.
struct QueryRound {
  std::vector<Operator> unitaries;
  Measurement measurement;
  std::vector<std::uint8_t> accepting;  // indexed by outcome

  std::size_t calls() const { return unitaries.empty() ? 0 : unitaries.size() - 1; }
};

class QueryAlgorithm {
 public:
  QueryAlgorithm(std::string name, std::size_t n, std::size_t workspace, StateVector initial,
                 std::vector<QueryRound> rounds, double epsilon, std::optional<double> query_constant = {})
      : name_(std::move(name)),
        n_(n),
        workspace_(workspace),
        initial_(std::move(initial)),
        rounds_(std::move(rounds)),
        epsilon_(epsilon),
        query_constant_(query_constant) {
    if (n_ == 0) throw InputError("QueryAlgorithm: arity must be positive");
    if (workspace_ == 0) throw InputError("QueryAlgorithm: workspace dimension must be positive");
  }

  const std::string& name() const { return name_; }
  std::size_t n() const { return n_; }
  std::size_t workspace() const { return workspace_; }
  Layout layout() const { return Layout{n_, 2, workspace_}; }
  /// k = n · 2 · d_w.
  std::size_t dim() const { return n_ * 2 * workspace_; }
  const StateVector& initial() const { return initial_; }
  const std::vector<QueryRound>& rounds() const { return rounds_; }
  double epsilon() const { return epsilon_; }
  /// c in "calls <= c·sqrt(n)" when the construction declares one.
  std::optional<double> query_constant() const { return query_constant_; }

  std::size_t calls() const {
    std::size_t t = 0;
    for (const auto& r : rounds_) t += r.calls();
    return t;
  }

  /// Throws SpecError on any structural or unitarity defect.
  void validate() const {
    const std::size_t k = dim();
    if (initial_.size() != k) throw SpecError(name_ + ": initial state has dimension " + std::to_string(initial_.size()));
    if (std::abs(norm_squared(initial_) - 1.0) > kNormTol) throw SpecError(name_ + ": initial state is not normalized");
    if (rounds_.empty()) throw SpecError(name_ + ": no rounds");
    if (!(epsilon_ >= 0.0 && epsilon_ < 0.5)) throw SpecError(name_ + ": declared error must lie in [0, 1/2)");
    for (const auto& r : rounds_) {
      if (r.unitaries.empty()) throw SpecError(name_ + ": round without U_0");
      for (const auto& u : r.unitaries) {
        if (dimension(u) != k) throw SpecError(name_ + ": unitary dimension mismatch");
        validate_op(u);
      }
      if (r.measurement.dimension() != k) throw SpecError(name_ + ": measurement dimension mismatch");
      r.measurement.validate();
      if (r.accepting.size() != r.measurement.outcomes()) throw SpecError(name_ + ": accepting mask size mismatch");
    }
  }

 private:
  static void validate_op(const Operator& op) { twoway::validate(op); }

  std::string name_;
  std::size_t n_;
  std::size_t workspace_;
  StateVector initial_;
  std::vector<QueryRound> rounds_;
  double epsilon_;
  std::optional<double> query_constant_;
};

/// |i, b, w> -> |i, b ^ z_i, w> on a state over `layout`.
inline void apply_oracle(BitSpan z, std::span<Complex> psi, const Layout& layout) {
  if (layout.registers() < 2 || layout.dim(kIndexReg) != z.size() || layout.dim(kAnswerReg) != 2) {
    throw InputError("apply_oracle: layout does not match |z| = " + std::to_string(z.size()));
  }
  if (psi.size() != layout.size()) throw InputError("apply_oracle: state dimension mismatch");
  twoway::apply(ops::oracle(layout, kIndexReg, kAnswerReg, Bits(z.begin(), z.end())), psi);
}

namespace detail {

inline void check_input(const QueryAlgorithm& a, BitSpan z) {
  if (z.size() != a.n()) {
    throw InputError(a.name() + ": input has " + std::to_string(z.size()) + " bits, expected " + std::to_string(a.n()));
  }
}

}  // namespace detail

/// Exact acceptance probability, enumerating continuation branches between rounds.
inline double run_query_alg(const QueryAlgorithm& a, BitSpan z) {
  detail::check_input(a, z);
  const Operator oracle = ops::oracle(a.layout(), kIndexReg, kAnswerReg, Bits(z.begin(), z.end()));
  struct Pending {
    std::size_t round;
    StateVector psi;  // unnormalized; its squared norm is the branch weight
  };
  double accept = 0.0;
  std::vector<Pending> stack{{0, a.initial()}};
  while (!stack.empty()) {
    auto [r, psi] = std::move(stack.back());
    stack.pop_back();
    const auto& round = a.rounds()[r];
    for (std::size_t u = 0; u < round.unitaries.size(); ++u) {
      if (u > 0) twoway::apply(oracle, psi);
      twoway::apply(round.unitaries[u], psi);
    }
    const auto probs = round.measurement.probabilities(psi);
    for (std::size_t j = 0; j < probs.size(); ++j) {
      if (round.accepting[j]) {
        accept += probs[j];
      } else if (r + 1 < a.rounds().size() && probs[j] >= kBranchPruneTol) {
        stack.push_back({r + 1, round.measurement.project(j, psi)});
      }
    }
  }
  return accept;
}

/// Unnormalized state right after the unitary that follows oracle call j
/// (j = 0: right after the first U_0). Between rounds the first
/// non-accepting outcome is followed.
inline StateVector state_after_calls(const QueryAlgorithm& a, BitSpan z, std::size_t j) {
  detail::check_input(a, z);
  if (j > a.calls()) throw InputError("state_after_calls: j exceeds the number of oracle calls");
  const Operator oracle = ops::oracle(a.layout(), kIndexReg, kAnswerReg, Bits(z.begin(), z.end()));
  StateVector psi = a.initial();
  std::size_t done = 0;
  for (const auto& round : a.rounds()) {
    for (std::size_t u = 0; u < round.unitaries.size(); ++u) {
      if (u > 0) {
        twoway::apply(oracle, psi);
        ++done;
      }
      twoway::apply(round.unitaries[u], psi);
      if (done == j && (u > 0 || j == 0)) return psi;
    }
    std::size_t cont = 0;
    while (cont < round.accepting.size() && round.accepting[cont]) ++cont;
    if (cont == round.accepting.size()) break;
    psi = round.measurement.project(cont, psi);
  }
  throw InputError("state_after_calls: call " + std::to_string(j) + " is not reachable");
}

// ---------------------------------------------------------------------------
// Constructions

inline constexpr double kGroverQueryConstant = 5.0;

/// Iteration counts per round: 1, then floor(1.5^k) deduplicated up to
/// floor(pi/4 · sqrt(n)) + 1.
inline std::vector<std::size_t> grover_schedule(std::size_t n) {
  const auto top = static_cast<std::size_t>(std::floor(std::numbers::pi / 4.0 * std::sqrt(static_cast<double>(n)))) + 1;
  std::set<std::size_t> js;
  double x = 1.0;
  while (true) {
    const auto j = static_cast<std::size_t>(x);
    js.insert(j);
    if (j >= top) break;
    x *= 1.5;
  }
  std::vector<std::size_t> out{1};
  out.insert(out.end(), js.begin(), js.end());
  return out;
}

/// Bounded-error OR_n with one-sided error: each round runs j Grover
/// iterations and then one verification call that copies z_i into b before
/// b is measured. Works for every n >= 1 without padding since the
/// diffusion acts on an index register of any dimension.
inline QueryAlgorithm grover_or(std::size_t n) {
  if (n == 0) throw InputError("grover_or: n must be positive");
  const Layout L{n, 2, 1};
  const Operator prep_b = ops::sequence({ops::pauli_x(L, kAnswerReg), ops::hadamard(L, kAnswerReg)});
  const Operator unprep_b = ops::sequence({ops::hadamard(L, kAnswerReg), ops::pauli_x(L, kAnswerReg)});
  const Operator diffusion = ops::Diffusion{L, kIndexReg};
  std::vector<QueryRound> rounds;
  const auto schedule = grover_schedule(n);
  for (std::size_t r = 0; r < schedule.size(); ++r) {
    const std::size_t j = schedule[r];
    QueryRound round;
    round.unitaries.push_back(r == 0 ? ops::sequence({ops::UniformPrep{L, kIndexReg}, prep_b}) : prep_b);
    for (std::size_t it = 1; it < j; ++it) round.unitaries.push_back(diffusion);
    round.unitaries.push_back(ops::sequence({diffusion, unprep_b}));
    round.unitaries.push_back(ops::identity(L.size()));  // after the verification call
    round.measurement = Measurement::of_register(L, kAnswerReg);
    round.accepting = {0, 1};
    rounds.push_back(std::move(round));
  }
  return QueryAlgorithm("grover-or:" + std::to_string(n), n, 1, basis_state(L.size(), 0), std::move(rounds), 1.0 / 3.0,
                        kGroverQueryConstant);
}

namespace detail {

inline std::vector<Complex> pair_hadamard(std::size_t n, std::size_t a, std::size_t b) {
  std::vector<Complex> m(n * n);
  for (std::size_t i = 0; i < n; ++i) m[i * n + i] = 1.0;
  const double h = 1.0 / std::sqrt(2.0);
  m[a * n + a] = h;
  m[a * n + b] = h;
  m[b * n + a] = h;
  m[b * n + b] = -h;
  return m;
}

}  // namespace detail

/// Zero-error XOR_n with n/2 calls. The answer bit stays in |->, so each call
/// multiplies the amplitude on index i by (-1)^{z_i}; the live pair of
/// indices slides two steps per call and a final Hadamard on the last pair
/// reads off the relative phase.
inline QueryAlgorithm exact_parity(std::size_t n) {
  if (n == 0 || n % 2 != 0) throw InputError("exact_parity: n must be even and positive");
  const Layout L{n, 2, 1};
  QueryRound round;
  round.unitaries.push_back(ops::sequence({ops::local(L, kIndexReg, detail::pair_hadamard(n, 0, 1)),
                                           ops::pauli_x(L, kAnswerReg), ops::hadamard(L, kAnswerReg)}));
  for (std::size_t k = 0; k + 1 < n / 2; ++k) {
    std::vector<Complex> perm(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t to = i;
      if (i == 2 * k || i == 2 * k + 1) to = i + 2;
      if (i == 2 * k + 2 || i == 2 * k + 3) to = i - 2;
      perm[to * n + i] = 1.0;
    }
    round.unitaries.push_back(ops::local(L, kIndexReg, std::move(perm)));
  }
  round.unitaries.push_back(ops::sequence({ops::local(L, kIndexReg, detail::pair_hadamard(n, n - 2, n - 1)),
                                           ops::hadamard(L, kAnswerReg), ops::pauli_x(L, kAnswerReg)}));
  round.measurement = Measurement::of_register(L, kIndexReg);
  round.accepting.assign(n, 0);
  round.accepting[n - 1] = 1;
  return QueryAlgorithm("exact-parity:" + std::to_string(n), n, 1, basis_state(L.size(), 0), {std::move(round)}, 0.0);
}

// ---------------------------------------------------------------------------
// Decision trees

class DecisionTree {
 public:
  struct Node {
    int var = -1;  // -1 marks a leaf
    bool value = false;
    std::size_t child[2] = {0, 0};
  };

  DecisionTree(std::size_t arity, std::vector<Node> nodes) : arity_(arity), nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw InputError("DecisionTree: no nodes");
  }

  static DecisionTree leaf(std::size_t arity, bool value) { return DecisionTree(arity, {Node{-1, value, {0, 0}}}); }

  std::size_t arity() const { return arity_; }
  const std::vector<Node>& nodes() const { return nodes_; }

  std::size_t depth() const { return depth_from(0); }

  /// Value and the queried indices along the path.
  std::pair<bool, std::vector<std::size_t>> evaluate(BitSpan x) const {
    if (x.size() != arity_) throw InputError("DecisionTree: input arity mismatch");
    std::vector<std::size_t> path;
    std::size_t v = 0;
    while (nodes_[v].var >= 0) {
      const auto i = static_cast<std::size_t>(nodes_[v].var);
      path.push_back(i);
      v = nodes_[v].child[x[i]];
    }
    return {nodes_[v].value, std::move(path)};
  }

 private:
  std::size_t depth_from(std::size_t v) const {
    if (nodes_[v].var < 0) return 0;
    return 1 + std::max(depth_from(nodes_[v].child[0]), depth_from(nodes_[v].child[1]));
  }

  std::size_t arity_;
  std::vector<Node> nodes_;
};

inline constexpr std::size_t kDecisionTreeMaxArity = 10;

namespace detail {

/// Minimax over restrictions; a restriction is a base-3 word with digit 2
/// meaning "free". Digit i has weight 3^(p-1-i).
class DepthSolver {
 public:
  explicit DepthSolver(const BoolFunction& h) : p_(h.arity()) {
    if (p_ > kDecisionTreeMaxArity) {
      throw RefusalError("dt_optimal_depth: arity " + std::to_string(p_) + " exceeds " +
                         std::to_string(kDecisionTreeMaxArity));
    }
    const auto* table = h.truth_table();
    if (!table) throw InputError("dt_optimal_depth: truth table unavailable");
    pow3_.assign(p_ + 1, 1);
    for (std::size_t i = 1; i <= p_; ++i) pow3_[i] = pow3_[i - 1] * 3;
    const std::size_t total = pow3_[p_];
    value_.assign(total, 0);
    depth_.assign(total, -1);
    best_.assign(total, -1);
    // Restrictions in increasing order have every proper refinement earlier
    // when a free digit (2) becomes 0 or 1.
    for (std::size_t r = 0; r < total; ++r) {
      const int fv = first_free(r);
      if (fv < 0) {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < p_; ++i) idx = (idx << 1) | digit(r, i);
        value_[r] = (*table)[idx];
      } else {
        const auto w = pow3_[p_ - 1 - fv];
        const auto v0 = value_[r - 2 * w], v1 = value_[r - w];
        value_[r] = (v0 == v1) ? v0 : kMixed;
      }
    }
    for (std::size_t r = 0; r < total; ++r) {
      if (value_[r] != kMixed) {
        depth_[r] = 0;
        continue;
      }
      int best = std::numeric_limits<int>::max();
      for (std::size_t i = 0; i < p_; ++i) {
        if (digit(r, i) != 2) continue;
        const auto w = pow3_[p_ - 1 - i];
        const int d = 1 + std::max(depth_[r - 2 * w], depth_[r - w]);
        if (d < best) {
          best = d;
          best_[r] = static_cast<int>(i);
        }
      }
      depth_[r] = best;
    }
  }

  std::size_t root() const { return pow3_[p_] - 1; }
  int depth(std::size_t r) const { return depth_[r]; }

  DecisionTree tree() const {
    std::vector<DecisionTree::Node> nodes;
    build(root(), nodes);
    return DecisionTree(p_, std::move(nodes));
  }

 private:
  static constexpr std::uint8_t kMixed = 2;

  std::size_t digit(std::size_t r, std::size_t i) const { return (r / pow3_[p_ - 1 - i]) % 3; }

  int first_free(std::size_t r) const {
    for (std::size_t i = 0; i < p_; ++i)
      if (digit(r, i) == 2) return static_cast<int>(i);
    return -1;
  }

  std::size_t build(std::size_t r, std::vector<DecisionTree::Node>& nodes) const {
    const std::size_t id = nodes.size();
    nodes.push_back({});
    if (value_[r] != kMixed) {
      nodes[id].value = value_[r] != 0;
      return id;
    }
    const auto i = static_cast<std::size_t>(best_[r]);
    const auto w = pow3_[p_ - 1 - i];
    nodes[id].var = static_cast<int>(i);
    const auto c0 = build(r - 2 * w, nodes);
    const auto c1 = build(r - w, nodes);
    nodes[id].child[0] = c0;
    nodes[id].child[1] = c1;
    return id;
  }

  std::size_t p_;
  std::vector<std::size_t> pow3_;
  std::vector<std::uint8_t> value_;
  std::vector<int> depth_;
  std::vector<int> best_;
};

}  // namespace detail

/// Exact deterministic query complexity D(h); refuses p > 10.
inline std::size_t dt_optimal_depth(const BoolFunction& h) {
  detail::DepthSolver s(h);
  return static_cast<std::size_t>(s.depth(s.root()));
}

/// A decision tree achieving D(h).
inline DecisionTree dt_optimal_tree(const BoolFunction& h) { return detail::DepthSolver(h).tree(); }

}  // namespace twoway
