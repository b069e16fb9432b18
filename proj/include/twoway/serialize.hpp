#pragma once

// JSON encoding of operators, measurements, query algorithms, explicit
// table machines, transcripts and compilation reports. Named machine
// families ("eq-dfa:8", "grover-ints:16", ...) resolve to constructors.

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "twoway/automata.hpp"
#include "twoway/commlab.hpp"
#include "twoway/compiler.hpp"
#include "twoway/errors.hpp"
#include "twoway/handcrafted.hpp"
#include "twoway/qquery.hpp"
#include "twoway/quantum.hpp"

namespace twoway {

using Json = nlohmann::json;

namespace io {

inline Json complex_to_json(Complex c) { return Json::array({c.real(), c.imag()}); }

inline Complex complex_from_json(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2) throw InputError("complex numbers are [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline Json vector_to_json(std::span<const Complex> v) {
  Json out = Json::array();
  for (auto c : v) out.push_back(complex_to_json(c));
  return out;
}

inline std::vector<Complex> vector_from_json(const Json& j) {
  if (!j.is_array()) throw InputError("expected an array of complex numbers");
  std::vector<Complex> out;
  for (const auto& e : j) out.push_back(complex_from_json(e));
  return out;
}

inline Json layout_to_json(const Layout& L) {
  Json out = Json::array();
  for (std::size_t r = 0; r < L.registers(); ++r) out.push_back(L.dim(r));
  return out;
}

inline Layout layout_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw InputError("layout must be a non-empty array of register dimensions");
  Layout L;
  for (const auto& d : j) L.append(d.get<std::size_t>());
  return L;
}

template <class T>
T required(const Json& j, const char* key) {
  if (!j.contains(key)) throw InputError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("field '") + key + "': " + e.what());
  }
}

// -- operators ---------------------------------------------------------------

inline Json to_json(const Operator& op) {
  return std::visit(
      detail::Overloaded{
          [](const ops::Identity& o) -> Json { return {{"op", "identity"}, {"dim", o.dim}}; },
          [](const ops::Dense& o) -> Json {
            return {{"op", "dense"}, {"dim", o.dim}, {"matrix", vector_to_json(*o.matrix)}};
          },
          [](const ops::Local& o) -> Json {
            return {{"op", "local"}, {"layout", layout_to_json(o.layout)}, {"register", o.reg},
                    {"matrix", vector_to_json(*o.matrix)}};
          },
          [](const ops::Diffusion& o) -> Json {
            return {{"op", "diffusion"}, {"layout", layout_to_json(o.layout)}, {"register", o.reg}};
          },
          [](const ops::UniformPrep& o) -> Json {
            return {{"op", "uniform-prep"}, {"layout", layout_to_json(o.layout)}, {"register", o.reg}};
          },
          [](const ops::ControlledXor& o) -> Json {
            return {{"op", "controlled-flip"}, {"layout", layout_to_json(o.layout)}, {"control", o.control},
                    {"value", o.value}, {"target", o.target}, {"mask", o.mask}};
          },
          [](const ops::GadgetXor& o) -> Json {
            return {{"op", "gadget-xor"}, {"layout", layout_to_json(o.layout)}, {"control", o.control},
                    {"value", o.value}, {"source", o.source}, {"target", o.target}, {"table", *o.table}};
          },
          [](const ops::Oracle& o) -> Json {
            return {{"op", "oracle"}, {"layout", layout_to_json(o.layout)}, {"index", o.index},
                    {"answer", o.answer}, {"z", to_string(*o.z)}};
          },
          [](const ops::Sequence& o) -> Json {
            Json f = Json::array();
            for (const auto& x : *o.factors) f.push_back(to_json(x));
            return {{"op", "sequence"}, {"factors", f}};
          },
          [](const ops::Embed& o) -> Json {
            return {{"op", "embed"}, {"inner", to_json(*o.inner)}, {"trailing", o.trailing}};
          },
      },
      op.node());
}

inline Operator operator_from_json(const Json& j) {
  const auto kind = required<std::string>(j, "op");
  if (kind == "identity") return ops::identity(required<std::size_t>(j, "dim"));
  if (kind == "dense") return ops::dense(required<std::size_t>(j, "dim"), vector_from_json(j.at("matrix")));
  if (kind == "hadamard") return ops::hadamard(layout_from_json(j.at("layout")), required<std::size_t>(j, "register"));
  if (kind == "pauli-x") return ops::pauli_x(layout_from_json(j.at("layout")), required<std::size_t>(j, "register"));
  const auto need_layout = [&] { return layout_from_json(j.at("layout")); };
  if (kind == "local") {
    return ops::local(need_layout(), required<std::size_t>(j, "register"), vector_from_json(j.at("matrix")));
  }
  if (kind == "diffusion") return ops::Diffusion{need_layout(), required<std::size_t>(j, "register")};
  if (kind == "uniform-prep") return ops::UniformPrep{need_layout(), required<std::size_t>(j, "register")};
  if (kind == "controlled-flip") {
    return ops::ControlledXor{need_layout(), required<std::size_t>(j, "control"), required<std::size_t>(j, "value"),
                              required<std::size_t>(j, "target"), required<std::size_t>(j, "mask")};
  }
  if (kind == "gadget-xor") {
    return ops::GadgetXor{need_layout(), required<std::size_t>(j, "control"), required<std::size_t>(j, "value"),
                          required<std::size_t>(j, "source"), required<std::size_t>(j, "target"),
                          std::make_shared<const std::vector<std::uint8_t>>(
                              required<std::vector<std::uint8_t>>(j, "table"))};
  }
  if (kind == "oracle") {
    return ops::oracle(need_layout(), required<std::size_t>(j, "index"), required<std::size_t>(j, "answer"),
                       parse_bits(required<std::string>(j, "z")));
  }
  if (kind == "sequence") {
    std::vector<Operator> f;
    for (const auto& x : j.at("factors")) f.push_back(operator_from_json(x));
    return ops::sequence(std::move(f));
  }
  if (kind == "embed") {
    return ops::Embed{std::make_shared<const Operator>(operator_from_json(j.at("inner"))),
                      required<std::size_t>(j, "trailing")};
  }
  throw InputError("unknown operator '" + kind + "'");
}

// -- measurements ------------------------------------------------------------

inline Json to_json(const Measurement& m) {
  return std::visit(detail::Overloaded{
                        [](const meas::Basis& b) -> Json {
                          return {{"measurement", "basis"}, {"outcomes", b.outcomes}, {"labels", *b.label}};
                        },
                        [](const meas::Projectors& p) -> Json {
                          Json ps = Json::array();
                          for (const auto& x : *p.projectors) ps.push_back(vector_to_json(x));
                          return {{"measurement", "projectors"}, {"dim", p.dim}, {"projectors", ps}};
                        },
                    },
                    m.node());
}

inline Measurement measurement_from_json(const Json& j) {
  const auto kind = required<std::string>(j, "measurement");
  if (kind == "basis") {
    return Measurement::basis(required<std::size_t>(j, "outcomes"), required<std::vector<std::uint32_t>>(j, "labels"));
  }
  if (kind == "register") {
    return Measurement::of_register(layout_from_json(j.at("layout")), required<std::size_t>(j, "register"));
  }
  if (kind == "projectors") {
    std::vector<std::vector<Complex>> ps;
    for (const auto& x : j.at("projectors")) ps.push_back(vector_from_json(x));
    return Measurement::projectors(required<std::size_t>(j, "dim"), std::move(ps));
  }
  throw InputError("unknown measurement '" + kind + "'");
}

// -- query algorithms ----------------------------------------------------------

inline Json to_json(const QueryAlgorithm& a) {
  Json rounds = Json::array();
  for (const auto& r : a.rounds()) {
    Json us = Json::array();
    for (const auto& u : r.unitaries) us.push_back(to_json(u));
    rounds.push_back({{"unitaries", us}, {"measurement", to_json(r.measurement)}, {"accepting", r.accepting}});
  }
  Json out = {{"kind", "query-algorithm"}, {"name", a.name()},          {"n", a.n()},
              {"workspace", a.workspace()}, {"initial", vector_to_json(a.initial())},
              {"rounds", rounds},           {"epsilon", a.epsilon()},   {"calls", a.calls()}};
  if (a.query_constant()) out["query_constant"] = *a.query_constant();
  return out;
}

inline QueryAlgorithm query_algorithm_from_json(const Json& j) {
  const auto n = required<std::size_t>(j, "n");
  const auto w = j.value("workspace", std::size_t{1});
  StateVector initial = j.contains("initial") ? vector_from_json(j.at("initial")) : basis_state(2 * n * w, 0);
  std::vector<QueryRound> rounds;
  for (const auto& r : j.at("rounds")) {
    QueryRound q;
    for (const auto& u : r.at("unitaries")) q.unitaries.push_back(operator_from_json(u));
    q.measurement = measurement_from_json(r.at("measurement"));
    q.accepting = required<std::vector<std::uint8_t>>(r, "accepting");
    rounds.push_back(std::move(q));
  }
  std::optional<double> c;
  if (j.contains("query_constant")) c = j.at("query_constant").get<double>();
  QueryAlgorithm a(j.value("name", std::string("query-algorithm")), n, w, std::move(initial), std::move(rounds),
                   required<double>(j, "epsilon"), c);
  a.validate();
  return a;
}

// -- transcripts and reports ---------------------------------------------------

inline Json to_json(const ProtocolTranscript& t) {
  Json msgs = Json::array();
  for (const auto& m : t.messages) msgs.push_back({{"from", party_name(m.sender)}, {"bits", m.bits}, {"what", m.what}});
  return {{"messages", msgs}, {"total_bits", t.total_bits()}, {"crossings", t.crossings}, {"output", t.output ? 1 : 0}};
}

inline Json to_json(const CompilationReport& r) {
  Json rows = Json::array();
  for (const auto& p : r.segment_layout) {
    rows.push_back({{"phase", p.phase}, {"positions", p.positions}, {"steps", p.steps}, {"states", p.states}});
  }
  const auto& M = *r.machine;
  return {{"quantum_basis_states", r.quantum_basis_states},
          {"qubits", qubits_for(r.quantum_basis_states)},
          {"declared_states", r.declared_states},
          {"declared_formula", r.declared_formula},
          {"t", r.t},
          {"n", r.n},
          {"p", M.p()},
          {"m", M.m()},
          {"rounds", M.algorithm().rounds().size()},
          {"steps_well_formed_max", M.steps_all_rounds()},
          {"budget_8t(n+2)+4(n+2)", r.budget()},
          {"circular", true},
          {"segment_layout", rows}};
}

}  // namespace io

// ---------------------------------------------------------------------------
// Explicit table machines

namespace detail {

inline Symbol read_symbol(const Json& j) { return symbol_from_name(j.get<std::string>()); }

inline Move read_move(const Json& j) {
  const int v = j.get<int>();
  if (v < -1 || v > 1) throw InputError("move must be -1, 0 or 1");
  return static_cast<Move>(v);
}

inline Probability read_probability(const Json& j) {
  if (j.is_number_integer()) return Probability(j.get<long long>());
  if (!j.is_string()) throw InputError("probabilities are rationals written as strings, e.g. \"1/3\"");
  try {
    return Probability(j.get<std::string>());
  } catch (const std::exception&) {
    throw InputError("bad probability '" + j.get<std::string>() + "'");
  }
}

/// Named states shared by the table machines.
struct StateNames {
  std::vector<std::string> names;
  std::map<std::string, std::uint32_t> index;
  std::uint32_t initial = 0;
  std::vector<Halt> halt;

  explicit StateNames(const Json& j) {
    for (const auto& s : j.at("states")) {
      const auto name = s.get<std::string>();
      if (index.contains(name)) throw InputError("duplicate state '" + name + "'");
      index[name] = static_cast<std::uint32_t>(names.size());
      names.push_back(name);
    }
    if (names.empty()) throw InputError("machine has no states");
    halt.assign(names.size(), Halt::Running);
    for (const auto& s : j.value("accept", Json::array())) halt[lookup(s.get<std::string>())] = Halt::Accept;
    for (const auto& s : j.value("reject", Json::array())) {
      auto& h = halt[lookup(s.get<std::string>())];
      if (h == Halt::Accept) throw InputError("state '" + s.get<std::string>() + "' both accepts and rejects");
      h = Halt::Reject;
    }
    initial = lookup(io::required<std::string>(j, "initial"));
  }

  std::uint32_t lookup(const std::string& name) const {
    auto it = index.find(name);
    if (it == index.end()) throw InputError("unknown state '" + name + "'");
    return it->second;
  }
};

struct TableState {
  std::uint32_t id = 0;
  const StateNames* names = nullptr;

  bool operator==(const TableState& o) const { return id == o.id; }
  std::size_t hash() const { return id; }
  std::string describe() const { return names ? names->names[id] : std::to_string(id); }
};

inline std::uint64_t table_key(std::uint32_t state, Symbol c) {
  return (static_cast<std::uint64_t>(state) << 8) | static_cast<std::uint64_t>(c);
}

template <class Derived>
class TableBase {
 public:
  using State = TableState;

  TableBase(const Json& j) : names_(std::make_shared<StateNames>(j)) {
    circular_ = j.value("circular", false);
    formula_ = j.value("declared_states", std::to_string(names_->names.size()) + " listed states");
  }

  State initial_state() const { return State{names_->initial, names_.get()}; }
  Halt halt_status(const State& s) const { return names_->halt[s.id]; }
  bool circular() const { return circular_; }
  double declared_log2_states() const { return std::log2(static_cast<double>(names_->names.size())); }
  std::string declared_state_formula() const { return formula_; }

 protected:
  State make(std::uint32_t id) const { return State{id, names_.get()}; }
  std::uint32_t lookup(const Json& j) const { return names_->lookup(j.get<std::string>()); }

  [[noreturn]] void missing(const State& s, Symbol c) const {
    throw SpecError("no transition from state '" + s.describe() + "' on '" + symbol_name(c) + "'");
  }

  std::shared_ptr<const StateNames> names_;
  bool circular_ = false;
  std::string formula_;
};

}  // namespace detail

class TableDfa : public detail::TableBase<TableDfa> {
 public:
  static constexpr MachineKind kind = MachineKind::Dfa;

  explicit TableDfa(const Json& j) : TableBase(j) {
    for (const auto& t : j.at("transitions")) {
      const auto key = detail::table_key(lookup(t.at("from")), detail::read_symbol(t.at("read")));
      if (delta_.contains(key)) throw InputError("duplicate 2DFA transition");
      delta_[key] = {lookup(t.at("to")), detail::read_move(t.at("move"))};
    }
  }

  Transition<State> step(const State& s, Symbol c) const {
    auto it = delta_.find(detail::table_key(s.id, c));
    if (it == delta_.end()) missing(s, c);
    return {make(it->second.first), it->second.second};
  }

 private:
  std::map<std::uint64_t, std::pair<std::uint32_t, Move>> delta_;
};

class TablePfa : public detail::TableBase<TablePfa> {
 public:
  static constexpr MachineKind kind = MachineKind::Pfa;

  explicit TablePfa(const Json& j) : TableBase(j), one_shot_(j.value("one_shot", false)) {
    for (const auto& t : j.at("transitions")) {
      const auto key = detail::table_key(lookup(t.at("from")), detail::read_symbol(t.at("read")));
      const Probability p = t.contains("prob") ? detail::read_probability(t.at("prob")) : Probability(1);
      delta_[key].push_back({p, lookup(t.at("to")), detail::read_move(t.at("move"))});
    }
    for (const auto& [key, rows] : delta_) {
      Probability total = 0;
      for (const auto& r : rows) {
        if (r.p < 0 || r.p > 1) throw SpecError("2PFA transition probability outside [0,1]");
        total += r.p;
      }
      if (total != 1) throw SpecError("2PFA outgoing probabilities do not sum to 1");
    }
  }

  bool one_shot() const { return one_shot_; }

  PfaStep<State> step(const State& s, Symbol c) const {
    auto it = delta_.find(detail::table_key(s.id, c));
    if (it == delta_.end()) missing(s, c);
    const auto& rows = it->second;
    if (rows.size() == 1 && rows[0].p == 1) return {{make(rows[0].to), rows[0].move}, {}};
    PfaStep<State> out;
    for (const auto& r : rows) out.branches.push_back({r.p, make(r.to), r.move});
    return out;
  }

 private:
  struct Row {
    Probability p;
    std::uint32_t to;
    Move move;
  };
  std::map<std::uint64_t, std::vector<Row>> delta_;
  bool one_shot_;
};

class TableQcfa : public detail::TableBase<TableQcfa> {
 public:
  static constexpr MachineKind kind = MachineKind::Qcfa;

  explicit TableQcfa(const Json& j) : TableBase(j) {
    dim_ = io::required<std::size_t>(j, "quantum_dim");
    initial_ = j.contains("initial_amplitudes") ? io::vector_from_json(j.at("initial_amplitudes")) : basis_state(dim_, 0);
    if (initial_.size() != dim_) throw SpecError("initial amplitudes have the wrong dimension");
    auto ops = std::make_shared<std::map<std::string, Operator>>();
    auto ms = std::make_shared<std::map<std::string, Measurement>>();
    const Json op_defs = j.value("operators", Json::object()), m_defs = j.value("measurements", Json::object());
    for (const auto& [name, op] : op_defs.items()) (*ops)[name] = io::operator_from_json(op);
    for (const auto& [name, m] : m_defs.items()) (*ms)[name] = io::measurement_from_json(m);
    for (const auto& [name, op] : *ops) {
      if (dimension(op) != dim_) throw SpecError("operator '" + name + "' has the wrong dimension");
      validate(op);
    }
    for (const auto& [name, m] : *ms) {
      if (m.dimension() != dim_) throw SpecError("measurement '" + name + "' has the wrong dimension");
      m.validate();
    }
    identity_ = std::make_shared<const Operator>(ops::identity(dim_));
    for (const auto& t : j.at("transitions")) {
      const auto key = detail::table_key(lookup(t.at("from")), detail::read_symbol(t.at("read")));
      if (delta_.contains(key)) throw InputError("duplicate 2QCFA transition");
      Rule rule;
      if (t.contains("measure")) {
        const auto name = t.at("measure").get<std::string>();
        auto it = ms->find(name);
        if (it == ms->end()) throw InputError("unknown measurement '" + name + "'");
        rule.measurement = &it->second;
        for (const auto& o : t.at("outcomes")) rule.outcomes.push_back({lookup(o.at("to")), detail::read_move(o.at("move"))});
        if (rule.outcomes.size() != it->second.outcomes()) throw SpecError("measurement '" + name + "': outcome count");
      } else {
        rule.op = identity_.get();
        if (t.contains("unitary")) {
          const auto name = t.at("unitary").get<std::string>();
          auto it = ops->find(name);
          if (it == ops->end()) throw InputError("unknown operator '" + name + "'");
          rule.op = &it->second;
        }
        rule.outcomes.push_back({lookup(t.at("to")), detail::read_move(t.at("move"))});
      }
      delta_[key] = std::move(rule);
    }
    ops_ = std::move(ops);
    measurements_ = std::move(ms);
  }

  std::size_t quantum_dim() const { return dim_; }
  StateVector initial_amplitudes() const { return initial_; }

  double declared_log2_states() const { return TableBase::declared_log2_states(); }

  QuantumAction<State> action(const State& s, Symbol c) const {
    auto it = delta_.find(detail::table_key(s.id, c));
    if (it == delta_.end()) missing(s, c);
    const auto& r = it->second;
    if (r.measurement) {
      MeasureStep<State> out{r.measurement, {}};
      for (const auto& [to, mv] : r.outcomes) out.on_outcome.push_back({make(to), mv});
      return out;
    }
    return UnitaryStep<State>{r.op, {make(r.outcomes[0].first), r.outcomes[0].second}};
  }

 private:
  struct Rule {
    const Operator* op = nullptr;
    const Measurement* measurement = nullptr;
    std::vector<std::pair<std::uint32_t, Move>> outcomes;
  };
  std::size_t dim_ = 1;
  StateVector initial_;
  std::shared_ptr<const Operator> identity_;
  std::shared_ptr<const std::map<std::string, Operator>> ops_;
  std::shared_ptr<const std::map<std::string, Measurement>> measurements_;
  std::map<std::uint64_t, Rule> delta_;
};

static_assert(TwoWayDfa<TableDfa>);
static_assert(TwoWayPfa<TablePfa>);
static_assert(TwoWayQcfa<TableQcfa>);

// ---------------------------------------------------------------------------
// Machine references

/// A compiled machine together with the n of its language L(n).
struct CompiledRef {
  std::shared_ptr<const CompiledQcfa> machine;

  // Forwarding keeps the compiled machine shareable while satisfying the concept.
  using State = CompiledQcfa::State;
  static constexpr MachineKind kind = MachineKind::Qcfa;
  State initial_state() const { return machine->initial_state(); }
  Halt halt_status(const State& s) const { return machine->halt_status(s); }
  bool circular() const { return true; }
  double declared_log2_states() const { return machine->declared_log2_states(); }
  std::string declared_state_formula() const { return machine->declared_state_formula(); }
  std::size_t quantum_dim() const { return machine->quantum_dim(); }
  StateVector initial_amplitudes() const { return machine->initial_amplitudes(); }
  QuantumAction<State> action(const State& s, Symbol c) const { return machine->action(s, c); }
};

static_assert(TwoWayQcfa<CompiledRef>);

using AnyMachine = std::variant<EqDfa, EqPfa, CompiledRef, TableDfa, TablePfa, TableQcfa>;

inline std::shared_ptr<const QueryAlgorithm> shared_query(QueryAlgorithm a) {
  return std::make_shared<const QueryAlgorithm>(std::move(a));
}

inline CompiledRef compiled_family(const std::string& head, std::size_t n) {
  if (head == "grover-ints") {
    return {compile_query_to_qcfa(shared_query(grover_or(n)), fn::and1()).machine};
  }
  if (head == "exact-parity-lifted" || head == "parity-lifted") {
    return {compile_query_to_qcfa(shared_query(exact_parity(n)), fn::and1()).machine};
  }
  throw InputError("unknown machine family '" + head + "'");
}

inline bool is_family_id(std::string_view id) {
  const auto head = id.substr(0, id.find(':'));
  return head == "eq-dfa" || head == "eq-pfa" || head == "grover-ints" || head == "exact-parity-lifted" ||
         head == "parity-lifted";
}

inline AnyMachine family_machine(std::string_view id) {
  auto [head, param] = detail::split_id(id);
  if (!param || *param == 0) throw InputError("machine family '" + std::string(id) + "' needs ':<n>' with n >= 1");
  const std::string h(head);
  if (h == "eq-dfa") return EqDfa(*param);
  if (h == "eq-pfa") return EqPfa(*param);
  return compiled_family(h, *param);
}

inline AnyMachine machine_from_json(const Json& j) {
  if (j.contains("family")) {
    return family_machine(j.at("family").get<std::string>() + ":" + std::to_string(io::required<std::size_t>(j, "n")));
  }
  const auto kind = io::required<std::string>(j, "kind");
  if (kind == "dfa") return TableDfa(j);
  if (kind == "pfa") return TablePfa(j);
  if (kind == "qcfa") return TableQcfa(j);
  throw InputError("unknown machine kind '" + kind + "'");
}

inline Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

/// `eq-dfa:<n>`, `eq-pfa:<n>`, `grover-ints:<n>`, `exact-parity-lifted:<n>`, or a JSON file.
inline AnyMachine load_machine(const std::string& spec) {
  if (is_family_id(spec)) return family_machine(spec);
  return machine_from_json(load_json(spec));
}

/// `grover-or:<p>`, `exact-parity:<p>` or a JSON file.
inline QueryAlgorithm load_query_algorithm(const std::string& spec, std::optional<std::size_t> p = {}) {
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  if (head == "grover-or" || head == "exact-parity") {
    auto arity = colon == std::string::npos ? p : detail::split_id(spec).second;
    if (!arity || *arity == 0) throw InputError("query algorithm '" + spec + "' needs a positive arity");
    return head == "grover-or" ? grover_or(*arity) : exact_parity(*arity);
  }
  return io::query_algorithm_from_json(load_json(spec));
}

}  // namespace twoway
