// twoway: command-line front end for the simulators, compiler, protocol
// extraction, oracles and sweeps.

#include <CLI11.hpp>

#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "twoway/harness.hpp"

using namespace twoway;

namespace {

struct Args {
  std::string machine, input, x, y;
  std::string query, gadget = "and1";
  std::size_t n = 0;
  std::size_t samples = 0;
  std::uint64_t seed = 1;
  std::uint64_t max_steps = RunOptions{}.max_steps;
  std::string matrix, fn_id;
  std::size_t arity = 0;
  std::string family, out;
  std::vector<std::size_t> n_values;
  unsigned threads = 0;
  bool timing = false;
  std::string csv;
  bool logcorrect = false;
};

Json certificate_json(const ExtractedProtocol& p, std::size_t n) {
  const auto c = check_certificate(p.transcript, p.S, p.steps, n);
  return {{"bits", p.transcript.total_bits()},
          {"bound_S*floor(T/n)+1", p.S * static_cast<double>(p.steps / n) + 1.0},
          {"crossings", p.transcript.crossings},
          {"T", p.steps},
          {"bits_ok", c.bits_ok},
          {"crossings_ok", c.crossings_ok},
          {"violations_over_all_branches", p.certificate_violations}};
}

template <Machine M>
Json simulate(const M& m, const Args& a) {
  RunOptions opts;
  opts.max_steps = a.max_steps;
  Json out = {{"S", declared_space(m)}, {"declared_states", m.declared_state_formula()}, {"circular", m.circular()}};
  if constexpr (TwoWayDfa<M>) {
    auto r = run_dfa(m, a.input, opts);
    out["kind"] = "2dfa";
    out["outcome"] = outcome_name(r.outcome);
    out["steps"] = r.trace.steps;
    out["visited_states"] = r.trace.visited_states;
  } else if constexpr (TwoWayPfa<M>) {
    out["kind"] = "2pfa";
    if (m.one_shot()) {
      auto e = pfa_enumerate(m, a.input, opts);
      out["accept_probability"] = e.accept.str();
      out["accept_probability_float"] = detail::to_double(e.accept);
      out["max_steps"] = e.max_steps;
      out["branches"] = e.branches;
    } else {
      const auto p = pfa_absorbing_prob(m, a.input);
      out["accept_probability"] = p.str();
      out["accept_probability_float"] = detail::to_double(p);
    }
    if (a.samples > 0) {
      std::size_t hits = 0;
      for (std::size_t k = 0; k < a.samples; ++k) hits += run_pfa_sample(m, a.input, a.seed + k, opts).outcome == Outcome::Accept;
      out["sampled_frequency"] = static_cast<double>(hits) / static_cast<double>(a.samples);
    }
  } else {
    auto e = run_qcfa_exact(m, a.input, opts);
    out["kind"] = "2qcfa";
    out["qubits"] = machine_qubits(m);
    out["accept_probability"] = e.accept;
    out["reject_probability"] = e.reject;
    out["pruned_mass"] = e.pruned;
    out["max_steps"] = e.max_steps;
    out["branches"] = e.branches;
    out["visited_states"] = e.visited_states;
    if (a.samples > 0) {
      std::size_t hits = 0;
      for (std::size_t k = 0; k < a.samples; ++k) {
        hits += run_qcfa_sample(m, a.input, a.seed + k, opts).outcome == Outcome::Accept;
      }
      out["sampled_frequency"] = static_cast<double>(hits) / static_cast<double>(a.samples);
    }
  }
  return out;
}

template <Machine M>
Json protocol(const M& m, const Args& a) {
  RunOptions opts;
  opts.max_steps = a.max_steps;
  const Bits x = parse_bits(a.x), y = parse_bits(a.y);
  if (x.size() != y.size() || x.empty()) throw InputError("x and y must be non-empty and of equal length");
  ExtractedProtocol p;
  if constexpr (TwoWayPfa<M>) {
    p = m.one_shot() ? extract_protocol(m, x, y, opts) : extract_protocol_sample(m, x, y, a.seed, opts);
  } else {
    p = extract_protocol(m, x, y, opts);
  }
  return {{"accept_probability", p.accept_probability},
          {"S", p.S},
          {"message_bits_per_crossing", crossing_message_bits(m)},
          {"branches", p.branches},
          {"transcript", io::to_json(p.transcript)},
          {"certificate", certificate_json(p, x.size())}};
}

int run(int argc, char** argv) {
  CLI::App app{"Two-way automata: simulation, compilation, protocols, sweeps"};
  app.require_subcommand(1);
  Args a;

  auto* sim = app.add_subcommand("simulate", "Run a machine on a word, exactly (and optionally by sampling)");
  sim->add_option("machine", a.machine, "eq-dfa:<n> | eq-pfa:<n> | grover-ints:<n> | exact-parity-lifted:<n> | file.json")
      ->required();
  sim->add_option("input", a.input, "tape contents without end-markers, e.g. 01##01")->required();
  sim->add_option("--samples", a.samples, "Monte-Carlo runs in addition to the exact value");
  sim->add_option("--seed", a.seed);
  sim->add_option("--max-steps", a.max_steps);

  auto* comp = app.add_subcommand("compile", "Compile a query algorithm and gadget into a 2QCFA");
  comp->add_option("query", a.query, "grover-or | exact-parity | file.json")->required();
  comp->add_option("--gadget", a.gadget, "and1 | ip:<m>");
  comp->add_option("--n", a.n, "block length n = p*m")->required();
  comp->add_option("--out", a.out, "also write the report here");

  auto* prot = app.add_subcommand("protocol", "Extract the two-party protocol of a run on x #^n y");
  prot->add_option("machine", a.machine)->required();
  prot->add_option("x", a.x)->required();
  prot->add_option("y", a.y)->required();
  prot->add_option("--seed", a.seed, "for 2PFAs without one-shot randomness");
  prot->add_option("--max-steps", a.max_steps);

  auto* orc = app.add_subcommand("oracle", "Exhaustive oracles");
  orc->require_subcommand(1);
  auto* dcc = orc->add_subcommand("dcc", "Deterministic communication complexity of a 0/1 matrix");
  dcc->add_option("matrix", a.matrix, "file with one row of 0/1 per line")->required();
  auto* dt = orc->add_subcommand("dtdepth", "Optimal decision-tree depth");
  dt->add_option("fn", a.fn_id, "or:<p> | xor:<p> | ne:<p> | const0:<p> | const1:<p>")->required();
  dt->add_option("--arity", a.arity);

  auto* sw = app.add_subcommand("sweep", "Measure T, S and TS over n; write CSV");
  sw->add_option("family", a.family, "eq-dfa | eq-pfa | grover-ints | exact-parity-lifted")->required();
  sw->add_option("--n", a.n_values)->required()->delimiter(',');
  sw->add_option("--samples", a.samples, "random inputs per n when exhaustive enumeration is too large")
      ->default_val(16);
  sw->add_option("--seed", a.seed);
  sw->add_option("--out", a.out)->required();
  sw->add_option("--threads", a.threads);
  sw->add_flag("--timing", a.timing, "fill wall_seconds (otherwise 0, for reproducible bytes)");

  auto* fit = app.add_subcommand("fit", "Least-squares log-log slope of TS against n");
  fit->add_option("csv", a.csv)->required();
  fit->add_flag("--logcorrect", a.logcorrect, "fit TS / log n instead of TS");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (*sim) {
    auto m = load_machine(a.machine);
    std::cout << std::visit([&](const auto& mm) { return simulate(mm, a); }, m).dump(2) << '\n';
  } else if (*comp) {
    const Gadget g = gadget_from_id(a.gadget);
    if (a.n == 0 || a.n % g.width() != 0) {
      throw InputError("--n must be a positive multiple of the gadget width " + std::to_string(g.width()));
    }
    const std::size_t p = a.n / g.width();
    auto alg = shared_query(load_query_algorithm(a.query, p));
    if (alg->n() != p) throw InputError("query algorithm has arity " + std::to_string(alg->n()) + ", expected " + std::to_string(p));
    const auto report = io::to_json(compile_query_to_qcfa(alg, g));
    if (!a.out.empty()) write_file(a.out, report.dump(2) + "\n");
    std::cout << report.dump(2) << '\n';
  } else if (*prot) {
    auto m = load_machine(a.machine);
    std::cout << std::visit([&](const auto& mm) { return protocol(mm, a); }, m).dump(2) << '\n';
  } else if (*orc) {
    if (*dcc) {
      std::cout << bruteforce_dcc(FunctionMatrix::load(a.matrix)) << '\n';
    } else {
      auto h = function_from_id(a.fn_id, a.arity ? std::optional<std::size_t>(a.arity) : std::nullopt);
      std::cout << dt_optimal_depth(h) << '\n';
    }
  } else if (*sw) {
    SweepOptions opts;
    opts.timing = a.timing;
    opts.threads = a.threads;
    const auto rows = sweep_ts(a.family, a.n_values, a.samples, a.seed, opts);
    write_file(a.out, sweep_csv(rows));
    write_file(a.out + ".worst.csv", sweep_worst_csv(rows));
    std::size_t violations = 0;
    for (const auto& r : rows) violations += r.certificate_violations;
    std::cout << "wrote " << rows.size() << " rows to " << a.out << "; certificate violations: " << violations << '\n';
  } else if (*fit) {
    const auto f = fit_scaling(load_sweep_csv(a.csv), a.logcorrect ? LogCorrection::DivideByLogN : LogCorrection::None);
    std::cout << "slope " << format_sig9(f.slope) << " residual " << format_sig9(f.residual) << " points " << f.points
              << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "twoway: " << e.what() << '\n';
    return 1;
  }
}
