#pragma once

// Sweeps of T, S and TS over n for the registered machine families, CSV
// emission, and least-squares scaling fits.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "twoway/commlab.hpp"
#include "twoway/serialize.hpp"

namespace twoway {

/// A run failed inside a sweep; names the (n, input) that caused it.
class SweepError : public std::runtime_error {
 public:
  SweepError(const std::string& family, std::size_t n, const std::string& input, const std::string& cause)
      : std::runtime_error(family + " n=" + std::to_string(n) + " input '" + input + "': " + cause),
        n_(n),
        input_(input) {}
  std::size_t n() const { return n_; }
  const std::string& input() const { return input_; }

 private:
  std::size_t n_;
  std::string input_;
};

struct WorstCase {
  double error = 0.0;
  std::string input;  // empty when no input of that kind was evaluated
};

struct SweepRow {
  std::string family;
  std::size_t n = 0;
  std::uint64_t T = 0;
  double S_declared = 0.0;
  double S_visited = 0.0;
  double TS = 0.0;
  double member_error = 0.0;
  double nonmember_error = 0.0;
  double wall_seconds = 0.0;

  // Not part of the CSV.
  WorstCase worst_member, worst_nonmember;
  std::size_t inputs = 0;
  bool exhaustive = false;
  bool census_saturated = false;
  std::size_t visited_states = 0;
  std::size_t max_protocol_bits = 0;
  std::size_t max_crossings = 0;
  std::size_t certificate_violations = 0;
};

struct SweepOptions {
  bool timing = false;  // wall_seconds stays 0 otherwise, keeping CSV bytes reproducible
  unsigned threads = 0;  // 0: hardware concurrency
  RunOptions run{};
};

inline const std::vector<std::string>& sweep_families() {
  static const std::vector<std::string> f{"eq-dfa", "eq-pfa", "grover-ints", "exact-parity-lifted"};
  return f;
}

inline constexpr std::size_t kExhaustiveMaxInputBits = 16;

namespace detail {

/// Membership of x #^n y for each family's language.
inline bool family_member(const std::string& family, BitSpan x, BitSpan y) {
  if (family == "eq-dfa" || family == "eq-pfa") return std::equal(x.begin(), x.end(), y.begin(), y.end());
  bool any = false, parity = false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const bool z = x[i] && y[i];
    any = any || z;
    parity = parity != z;
  }
  if (family == "grover-ints") return any;
  if (family == "exact-parity-lifted") return parity;
  throw InputError("unknown sweep family '" + family + "'");
}

/// A random pair inside (member = true) or outside the family's language.
inline std::pair<Bits, Bits> family_pair(const std::string& family, std::size_t n, bool member, std::mt19937_64& rng) {
  Bits x = random_bits(n, rng), y = random_bits(n, rng);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  if (family == "eq-dfa" || family == "eq-pfa") {
    if (member) {
      y = x;
    } else if (x == y) {
      y[pick(rng)] ^= 1;
    }
  } else if (family == "grover-ints") {
    if (member) {
      const auto i = pick(rng);
      x[i] = y[i] = 1;
    } else {
      for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<std::uint8_t>(y[i] & (x[i] ^ 1));
    }
  } else {
    if (family_member(family, x, y) != member) {
      // Toggle one conjunction: choose i, force x_i = 1, flip y_i.
      const auto i = pick(rng);
      const bool before = x[i] && y[i];
      x[i] = 1;
      y[i] = before ? 0 : 1;
    }
  }
  return {std::move(x), std::move(y)};
}

inline std::vector<std::pair<Bits, Bits>> sweep_inputs(const std::string& family, std::size_t n, std::size_t samples,
                                                       std::uint64_t seed, bool& exhaustive) {
  std::vector<std::pair<Bits, Bits>> out;
  exhaustive = 2 * n <= kExhaustiveMaxInputBits;
  if (exhaustive) {
    for (std::size_t a = 0; a < (std::size_t{1} << n); ++a)
      for (std::size_t b = 0; b < (std::size_t{1} << n); ++b) out.emplace_back(bits_of(a, n), bits_of(b, n));
    return out;
  }
  if (samples == 0) throw InputError("sweep: n=" + std::to_string(n) + " needs samples_per_n > 0");
  std::seed_seq seq{seed, static_cast<std::uint64_t>(n)};
  std::mt19937_64 rng(seq);
  for (std::size_t k = 0; k < samples; ++k) out.push_back(family_pair(family, n, k % 2 == 0, rng));
  return out;
}

template <Machine M>
SweepRow sweep_machine(const M& m, const std::string& family, std::size_t n,
                       const std::vector<std::pair<Bits, Bits>>& inputs, const SweepOptions& opts) {
  SweepRow row;
  row.family = family;
  row.n = n;
  row.inputs = inputs.size();
  row.S_declared = declared_space(m);
  StateCensus<typename M::State> census(opts.run.census_limit);
  for (const auto& [x, y] : inputs) {
    ExtractedProtocol pr;
    try {
      pr = extract_protocol(m, x, y, opts.run, &census);
    } catch (const std::exception& e) {
      throw SweepError(family, n, lifted_word(x, y), e.what());
    }
    row.T = std::max(row.T, pr.max_steps);
    row.max_protocol_bits = std::max(row.max_protocol_bits, pr.transcript.total_bits());
    row.max_crossings = std::max(row.max_crossings, pr.transcript.crossings);
    row.certificate_violations += pr.certificate_violations;
    const bool member = family_member(family, x, y);
    const double err = std::clamp(member ? 1.0 - pr.accept_probability : pr.accept_probability, 0.0, 1.0);
    auto& worst = member ? row.worst_member : row.worst_nonmember;
    if (worst.input.empty() || err > worst.error) worst = {err, lifted_word(x, y)};
  }
  row.member_error = row.worst_member.error;
  row.nonmember_error = row.worst_nonmember.error;
  row.visited_states = census.size();
  row.census_saturated = census.saturated();
  row.S_visited = static_cast<double>(machine_qubits(m)) +
                  (row.visited_states > 0 ? std::log2(static_cast<double>(row.visited_states)) : 0.0);
  if (row.S_visited > row.S_declared + 1e-9) {
    throw SweepError(family, n, "*", "visited more classical states than declared");
  }
  row.TS = static_cast<double>(row.T) * row.S_declared;
  return row;
}

}  // namespace detail

inline SweepRow sweep_row(const std::string& family, std::size_t n, std::size_t samples_per_n, std::uint64_t seed,
                          const SweepOptions& opts = {}) {
  if (std::find(sweep_families().begin(), sweep_families().end(), family) == sweep_families().end()) {
    throw InputError("unknown sweep family '" + family + "'");
  }
  if (n == 0) throw InputError("sweep: n must be positive");
  const auto t0 = std::chrono::steady_clock::now();
  bool exhaustive = false;
  const auto inputs = detail::sweep_inputs(family, n, samples_per_n, seed, exhaustive);
  AnyMachine machine = family_machine(family + ":" + std::to_string(n));
  SweepRow row = std::visit(
      [&](const auto& m) -> SweepRow {
        using M = std::decay_t<decltype(m)>;
        if constexpr (Machine<M>) {
          return detail::sweep_machine(m, family, n, inputs, opts);
        } else {
          throw InputError("not a machine");
        }
      },
      machine);
  row.exhaustive = exhaustive;
  if (opts.timing) row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

/// One row per n, sorted by n. Rows are computed concurrently.
inline std::vector<SweepRow> sweep_ts(const std::string& family, std::vector<std::size_t> n_values,
                                      std::size_t samples_per_n, std::uint64_t seed, const SweepOptions& opts = {}) {
  if (n_values.empty()) throw InputError("sweep: empty n list");
  std::sort(n_values.begin(), n_values.end());
  n_values.erase(std::unique(n_values.begin(), n_values.end()), n_values.end());
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t width = opts.threads ? opts.threads : hw;
  std::vector<SweepRow> rows(n_values.size());
  for (std::size_t start = 0; start < n_values.size(); start += width) {
    std::vector<std::future<SweepRow>> batch;
    for (std::size_t i = start; i < std::min(n_values.size(), start + width); ++i) {
      batch.push_back(std::async(std::launch::async, sweep_row, family, n_values[i], samples_per_n, seed, opts));
    }
    for (std::size_t i = 0; i < batch.size(); ++i) rows[start + i] = batch[i].get();
  }
  return rows;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string format_sig9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline constexpr const char* kSweepCsvHeader =
    "family,n,T,S_declared,S_visited,TS,member_error,nonmember_error,wall_seconds";

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << kSweepCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.family << ',' << r.n << ',' << r.T << ',' << format_sig9(r.S_declared) << ',' << format_sig9(r.S_visited)
        << ',' << format_sig9(r.TS) << ',' << format_sig9(r.member_error) << ',' << format_sig9(r.nonmember_error)
        << ',' << format_sig9(r.wall_seconds) << '\n';
  }
  return out.str();
}

/// Sidecar: the input achieving each worst-case error.
inline std::string sweep_worst_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "family,n,kind,error,input\n";
  for (const auto& r : rows) {
    for (const auto& [kind, w] : {std::pair{"member", &r.worst_member}, std::pair{"non-member", &r.worst_nonmember}}) {
      if (w->input.empty()) continue;
      out << r.family << ',' << r.n << ',' << kind << ',' << format_sig9(w->error) << ',' << w->input << '\n';
    }
  }
  return out.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
  if (!out) throw InputError("write failed: " + path);
}

inline std::vector<SweepRow> read_sweep_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kSweepCsvHeader) throw InputError("sweep CSV: unexpected header");
  std::vector<SweepRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 9) throw InputError("sweep CSV line " + std::to_string(lineno) + ": expected 9 fields");
    try {
      SweepRow r;
      r.family = f[0];
      r.n = std::stoull(f[1]);
      r.T = std::stoull(f[2]);
      r.S_declared = std::stod(f[3]);
      r.S_visited = std::stod(f[4]);
      r.TS = std::stod(f[5]);
      r.member_error = std::stod(f[6]);
      r.nonmember_error = std::stod(f[7]);
      r.wall_seconds = std::stod(f[8]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw InputError("sweep CSV line " + std::to_string(lineno) + ": bad number");
    }
  }
  return rows;
}

inline std::vector<SweepRow> load_sweep_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return read_sweep_csv(in);
}

// ---------------------------------------------------------------------------
// Scaling fits

enum class LogCorrection { None, DivideByLogN };

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root-mean-square of the fit residuals
  std::size_t points = 0;
};

/// Least-squares slope of log TS (or log(TS / log n)) against log n.
inline ScalingFit fit_scaling(const std::vector<SweepRow>& rows, LogCorrection corr = LogCorrection::None) {
  if (rows.size() < 4) throw InputError("fit_scaling: need at least 4 rows");
  std::size_t lo = rows.front().n, hi = rows.front().n;
  for (const auto& r : rows) {
    lo = std::min(lo, r.n);
    hi = std::max(hi, r.n);
  }
  if (lo == 0 || hi < 8 * lo) throw InputError("fit_scaling: n must span at least a factor of 8");
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    if (!(r.TS > 0.0)) throw InputError("fit_scaling: TS must be positive");
    double y = std::log(r.TS);
    if (corr == LogCorrection::DivideByLogN) {
      if (r.n < 2) throw InputError("fit_scaling: log correction needs n >= 2");
      y -= std::log(std::log2(static_cast<double>(r.n)));
    }
    xs.push_back(std::log(static_cast<double>(r.n)));
    ys.push_back(y);
  }
  const double k = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  ScalingFit fit;
  fit.points = xs.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / k);
  return fit;
}

}  // namespace twoway
