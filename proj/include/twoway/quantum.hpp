#pragma once

// State vectors over mixed-radix register layouts, unitary operators
// (dense and structured) and projective measurements.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "twoway/bits.hpp"
#include "twoway/errors.hpp"

namespace twoway {

using Complex = std::complex<double>;
using StateVector = std::vector<Complex>;

inline constexpr double kUnitarityTol = 1e-9;
inline constexpr double kNormTol = 1e-9;
inline constexpr double kBranchPruneTol = 1e-12;

/// Mixed-radix register layout; register 0 is the most significant digit.
class Layout {
 public:
  static constexpr std::size_t kMaxRegisters = 8;

  Layout() = default;
  Layout(std::initializer_list<std::size_t> dims) {
    for (auto d : dims) append(d);
  }

  Layout& append(std::size_t dim) {
    if (count_ == kMaxRegisters) throw InputError("Layout: too many registers");
    if (dim == 0) throw InputError("Layout: register dimension must be positive");
    dims_[count_++] = dim;
    return *this;
  }

  Layout appended(std::size_t dim) const {
    Layout copy = *this;
    copy.append(dim);
    return copy;
  }

  std::size_t registers() const { return count_; }
  std::size_t dim(std::size_t r) const { return dims_.at(r); }

  std::size_t size() const {
    std::size_t s = 1;
    for (std::size_t r = 0; r < count_; ++r) s *= dims_[r];
    return s;
  }

  /// Product of the dimensions of the registers after r.
  std::size_t stride(std::size_t r) const {
    std::size_t s = 1;
    for (std::size_t q = r + 1; q < count_; ++q) s *= dims_[q];
    return s;
  }

  std::size_t digit(std::size_t index, std::size_t r) const { return (index / stride(r)) % dims_[r]; }

  bool operator==(const Layout& o) const {
    if (count_ != o.count_) return false;
    for (std::size_t r = 0; r < count_; ++r)
      if (dims_[r] != o.dims_[r]) return false;
    return true;
  }

 private:
  std::array<std::size_t, kMaxRegisters> dims_{};
  std::size_t count_ = 0;
};

inline bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

inline std::size_t qubits_for(std::size_t dim) {
  std::size_t q = 0;
  while ((std::size_t{1} << q) < dim) ++q;
  return q;
}

class Operator;

namespace ops {

struct Identity {
  std::size_t dim;
};

/// Full-space matrix, row-major.
struct Dense {
  std::size_t dim;
  std::shared_ptr<const std::vector<Complex>> matrix;
};

/// d x d matrix acting on one register of a layout.
struct Local {
  Layout layout;
  std::size_t reg;
  std::shared_ptr<const std::vector<Complex>> matrix;
};

/// Inversion about the mean on one register: 2|u><u| - I, u uniform.
struct Diffusion {
  Layout layout;
  std::size_t reg;
};

/// Householder reflection exchanging |0> and the uniform state on one register.
struct UniformPrep {
  Layout layout;
  std::size_t reg;
};

/// target ^= mask on the branch where register `control` holds `value`.
struct ControlledXor {
  Layout layout;
  std::size_t control;
  std::size_t value;
  std::size_t target;
  std::size_t mask;
};

/// target ^= table[source] on the branch where register `control` holds `value`.
struct GadgetXor {
  Layout layout;
  std::size_t control;
  std::size_t value;
  std::size_t source;
  std::size_t target;
  std::shared_ptr<const std::vector<std::uint8_t>> table;
};

/// Query oracle |i, b, ...> -> |i, b ^ z_i, ...>.
struct Oracle {
  Layout layout;
  std::size_t index;
  std::size_t answer;
  std::shared_ptr<const Bits> z;
};

/// Factors applied left to right (first element acts first).
struct Sequence {
  std::shared_ptr<const std::vector<Operator>> factors;
};

/// inner ⊗ I_trailing.
struct Embed {
  std::shared_ptr<const Operator> inner;
  std::size_t trailing;
};

}  // namespace ops

class Operator {
 public:
  using Node = std::variant<ops::Identity, ops::Dense, ops::Local, ops::Diffusion, ops::UniformPrep,
                            ops::ControlledXor, ops::GadgetXor, ops::Oracle, ops::Sequence, ops::Embed>;

  Operator() : node_(ops::Identity{1}) {}
  template <class T>
    requires std::is_constructible_v<Node, T>
  Operator(T node) : node_(std::move(node)) {}  // NOLINT(google-explicit-constructor)

  const Node& node() const { return node_; }

 private:
  Node node_;
};

namespace ops {

inline Operator identity(std::size_t dim) { return Identity{dim}; }

inline Operator dense(std::size_t dim, std::vector<Complex> m) {
  if (m.size() != dim * dim) throw InputError("dense: matrix must be dim x dim");
  return Dense{dim, std::make_shared<const std::vector<Complex>>(std::move(m))};
}

inline Operator local(const Layout& layout, std::size_t reg, std::vector<Complex> m) {
  const std::size_t d = layout.dim(reg);
  if (m.size() != d * d) throw InputError("local: matrix must match register dimension");
  return Local{layout, reg, std::make_shared<const std::vector<Complex>>(std::move(m))};
}

inline Operator hadamard(const Layout& layout, std::size_t reg) {
  const double h = 1.0 / std::sqrt(2.0);
  return local(layout, reg, {h, h, h, -h});
}

inline Operator pauli_x(const Layout& layout, std::size_t reg) {
  return local(layout, reg, {0.0, 1.0, 1.0, 0.0});
}

inline Operator sequence(std::vector<Operator> factors) {
  return Sequence{std::make_shared<const std::vector<Operator>>(std::move(factors))};
}

inline Operator oracle(const Layout& layout, std::size_t index, std::size_t answer, Bits z) {
  return Oracle{layout, index, answer, std::make_shared<const Bits>(std::move(z))};
}

}  // namespace ops

// ---------------------------------------------------------------------------
// Operator queries

namespace detail {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

}  // namespace detail

inline std::size_t dimension(const Operator& op) {
  return std::visit(
      detail::Overloaded{
          [](const ops::Identity& o) { return o.dim; },
          [](const ops::Dense& o) { return o.dim; },
          [](const ops::Sequence& o) { return o.factors->empty() ? std::size_t{1} : dimension(o.factors->front()); },
          [](const ops::Embed& o) { return dimension(*o.inner) * o.trailing; },
          [](const auto& o) { return o.layout.size(); },
      },
      op.node());
}

/// True when the operator only permutes computational basis amplitudes,
/// so it preserves the norm exactly.
inline bool is_permutation(const Operator& op) {
  return std::visit(
      detail::Overloaded{
          [](const ops::Identity&) { return true; },
          [](const ops::ControlledXor&) { return true; },
          [](const ops::GadgetXor&) { return true; },
          [](const ops::Oracle&) { return true; },
          [](const ops::Sequence& o) {
            return std::all_of(o.factors->begin(), o.factors->end(), [](const Operator& f) { return is_permutation(f); });
          },
          [](const ops::Embed& o) { return is_permutation(*o.inner); },
          [](const auto&) { return false; },
      },
      op.node());
}

namespace detail {

/// Calls fn(base) for every index whose digit in `reg` is zero; the fiber is
/// base + k * stride for k in [0, dim).
template <class Fn>
void for_each_fiber(const Layout& layout, std::size_t reg, Fn&& fn) {
  const std::size_t stride = layout.stride(reg);
  const std::size_t block = stride * layout.dim(reg);
  const std::size_t total = layout.size();
  for (std::size_t outer = 0; outer < total; outer += block)
    for (std::size_t inner = 0; inner < stride; ++inner) fn(outer + inner);
}

/// Calls fn(index) for every basis index whose `control` digit equals `value`.
template <class Fn>
void for_each_controlled(const Layout& layout, std::size_t control, std::size_t value, Fn&& fn) {
  const std::size_t stride = layout.stride(control);
  const std::size_t block = stride * layout.dim(control);
  const std::size_t total = layout.size();
  for (std::size_t outer = 0; outer < total; outer += block) {
    const std::size_t base = outer + value * stride;
    for (std::size_t inner = 0; inner < stride; ++inner) fn(base + inner);
  }
}

inline void apply_xor(std::span<Complex> psi, const Layout& layout, std::size_t control, std::size_t value,
                      std::size_t target, auto&& mask_of) {
  const std::size_t tstride = layout.stride(target);
  for_each_controlled(layout, control, value, [&](std::size_t idx) {
    const std::size_t t = layout.digit(idx, target);
    const std::size_t mask = mask_of(idx);
    const std::size_t partner_t = t ^ mask;
    if (partner_t > t) {
      const std::size_t partner = idx + (partner_t - t) * tstride;
      std::swap(psi[idx], psi[partner]);
    }
  });
}

}  // namespace detail

inline void apply(const Operator& op, std::span<Complex> psi) {
  if (dimension(op) != psi.size()) {
    throw InputError("apply: operator dimension " + std::to_string(dimension(op)) + " vs state " +
                     std::to_string(psi.size()));
  }
  std::visit(
      detail::Overloaded{
          [](const ops::Identity&) {},
          [&](const ops::Dense& o) {
            StateVector out(o.dim);
            const auto& m = *o.matrix;
            for (std::size_t r = 0; r < o.dim; ++r) {
              Complex acc = 0.0;
              for (std::size_t c = 0; c < o.dim; ++c) acc += m[r * o.dim + c] * psi[c];
              out[r] = acc;
            }
            std::copy(out.begin(), out.end(), psi.begin());
          },
          [&](const ops::Local& o) {
            const std::size_t d = o.layout.dim(o.reg);
            const std::size_t stride = o.layout.stride(o.reg);
            const auto& m = *o.matrix;
            StateVector in(d), out(d);
            detail::for_each_fiber(o.layout, o.reg, [&](std::size_t base) {
              for (std::size_t k = 0; k < d; ++k) in[k] = psi[base + k * stride];
              for (std::size_t r = 0; r < d; ++r) {
                Complex acc = 0.0;
                for (std::size_t c = 0; c < d; ++c) acc += m[r * d + c] * in[c];
                out[r] = acc;
              }
              for (std::size_t k = 0; k < d; ++k) psi[base + k * stride] = out[k];
            });
          },
          [&](const ops::Diffusion& o) {
            const std::size_t d = o.layout.dim(o.reg);
            const std::size_t stride = o.layout.stride(o.reg);
            detail::for_each_fiber(o.layout, o.reg, [&](std::size_t base) {
              Complex sum = 0.0;
              for (std::size_t k = 0; k < d; ++k) sum += psi[base + k * stride];
              const Complex twice_mean = 2.0 * sum / static_cast<double>(d);
              for (std::size_t k = 0; k < d; ++k) psi[base + k * stride] = twice_mean - psi[base + k * stride];
            });
          },
          [&](const ops::UniformPrep& o) {
            const std::size_t d = o.layout.dim(o.reg);
            if (d == 1) return;
            const std::size_t stride = o.layout.stride(o.reg);
            const double u = 1.0 / std::sqrt(static_cast<double>(d));
            // v = e0 - u·1, |v|^2 = 2 - 2u.
            const double vv = 2.0 - 2.0 * u;
            detail::for_each_fiber(o.layout, o.reg, [&](std::size_t base) {
              Complex sum = 0.0;
              for (std::size_t k = 0; k < d; ++k) sum += psi[base + k * stride];
              const Complex vpsi = psi[base] - u * sum;
              const Complex coef = 2.0 * vpsi / vv;
              psi[base] -= coef * (1.0 - u);
              for (std::size_t k = 1; k < d; ++k) psi[base + k * stride] += coef * u;
            });
          },
          [&](const ops::ControlledXor& o) {
            detail::apply_xor(psi, o.layout, o.control, o.value, o.target, [&](std::size_t) { return o.mask; });
          },
          [&](const ops::GadgetXor& o) {
            const auto& table = *o.table;
            detail::apply_xor(psi, o.layout, o.control, o.value, o.target,
                              [&](std::size_t idx) { return static_cast<std::size_t>(table[o.layout.digit(idx, o.source)]); });
          },
          [&](const ops::Oracle& o) {
            const auto& z = *o.z;
            for (std::size_t i = 0; i < z.size(); ++i) {
              if (z[i]) detail::apply_xor(psi, o.layout, o.index, i, o.answer, [](std::size_t) { return std::size_t{1}; });
            }
          },
          [&](const ops::Sequence& o) {
            for (const auto& f : *o.factors) twoway::apply(f, psi);
          },
          [&](const ops::Embed& o) {
            const std::size_t inner = dimension(*o.inner);
            StateVector slice(inner);
            for (std::size_t c = 0; c < o.trailing; ++c) {
              for (std::size_t k = 0; k < inner; ++k) slice[k] = psi[k * o.trailing + c];
              twoway::apply(*o.inner, slice);
              for (std::size_t k = 0; k < inner; ++k) psi[k * o.trailing + c] = slice[k];
            }
          },
      },
      op.node());
}

/// Row-major dense matrix of the operator, built column by column.
inline std::vector<Complex> to_dense(const Operator& op) {
  const std::size_t d = dimension(op);
  std::vector<Complex> m(d * d);
  StateVector col(d);
  for (std::size_t c = 0; c < d; ++c) {
    std::fill(col.begin(), col.end(), Complex{});
    col[c] = 1.0;
    twoway::apply(op, col);
    for (std::size_t r = 0; r < d; ++r) m[r * d + c] = col[r];
  }
  return m;
}

/// max |(M†M - I)_{rc}| for a row-major d x d matrix.
inline double unitarity_defect(std::span<const Complex> m, std::size_t d) {
  double worst = 0.0;
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      Complex acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) acc += std::conj(m[k * d + r]) * m[k * d + c];
      if (r == c) acc -= 1.0;
      worst = std::max(worst, std::abs(acc));
    }
  }
  return worst;
}

/// Throws SpecError when the operator is not unitary within 1e-9 or its
/// structured parameters are inconsistent.
inline void validate(const Operator& op) {
  std::visit(
      detail::Overloaded{
          [](const ops::Identity& o) {
            if (o.dim == 0) throw SpecError("identity of dimension 0");
          },
          [](const ops::Dense& o) {
            if (unitarity_defect(*o.matrix, o.dim) > kUnitarityTol) throw SpecError("dense operator is not unitary");
          },
          [](const ops::Local& o) {
            if (o.reg >= o.layout.registers()) throw SpecError("local: register out of range");
            if (unitarity_defect(*o.matrix, o.layout.dim(o.reg)) > kUnitarityTol) {
              throw SpecError("local operator is not unitary");
            }
          },
          [](const ops::Diffusion& o) {
            if (o.reg >= o.layout.registers()) throw SpecError("diffusion: register out of range");
          },
          [](const ops::UniformPrep& o) {
            if (o.reg >= o.layout.registers()) throw SpecError("uniform-prep: register out of range");
          },
          [](const ops::ControlledXor& o) {
            if (o.control >= o.layout.registers() || o.target >= o.layout.registers() || o.control == o.target) {
              throw SpecError("controlled-flip: bad registers");
            }
            if (!is_power_of_two(o.layout.dim(o.target)) || o.mask >= o.layout.dim(o.target) ||
                o.value >= o.layout.dim(o.control)) {
              throw SpecError("controlled-flip: mask or control value out of range");
            }
          },
          [](const ops::GadgetXor& o) {
            const auto& L = o.layout;
            if (o.control >= L.registers() || o.source >= L.registers() || o.target >= L.registers() ||
                o.target == o.source || o.target == o.control) {
              throw SpecError("gadget-xor: bad registers");
            }
            if (!is_power_of_two(L.dim(o.target)) || o.table->size() != L.dim(o.source) || o.value >= L.dim(o.control)) {
              throw SpecError("gadget-xor: table or control value out of range");
            }
            for (auto v : *o.table)
              if (v >= L.dim(o.target)) throw SpecError("gadget-xor: table value exceeds target register");
          },
          [](const ops::Oracle& o) {
            if (o.index >= o.layout.registers() || o.answer >= o.layout.registers() || o.layout.dim(o.answer) != 2 ||
                o.z->size() != o.layout.dim(o.index)) {
              throw SpecError("oracle: layout does not match |i, b> registers");
            }
          },
          [](const ops::Sequence& o) {
            if (o.factors->empty()) return;
            const std::size_t d = dimension(o.factors->front());
            for (const auto& f : *o.factors) {
              if (dimension(f) != d) throw SpecError("sequence: factor dimensions differ");
              validate(f);
            }
          },
          [](const ops::Embed& o) {
            if (o.trailing == 0) throw SpecError("embed: trailing dimension 0");
            validate(*o.inner);
          },
      },
      op.node());
}

/// op ⊗ I_trailing, with the new register appended as least significant.
inline Operator extend(const Operator& op, std::size_t trailing) {
  if (trailing == 1) return op;
  return std::visit(
      detail::Overloaded{
          [&](const ops::Identity& o) -> Operator { return ops::Identity{o.dim * trailing}; },
          [&](const ops::Local& o) -> Operator { return ops::Local{o.layout.appended(trailing), o.reg, o.matrix}; },
          [&](const ops::Diffusion& o) -> Operator { return ops::Diffusion{o.layout.appended(trailing), o.reg}; },
          [&](const ops::UniformPrep& o) -> Operator { return ops::UniformPrep{o.layout.appended(trailing), o.reg}; },
          [&](const ops::ControlledXor& o) -> Operator {
            return ops::ControlledXor{o.layout.appended(trailing), o.control, o.value, o.target, o.mask};
          },
          [&](const ops::GadgetXor& o) -> Operator {
            return ops::GadgetXor{o.layout.appended(trailing), o.control, o.value, o.source, o.target, o.table};
          },
          [&](const ops::Oracle& o) -> Operator { return ops::Oracle{o.layout.appended(trailing), o.index, o.answer, o.z}; },
          [&](const ops::Sequence& o) -> Operator {
            std::vector<Operator> f;
            f.reserve(o.factors->size());
            for (const auto& x : *o.factors) f.push_back(extend(x, trailing));
            return ops::sequence(std::move(f));
          },
          [&](const auto&) -> Operator { return ops::Embed{std::make_shared<const Operator>(op), trailing}; },
      },
      op.node());
}

// ---------------------------------------------------------------------------
// Measurements

namespace meas {

/// Computational-basis measurement, coarse-grained: basis index k yields
/// outcome label[k].
struct Basis {
  std::size_t outcomes;
  std::shared_ptr<const std::vector<std::uint32_t>> label;
};

/// General projective measurement given by dense projectors (row-major).
struct Projectors {
  std::size_t dim;
  std::shared_ptr<const std::vector<std::vector<Complex>>> projectors;
};

}  // namespace meas

class Measurement {
 public:
  using Node = std::variant<meas::Basis, meas::Projectors>;

  Measurement() : node_(meas::Basis{1, std::make_shared<const std::vector<std::uint32_t>>(1, 0)}) {}
  template <class T>
    requires std::is_constructible_v<Node, T>
  Measurement(T node) : node_(std::move(node)) {}  // NOLINT(google-explicit-constructor)

  static Measurement basis(std::size_t outcomes, std::vector<std::uint32_t> label) {
    return meas::Basis{outcomes, std::make_shared<const std::vector<std::uint32_t>>(std::move(label))};
  }

  /// Outcome = value held by register `reg`.
  static Measurement of_register(const Layout& layout, std::size_t reg) {
    std::vector<std::uint32_t> label(layout.size());
    for (std::size_t k = 0; k < label.size(); ++k) label[k] = static_cast<std::uint32_t>(layout.digit(k, reg));
    return basis(layout.dim(reg), std::move(label));
  }

  static Measurement projectors(std::size_t dim, std::vector<std::vector<Complex>> ps) {
    return meas::Projectors{dim, std::make_shared<const std::vector<std::vector<Complex>>>(std::move(ps))};
  }

  const Node& node() const { return node_; }

  std::size_t dimension() const {
    return std::visit(detail::Overloaded{[](const meas::Basis& b) { return b.label->size(); },
                                         [](const meas::Projectors& p) { return p.dim; }},
                      node_);
  }

  std::size_t outcomes() const {
    return std::visit(detail::Overloaded{[](const meas::Basis& b) { return b.outcomes; },
                                         [](const meas::Projectors& p) { return p.projectors->size(); }},
                      node_);
  }

  /// Unnormalized post-measurement state P_outcome |psi>.
  StateVector project(std::size_t outcome, std::span<const Complex> psi) const {
    StateVector out(psi.size());
    std::visit(detail::Overloaded{
                   [&](const meas::Basis& b) {
                     for (std::size_t k = 0; k < psi.size(); ++k)
                       if ((*b.label)[k] == outcome) out[k] = psi[k];
                   },
                   [&](const meas::Projectors& p) {
                     const auto& m = (*p.projectors)[outcome];
                     for (std::size_t r = 0; r < p.dim; ++r) {
                       Complex acc = 0.0;
                       for (std::size_t c = 0; c < p.dim; ++c) acc += m[r * p.dim + c] * psi[c];
                       out[r] = acc;
                     }
                   },
               },
               node_);
    return out;
  }

  /// Outcome probabilities ||P_j psi||^2.
  std::vector<double> probabilities(std::span<const Complex> psi) const {
    std::vector<double> probs(outcomes(), 0.0);
    std::visit(detail::Overloaded{
                   [&](const meas::Basis& b) {
                     for (std::size_t k = 0; k < psi.size(); ++k) probs[(*b.label)[k]] += std::norm(psi[k]);
                   },
                   [&](const meas::Projectors&) {
                     for (std::size_t j = 0; j < probs.size(); ++j) {
                       for (const auto& a : project(j, psi)) probs[j] += std::norm(a);
                     }
                   },
               },
               node_);
    return probs;
  }

  /// Throws SpecError unless the projectors are orthogonal, idempotent and
  /// sum to the identity within 1e-9.
  void validate() const {
    std::visit(detail::Overloaded{
                   [](const meas::Basis& b) {
                     for (auto l : *b.label)
                       if (l >= b.outcomes) throw SpecError("measurement label out of range");
                   },
                   [](const meas::Projectors& p) {
                     const std::size_t d = p.dim;
                     const auto& ps = *p.projectors;
                     auto mul = [d](const std::vector<Complex>& a, const std::vector<Complex>& b) {
                       std::vector<Complex> c(d * d);
                       for (std::size_t r = 0; r < d; ++r)
                         for (std::size_t k = 0; k < d; ++k)
                           for (std::size_t q = 0; q < d; ++q) c[r * d + q] += a[r * d + k] * b[k * d + q];
                       return c;
                     };
                     std::vector<Complex> sum(d * d);
                     for (std::size_t i = 0; i < ps.size(); ++i) {
                       if (ps[i].size() != d * d) throw SpecError("projector has wrong size");
                       for (std::size_t j = i; j < ps.size(); ++j) {
                         auto prod = mul(ps[i], ps[j]);
                         for (std::size_t k = 0; k < d * d; ++k) {
                           const Complex expect = (i == j) ? ps[i][k] : Complex{};
                           if (std::abs(prod[k] - expect) > kUnitarityTol) {
                             throw SpecError(i == j ? "projector is not idempotent" : "projectors are not orthogonal");
                           }
                         }
                       }
                       for (std::size_t k = 0; k < d * d; ++k) {
                         if (std::abs(ps[i][k] - std::conj(ps[i][(k % d) * d + k / d])) > kUnitarityTol) {
                           throw SpecError("projector is not Hermitian");
                         }
                         sum[k] += ps[i][k];
                       }
                     }
                     for (std::size_t r = 0; r < d; ++r)
                       for (std::size_t c = 0; c < d; ++c)
                         if (std::abs(sum[r * d + c] - (r == c ? 1.0 : 0.0)) > kUnitarityTol) {
                           throw SpecError("projectors do not sum to the identity");
                         }
                   },
               },
               node_);
  }

  /// Measurement ⊗ I_trailing.
  Measurement extended(std::size_t trailing) const {
    if (trailing == 1) return *this;
    return std::visit(
        detail::Overloaded{
            [&](const meas::Basis& b) -> Measurement {
              std::vector<std::uint32_t> label(b.label->size() * trailing);
              for (std::size_t k = 0; k < label.size(); ++k) label[k] = (*b.label)[k / trailing];
              return basis(b.outcomes, std::move(label));
            },
            [&](const meas::Projectors& p) -> Measurement {
              const std::size_t D = p.dim * trailing;
              std::vector<std::vector<Complex>> out;
              for (const auto& m : *p.projectors) {
                std::vector<Complex> big(D * D);
                for (std::size_t r = 0; r < p.dim; ++r)
                  for (std::size_t c = 0; c < p.dim; ++c)
                    for (std::size_t t = 0; t < trailing; ++t) big[(r * trailing + t) * D + c * trailing + t] = m[r * p.dim + c];
                out.push_back(std::move(big));
              }
              return projectors(D, std::move(out));
            },
        },
        node_);
  }

 private:
  Node node_;
};

inline double norm_squared(std::span<const Complex> psi) {
  double s = 0.0;
  for (const auto& a : psi) s += std::norm(a);
  return s;
}

inline StateVector basis_state(std::size_t dim, std::size_t index) {
  if (index >= dim) throw InputError("basis_state: index out of range");
  StateVector v(dim);
  v[index] = 1.0;
  return v;
}

}  // namespace twoway
