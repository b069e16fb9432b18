#pragma once

// Boolean functions, two-party gadgets, composed functions h∘g and the
// lifted languages { x #^n y : f(x, y) = 1 }.

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "twoway/bits.hpp"
#include "twoway/errors.hpp"

namespace twoway {

inline constexpr std::size_t kTruthTableMaxArity = 20;

class BoolFunction {
 public:
  using Evaluator = std::function<bool(BitSpan)>;

  BoolFunction(std::string name, std::size_t arity, Evaluator eval)
      : name_(std::move(name)), arity_(arity), eval_(std::move(eval)) {
    if (arity_ == 0) throw InputError("BoolFunction: arity must be positive");
    if (arity_ <= kTruthTableMaxArity) {
      auto table = std::make_shared<std::vector<std::uint8_t>>(std::size_t{1} << arity_);
      Bits x(arity_);
      for (std::size_t v = 0; v < table->size(); ++v) {
        for (std::size_t i = 0; i < arity_; ++i) x[i] = (v >> (arity_ - 1 - i)) & 1U;
        (*table)[v] = eval_(x) ? 1 : 0;
      }
      table_ = std::move(table);
    }
  }

  /// Table index v encodes x with x_1 as the most significant bit.
  static BoolFunction from_truth_table(std::string name, std::size_t arity,
                                       std::vector<std::uint8_t> table) {
    if (arity == 0 || arity > kTruthTableMaxArity || table.size() != (std::size_t{1} << arity)) {
      throw InputError("from_truth_table: table size must be 2^arity with 1 <= arity <= 20");
    }
    auto shared = std::make_shared<const std::vector<std::uint8_t>>(std::move(table));
    return BoolFunction(std::move(name), arity,
                        [shared](BitSpan x) { return (*shared)[value_of(x)] != 0; });
  }

  const std::string& name() const { return name_; }
  std::size_t arity() const { return arity_; }

  bool operator()(BitSpan x) const {
    if (x.size() != arity_) {
      throw InputError(name_ + ": expected " + std::to_string(arity_) + " bits, got " +
                       std::to_string(x.size()));
    }
    return eval_(x);
  }

  /// Present iff arity <= 20.
  const std::vector<std::uint8_t>* truth_table() const { return table_.get(); }

 private:
  std::string name_;
  std::size_t arity_;
  Evaluator eval_;
  std::shared_ptr<const std::vector<std::uint8_t>> table_;
};

class Gadget {
 public:
  using Evaluator = std::function<bool(BitSpan, BitSpan)>;

  Gadget(std::string name, std::size_t width, Evaluator eval)
      : name_(std::move(name)), width_(width), eval_(std::move(eval)) {
    if (width_ == 0) throw InputError("Gadget: width must be positive");
  }

  const std::string& name() const { return name_; }
  std::size_t width() const { return width_; }

  bool operator()(BitSpan a, BitSpan b) const {
    if (a.size() != width_ || b.size() != width_) {
      throw InputError(name_ + ": blocks must have width " + std::to_string(width_));
    }
    return eval_(a, b);
  }

 private:
  std::string name_;
  std::size_t width_;
  Evaluator eval_;
};

inline bool eval_ip(BitSpan a, BitSpan b) {
  if (a.size() != b.size() || a.empty()) throw InputError("eval_ip: need |a| = |b| >= 1");
  unsigned acc = 0;
  for (std::size_t j = 0; j < a.size(); ++j) acc ^= (a[j] & b[j]);
  return acc != 0;
}

inline bool is_power_of_three(std::size_t n) {
  if (n == 0) return false;
  while (n % 3 == 0) n /= 3;
  return n == 1;
}

/// Recursive ternary NE: NE^1(a,b,c) = 0 iff a = b = c.
inline bool eval_ne(BitSpan x) {
  if (!is_power_of_three(x.size())) {
    throw InputError("eval_ne: length " + std::to_string(x.size()) + " is not a power of 3");
  }
  if (x.size() == 1) return x[0] != 0;
  const std::size_t third = x.size() / 3;
  const bool a = eval_ne(x.subspan(0, third));
  const bool b = eval_ne(x.subspan(third, third));
  const bool c = eval_ne(x.subspan(2 * third, third));
  return !(a == b && b == c);
}

namespace fn {

inline BoolFunction or_fn(std::size_t p) {
  return BoolFunction("or:" + std::to_string(p), p, [](BitSpan x) {
    for (auto b : x)
      if (b) return true;
    return false;
  });
}

inline BoolFunction xor_fn(std::size_t p) {
  return BoolFunction("xor:" + std::to_string(p), p, [](BitSpan x) {
    unsigned acc = 0;
    for (auto b : x) acc ^= b;
    return acc != 0;
  });
}

inline BoolFunction ne_fn(std::size_t p) {
  if (!is_power_of_three(p)) throw InputError("ne: arity must be a power of 3");
  return BoolFunction("ne:" + std::to_string(p), p, [](BitSpan x) { return eval_ne(x); });
}

inline BoolFunction constant_fn(std::size_t p, bool value) {
  return BoolFunction(std::string(value ? "const1:" : "const0:") + std::to_string(p), p,
                      [value](BitSpan) { return value; });
}

/// x_i, 1-based.
inline BoolFunction dictator_fn(std::size_t p, std::size_t i) {
  if (i == 0 || i > p) throw InputError("dictator: index out of range");
  return BoolFunction("dict:" + std::to_string(i) + ":" + std::to_string(p), p,
                      [i](BitSpan x) { return x[i - 1] != 0; });
}

inline Gadget and1() {
  return Gadget("and1", 1, [](BitSpan a, BitSpan b) { return (a[0] & b[0]) != 0; });
}

inline Gadget ip(std::size_t m) {
  return Gadget("ip:" + std::to_string(m), m, [](BitSpan a, BitSpan b) { return eval_ip(a, b); });
}

}  // namespace fn

class ComposedFunction {
 public:
  ComposedFunction(BoolFunction outer, Gadget gadget)
      : outer_(std::move(outer)), gadget_(std::move(gadget)) {}

  const BoolFunction& outer() const { return outer_; }
  const Gadget& gadget() const { return gadget_; }
  std::size_t p() const { return outer_.arity(); }
  std::size_t m() const { return gadget_.width(); }
  /// Input bits per party.
  std::size_t n() const { return p() * m(); }

  /// z_i = g(x_i, y_i) over the i-th m-bit blocks.
  Bits gadget_outputs(BitSpan x, BitSpan y) const {
    if (x.size() != n() || y.size() != n()) {
      throw InputError("compose_eval: inputs must have " + std::to_string(n()) + " bits each");
    }
    Bits z(p());
    for (std::size_t i = 0; i < p(); ++i) {
      z[i] = gadget_(x.subspan(i * m(), m()), y.subspan(i * m(), m())) ? 1 : 0;
    }
    return z;
  }

  bool operator()(BitSpan x, BitSpan y) const { return outer_(gadget_outputs(x, y)); }

  std::string name() const { return outer_.name() + "∘" + gadget_.name(); }

 private:
  BoolFunction outer_;
  Gadget gadget_;
};

inline bool compose_eval(const ComposedFunction& f, BitSpan x, BitSpan y) { return f(x, y); }

/// Smallest m with 2^m >= p, at least 1.
inline std::size_t default_gadget_width(std::size_t p) {
  std::size_t m = 0;
  while ((std::size_t{1} << m) < p) ++m;
  return m == 0 ? 1 : m;
}

enum class LanguageKind { Lifted, Eq, Ints, Rne };

/// L(n) = { x #^n y : x, y ∈ {0,1}^n, pred(x, y) }.
class LanguageSpec {
 public:
  static LanguageSpec lifted(ComposedFunction f) {
    const std::size_t n = f.n();
    return LanguageSpec(LanguageKind::Lifted, n, std::make_shared<const ComposedFunction>(std::move(f)));
  }
  static LanguageSpec eq(std::size_t n) { return LanguageSpec(LanguageKind::Eq, n, nullptr); }
  static LanguageSpec ints(std::size_t n) {
    return LanguageSpec(LanguageKind::Ints, n,
                        std::make_shared<const ComposedFunction>(fn::or_fn(n), fn::and1()));
  }
  static LanguageSpec rne(std::size_t n) {
    return LanguageSpec(LanguageKind::Rne, n,
                        std::make_shared<const ComposedFunction>(fn::ne_fn(n), fn::and1()));
  }

  LanguageKind kind() const { return kind_; }
  std::size_t n() const { return n_; }
  const ComposedFunction* function() const { return f_.get(); }

  bool predicate(BitSpan x, BitSpan y) const {
    if (x.size() != n_ || y.size() != n_) throw InputError("predicate: wrong block length");
    if (kind_ == LanguageKind::Eq) return std::equal(x.begin(), x.end(), y.begin());
    return (*f_)(x, y);
  }

  /// Splits w = x #^n y; nullopt when w does not have that shape.
  std::optional<std::pair<Bits, Bits>> split(std::string_view w) const {
    if (w.size() != 3 * n_) return std::nullopt;
    Bits x(n_), y(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      const char cx = w[i], ch = w[n_ + i], cy = w[2 * n_ + i];
      if ((cx != '0' && cx != '1') || ch != '#' || (cy != '0' && cy != '1')) return std::nullopt;
      x[i] = static_cast<std::uint8_t>(cx - '0');
      y[i] = static_cast<std::uint8_t>(cy - '0');
    }
    return std::make_pair(std::move(x), std::move(y));
  }

  bool contains(std::string_view w) const {
    auto parts = split(w);
    return parts && predicate(parts->first, parts->second);
  }

 private:
  LanguageSpec(LanguageKind kind, std::size_t n, std::shared_ptr<const ComposedFunction> f)
      : kind_(kind), n_(n), f_(std::move(f)) {
    if (n_ == 0) throw InputError("LanguageSpec: n must be positive");
  }

  LanguageKind kind_;
  std::size_t n_;
  std::shared_ptr<const ComposedFunction> f_;
};

inline bool membership(const LanguageSpec& lang, std::string_view w) { return lang.contains(w); }

namespace detail {

inline std::size_t parse_size(std::string_view s, std::string_view what) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw InputError("bad " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

inline std::pair<std::string_view, std::optional<std::size_t>> split_id(std::string_view id) {
  auto colon = id.find(':');
  if (colon == std::string_view::npos) return {id, std::nullopt};
  return {id.substr(0, colon), parse_size(id.substr(colon + 1), "parameter")};
}

}  // namespace detail

/// Outer functions by identifier: `or`, `xor`, `ne`, each with `:<p>` or a default arity.
inline BoolFunction function_from_id(std::string_view id, std::optional<std::size_t> arity = {}) {
  auto [head, param] = detail::split_id(id);
  auto p = param ? param : arity;
  if (!p || *p == 0) throw InputError("function '" + std::string(id) + "' needs a positive arity");
  if (head == "or") return fn::or_fn(*p);
  if (head == "xor") return fn::xor_fn(*p);
  if (head == "ne") return fn::ne_fn(*p);
  if (head == "const0") return fn::constant_fn(*p, false);
  if (head == "const1") return fn::constant_fn(*p, true);
  throw InputError("unknown function id '" + std::string(id) + "'");
}

/// Gadgets by identifier: `and1`, `ip:<m>`.
inline Gadget gadget_from_id(std::string_view id) {
  auto [head, param] = detail::split_id(id);
  if (head == "and1" && !param) return fn::and1();
  if (head == "ip" && param && *param > 0) return fn::ip(*param);
  throw InputError("unknown gadget id '" + std::string(id) + "'");
}

/// Languages by identifier: `eq`, `ints`, `rne`.
inline LanguageSpec language_from_id(std::string_view id, std::size_t n) {
  if (id == "eq") return LanguageSpec::eq(n);
  if (id == "ints") return LanguageSpec::ints(n);
  if (id == "rne") return LanguageSpec::rne(n);
  throw InputError("unknown language id '" + std::string(id) + "'");
}

}  // namespace twoway
