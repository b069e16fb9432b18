#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "twoway/errors.hpp"

namespace twoway {

enum class Symbol : std::uint8_t { Zero, One, Hash, LeftEnd, RightEnd };
enum class Move : std::int8_t { Left = -1, Stay = 0, Right = 1 };

inline constexpr std::size_t kSymbolCount = 5;

inline const char* symbol_name(Symbol s) {
  switch (s) {
    case Symbol::Zero: return "0";
    case Symbol::One: return "1";
    case Symbol::Hash: return "#";
    case Symbol::LeftEnd: return "¢";
    case Symbol::RightEnd: return "$";
  }
  return "?";
}

inline Symbol symbol_from_name(std::string_view s) {
  if (s == "0") return Symbol::Zero;
  if (s == "1") return Symbol::One;
  if (s == "#") return Symbol::Hash;
  if (s == "¢" || s == "<") return Symbol::LeftEnd;
  if (s == "$" || s == ">") return Symbol::RightEnd;
  throw InputError("unknown tape symbol '" + std::string(s) + "'");
}

inline bool is_bit(Symbol s) { return s == Symbol::Zero || s == Symbol::One; }
inline std::uint8_t bit_of(Symbol s) { return s == Symbol::One ? 1 : 0; }

/// The tape ¢ w $, positions 0 .. |w|+1.
class Tape {
 public:
  Tape(std::string_view payload, bool circular) : payload_(payload), circular_(circular) {
    cells_.reserve(payload.size() + 2);
    cells_.push_back(Symbol::LeftEnd);
    for (char c : payload) {
      switch (c) {
        case '0': cells_.push_back(Symbol::Zero); break;
        case '1': cells_.push_back(Symbol::One); break;
        case '#': cells_.push_back(Symbol::Hash); break;
        default: throw InputError("tape payload must be over {0,1,#}, got '" + std::string(1, c) + "'");
      }
    }
    cells_.push_back(Symbol::RightEnd);
  }

  std::size_t size() const { return cells_.size(); }
  bool circular() const { return circular_; }
  const std::string& payload() const { return payload_; }
  Symbol at(std::size_t pos) const { return cells_.at(pos); }

  /// New head position; on a linear tape falling off an end-marker is a
  /// machine defect.
  std::size_t move(std::size_t pos, Move d) const {
    if (d == Move::Stay) return pos;
    if (d == Move::Right) {
      if (pos + 1 < cells_.size()) return pos + 1;
      if (circular_) return 0;
      throw SpecError("head moved right of $ on a linear tape");
    }
    if (pos > 0) return pos - 1;
    if (circular_) return cells_.size() - 1;
    throw SpecError("head moved left of ¢ on a linear tape");
  }

 private:
  std::string payload_;
  bool circular_;
  std::vector<Symbol> cells_;
};

inline void hash_combine(std::size_t& seed, std::size_t v) {
  seed ^= v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
}

}  // namespace twoway
