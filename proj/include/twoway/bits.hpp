#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "twoway/errors.hpp"

namespace twoway {

/// Bit vector, one byte per bit holding 0 or 1.
using Bits = std::vector<std::uint8_t>;
using BitSpan = std::span<const std::uint8_t>;

inline Bits parse_bits(std::string_view s) {
  Bits out;
  out.reserve(s.size());
  for (char c : s) {
    if (c != '0' && c != '1') {
      throw InputError("expected a 0/1 string, got '" + std::string(s) + "'");
    }
    out.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return out;
}

inline std::string to_string(BitSpan bits) {
  std::string s;
  s.reserve(bits.size());
  for (auto b : bits) s.push_back(b ? '1' : '0');
  return s;
}

/// Bits of `value`, most significant first, padded to `width`.
inline Bits bits_of(std::uint64_t value, std::size_t width) {
  Bits out(width);
  for (std::size_t i = 0; i < width; ++i) {
    out[width - 1 - i] = static_cast<std::uint8_t>((value >> i) & 1U);
  }
  return out;
}

/// Integer value of a bit string read most significant bit first (width <= 64).
inline std::uint64_t value_of(BitSpan bits) {
  if (bits.size() > 64) throw InputError("value_of: more than 64 bits");
  std::uint64_t v = 0;
  for (auto b : bits) v = (v << 1) | b;
  return v;
}

/// Residue of the MSB-first integer `bits` modulo `p`, for any width.
inline std::uint64_t residue(BitSpan bits, std::uint64_t p) {
  std::uint64_t r = 0;
  for (auto b : bits) r = (2 * r + b) % p;
  return r;
}

inline Bits random_bits(std::size_t n, std::mt19937_64& rng) {
  Bits out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng() & 1U);
  return out;
}

/// The lifted-language string x #^n y.
inline std::string lifted_word(BitSpan x, BitSpan y) {
  if (x.size() != y.size()) throw InputError("lifted_word: |x| != |y|");
  return to_string(x) + std::string(x.size(), '#') + to_string(y);
}

}  // namespace twoway
