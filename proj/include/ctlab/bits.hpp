#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ctlab {

// Finite binary string, the common currency for programs, outputs and
// condition tapes. Values are canonical: "00" and "0" are distinct.
// The total order is length-increasing lexicographic (shorter strings
// first, 0 before 1 within a length), which is exactly the order of the
// natural-number pairing below.
class BitString {
 public:
  BitString() = default;

  // Parses a string of '0'/'1' characters; throws std::invalid_argument on
  // anything else. The empty string parses to the empty BitString.
  static BitString from_string(std::string_view s);

  // The len low bits of value, most significant first.
  static BitString from_value(uint64_t value, size_t len);

  size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }
  uint8_t operator[](size_t i) const { return bits_[i]; }

  void push_back(uint8_t bit) { bits_.push_back(bit & 1); }
  void append(const BitString& other);
  void append_zeros(size_t count);

  BitString prefix(size_t k) const;
  bool has_prefix(const BitString& p) const;

  // Numeric value with the leftmost bit most significant. Requires
  // size() <= 63 so the result (and the pairing) fits in uint64_t.
  uint64_t value() const;

  std::string to_string() const;
  // Human-readable form: "ε" for the empty string, to_string() otherwise.
  std::string display() const;

  friend bool operator==(const BitString&, const BitString&) = default;
  std::strong_ordering operator<=>(const BitString& o) const;

  const std::vector<uint8_t>& raw() const { return bits_; }

 private:
  std::vector<uint8_t> bits_;
};

struct BitStringHash {
  size_t operator()(const BitString& s) const;
};

// Pairing of naturals with strings in length-increasing lexicographic
// order: (ε,0), (0,1), (1,2), (00,3), (01,4), ...
BitString nat_to_string(uint64_t n);
uint64_t string_to_nat(const BitString& s);

// k-th (0-indexed) element of pool, in lexicographic order, with the given
// prefix; std::nullopt when fewer than k+1 such elements exist. pool must
// be sorted ascending and hold strings of one common length >= |prefix|.
std::optional<BitString> lex_kth_with_prefix(uint64_t k,
                                             const BitString& prefix,
                                             std::span<const BitString> pool);

}  // namespace ctlab
