#include "ctlab/bits.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace ctlab {

BitString BitString::from_string(std::string_view s) {
  BitString out;
  out.bits_.reserve(s.size());
  for (char c : s) {
    if (c != '0' && c != '1') {
      throw std::invalid_argument("BitString: expected only '0'/'1', got '" +
                                  std::string(1, c) + "'");
    }
    out.bits_.push_back(static_cast<uint8_t>(c - '0'));
  }
  return out;
}

BitString BitString::from_value(uint64_t value, size_t len) {
  if (len > 64) throw std::invalid_argument("BitString: len > 64");
  BitString out;
  out.bits_.resize(len);
  for (size_t i = 0; i < len; ++i) {
    out.bits_[i] = static_cast<uint8_t>((value >> (len - 1 - i)) & 1u);
  }
  return out;
}

void BitString::append(const BitString& other) {
  bits_.insert(bits_.end(), other.bits_.begin(), other.bits_.end());
}

void BitString::append_zeros(size_t count) {
  bits_.insert(bits_.end(), count, 0);
}

BitString BitString::prefix(size_t k) const {
  if (k > bits_.size()) throw std::out_of_range("BitString::prefix");
  BitString out;
  out.bits_.assign(bits_.begin(), bits_.begin() + static_cast<ptrdiff_t>(k));
  return out;
}

bool BitString::has_prefix(const BitString& p) const {
  if (p.size() > size()) return false;
  return std::equal(p.bits_.begin(), p.bits_.end(), bits_.begin());
}

uint64_t BitString::value() const {
  if (size() > 63) throw std::overflow_error("BitString::value: size > 63");
  uint64_t v = 0;
  for (uint8_t b : bits_) v = (v << 1) | b;
  return v;
}

std::string BitString::to_string() const {
  std::string s;
  s.reserve(size());
  for (uint8_t b : bits_) s.push_back(static_cast<char>('0' + b));
  return s;
}

std::string BitString::display() const {
  return empty() ? std::string("\xce\xb5") : to_string();
}

std::strong_ordering BitString::operator<=>(const BitString& o) const {
  if (auto c = bits_.size() <=> o.bits_.size(); c != 0) return c;
  for (size_t i = 0; i < bits_.size(); ++i) {
    if (auto c = bits_[i] <=> o.bits_[i]; c != 0) return c;
  }
  return std::strong_ordering::equal;
}

size_t BitStringHash::operator()(const BitString& s) const {
  // FNV-1a over the digits, with the length mixed in so "0" and "00" differ.
  uint64_t h = 1469598103934665603ull;
  auto mix = [&h](uint64_t x) {
    h ^= x;
    h *= 1099511628211ull;
  };
  mix(s.size());
  uint64_t word = 0;
  size_t filled = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    word = (word << 1) | s[i];
    if (++filled == 64) {
      mix(word);
      word = 0;
      filled = 0;
    }
  }
  if (filled > 0) mix(word);
  return static_cast<size_t>(h);
}

BitString nat_to_string(uint64_t n) {
  if (n == UINT64_MAX) throw std::overflow_error("nat_to_string: n too large");
  // n+1 written in binary is '1' followed by exactly the digits of the
  // n-th string in length-increasing lexicographic order.
  const uint64_t m = n + 1;
  const int len = std::bit_width(m) - 1;
  return BitString::from_value(m - (uint64_t{1} << len),
                               static_cast<size_t>(len));
}

uint64_t string_to_nat(const BitString& s) {
  if (s.size() > 63) throw std::overflow_error("string_to_nat: size > 63");
  return (uint64_t{1} << s.size()) + s.value() - 1;
}

std::optional<BitString> lex_kth_with_prefix(uint64_t k,
                                             const BitString& prefix,
                                             std::span<const BitString> pool) {
  if (!pool.empty()) {
    const size_t len = pool.front().size();
    if (len < prefix.size()) {
      throw std::invalid_argument(
          "lex_kth_with_prefix: pool strings shorter than prefix");
    }
    for (const auto& s : pool) {
      if (s.size() != len) {
        throw std::invalid_argument(
            "lex_kth_with_prefix: pool strings of unequal length");
      }
    }
  }
  // The block sharing the prefix is contiguous in sorted order; its first
  // element is >= prefix extended with zeros.
  BitString low = prefix;
  if (!pool.empty()) low.append_zeros(pool.front().size() - prefix.size());
  auto it = std::lower_bound(pool.begin(), pool.end(), low);
  for (; it != pool.end() && it->has_prefix(prefix); ++it) {
    if (k == 0) return *it;
    --k;
  }
  return std::nullopt;
}

}  // namespace ctlab
