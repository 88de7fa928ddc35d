#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "ctlab/budget.hpp"
#include "ctlab/cache.hpp"
#include "ctlab/oracle.hpp"

namespace ctlab {

// Outcome of one diagonalization run. A missing outcome is the algorithm's
// explicit "no candidate remains" answer, not an error; it happens exactly
// when candidates_remaining <= m.
struct DiagResult {
  std::optional<BitString> outcome;
  uint64_t forbidden_size = 0;       // |B|
  uint64_t candidates_remaining = 0;  // 2^n - |B|
  uint64_t cutoff = 0;               // program length bound used in step 1

  bool bottom() const { return !outcome.has_value(); }
};

struct DiagLimits {
  uint64_t max_cutoff = 24;  // enumerating 2^cutoff - 1 programs
};

// Diagonalization: enumerate everything programs of length < n-k1 print on
// condition nat_to_string(n) within the budget, then output the (m+1)-th
// length-n string none of them printed. Every non-bottom output x has
// resource-bounded complexity >= n-k1 given n, by construction.
DiagResult algorithm_a(const BudgetPolicy& policy, uint64_t n, uint64_t k1,
                       uint64_t m, RunCache* cache = nullptr, int jobs = 1,
                       const DiagLimits& limits = {});

// Generalized cutoff: programs of length < g(n); outputs then satisfy
// the bound >= g(n).
DiagResult algorithm_a_general(const BudgetPolicy& policy, uint64_t n,
                               const BoundExpr& g, uint64_t m,
                               RunCache* cache = nullptr, int jobs = 1,
                               const DiagLimits& limits = {});

// Padding: the (m+1)-th string in the pairing, left-padded with zeros to
// length n. Throws std::invalid_argument when it does not fit.
BitString algorithm_b(uint64_t n, uint64_t m);

struct CoinExhausted : std::runtime_error {
  CoinExhausted(uint64_t available)
      : std::runtime_error("coin exhausted: only " + std::to_string(available) +
                           " bits were available and one more was needed"),
        bits_available(available) {}
  uint64_t bits_available;
};

// Deterministic fair-coin source.
class BitSource {
 public:
  virtual ~BitSource() = default;
  uint8_t next() {
    ++consumed_;
    return draw();
  }
  uint64_t consumed() const { return consumed_; }

 private:
  virtual uint8_t draw() = 0;
  uint64_t consumed_ = 0;
};

// Seeded PRNG coin so experiments replay bit-exactly.
class SeededBitSource final : public BitSource {
 public:
  explicit SeededBitSource(uint64_t seed) : gen_(seed) {}

 private:
  uint8_t draw() override {
    if (left_ == 0) {
      word_ = gen_();
      left_ = 64;
    }
    const uint8_t bit = static_cast<uint8_t>(word_ >> 63);
    word_ <<= 1;
    --left_;
    return bit;
  }
  std::mt19937_64 gen_;
  uint64_t word_ = 0;
  int left_ = 0;
};

// Fixed bit list; throws CoinExhausted past the end.
class ExplicitBitSource final : public BitSource {
 public:
  explicit ExplicitBitSource(BitString bits) : bits_(std::move(bits)) {}

 private:
  uint8_t draw() override {
    if (pos_ >= bits_.size()) throw CoinExhausted(bits_.size());
    return bits_[pos_++];
  }
  BitString bits_;
  size_t pos_ = 0;
};

struct SampleReport {
  std::vector<BitString> chosen;  // a*b strings, in selection order
  uint64_t bits_consumed = 0;
  std::optional<bool> success;    // set when a ground-truth predicate is given
};

// b rounds of a selections each; one selection repeatedly bisects the pool
// (coin 0 -> first half, 1 -> second half, odd splits favoring the first
// half) down to a singleton. With ground_truth present, success records
// whether any chosen string satisfies it.
SampleReport select_random(
    std::span<const BitString> pool, uint64_t a, uint64_t b, BitSource& coin,
    const std::function<bool(const BitString&)>& ground_truth = nullptr);

// Interleaves chi with exponentially growing zero blocks:
// chi_1 0^2 chi_2 0^4 ... chi_k 0^(2^k). Output length k + 2^(k+1) - 2.
BitString dilute(const BitString& chi_prefix);

}  // namespace ctlab
