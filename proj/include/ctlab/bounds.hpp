#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ctlab {

struct BoundParseError : std::runtime_error {
  explicit BoundParseError(const std::string& what) : std::runtime_error(what) {}
};

// A total natural-valued resource bound as a closed expression in n.
//
// Grammar (ASCII):   expr  := term (('+'|'-') term)*        '-' is monus
//                    term  := factor (('*'|'/') factor)*    '/' floors
//                    factor:= unary ('^' factor)?           right-assoc
//                    unary := 'log' unary | INT | 'n' | '(' expr ')'
//
// Restrictions keeping every expression total over the naturals: '^' takes a
// constant exponent, '/' a positive constant divisor, 'log' is floor-log2
// with log 0 = log 1 = 0.  All arithmetic is exact on uint64_t and saturates
// at UINT64_MAX.
class BoundExpr {
 public:
  BoundExpr() = default;

  static BoundExpr parse(std::string_view src);  // throws BoundParseError

  uint64_t eval(uint64_t n) const;

  // Pointwise nondecreasing over [lo, hi]; used to vet time/space bounds
  // before an experiment sweeps a length range.
  bool is_monotone_on(uint64_t lo, uint64_t hi) const;

  const std::string& source() const { return source_; }
  bool valid() const { return !nodes_.empty(); }

 private:
  struct Node {
    enum Kind : uint8_t { kLit, kVar, kAdd, kMonus, kMul, kDiv, kPow, kLog };
    Kind kind;
    uint64_t lit = 0;  // kLit value; kDiv/kPow cache the constant rhs here
    int lhs = -1;
    int rhs = -1;
  };

  uint64_t eval_node(int idx, uint64_t n) const;

  std::vector<Node> nodes_;
  int root_ = -1;
  std::string source_;

  friend class BoundParser;
};

uint64_t floor_log2(uint64_t n);  // 0 for n in {0, 1}

}  // namespace ctlab
