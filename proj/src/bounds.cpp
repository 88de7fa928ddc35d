#include "ctlab/bounds.hpp"

#include <bit>
#include <cctype>

namespace ctlab {

uint64_t floor_log2(uint64_t n) {
  return n < 2 ? 0 : static_cast<uint64_t>(std::bit_width(n) - 1);
}

namespace {

uint64_t sat_add(uint64_t a, uint64_t b) {
  uint64_t r = a + b;
  return r < a ? UINT64_MAX : r;
}

uint64_t sat_mul(uint64_t a, uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > UINT64_MAX / b) return UINT64_MAX;
  return a * b;
}

uint64_t sat_pow(uint64_t base, uint64_t exp) {
  uint64_t r = 1;  // 0^0 = 1 by the usual discrete convention
  while (exp-- > 0) {
    r = sat_mul(r, base);
    if (r == UINT64_MAX) return r;
  }
  return r;
}

}  // namespace

class BoundParser {
 public:
  explicit BoundParser(std::string_view src) : src_(src) {}

  BoundExpr run() {
    BoundExpr e;
    e.source_.assign(src_);
    out_ = &e;
    e.root_ = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) fail("trailing input");
    return e;
  }

 private:
  using Node = BoundExpr::Node;

  [[noreturn]] void fail(const std::string& msg) {
    throw BoundParseError("bound expression '" + std::string(src_) + "': " +
                          msg + " at offset " + std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      ++pos_;
    }
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  // Accepts the ASCII '-' and the dot-minus glyph some docs use for monus.
  bool eat_monus() {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == '-') {
      ++pos_;
      return true;
    }
    if (pos_ + 3 <= src_.size() && src_.substr(pos_, 3) == "\xe2\x88\xb8") {
      pos_ += 3;
      return true;
    }
    return false;
  }

  int add_node(Node::Kind k, uint64_t lit = 0, int lhs = -1, int rhs = -1) {
    out_->nodes_.push_back(Node{k, lit, lhs, rhs});
    return static_cast<int>(out_->nodes_.size()) - 1;
  }

  bool subtree_constant(int idx) const {
    const Node& nd = out_->nodes_[static_cast<size_t>(idx)];
    if (nd.kind == Node::kVar) return false;
    if (nd.kind == Node::kLit) return true;
    bool ok = true;
    if (nd.lhs >= 0) ok = ok && subtree_constant(nd.lhs);
    if (nd.rhs >= 0) ok = ok && subtree_constant(nd.rhs);
    return ok;
  }

  int parse_expr() {
    int lhs = parse_term();
    for (;;) {
      if (eat('+')) {
        lhs = add_node(Node::kAdd, 0, lhs, parse_term());
      } else if (eat_monus()) {
        lhs = add_node(Node::kMonus, 0, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  int parse_term() {
    int lhs = parse_factor();
    for (;;) {
      if (eat('*')) {
        lhs = add_node(Node::kMul, 0, lhs, parse_factor());
      } else if (eat('/')) {
        int rhs = parse_factor();
        if (!subtree_constant(rhs)) fail("divisor must be a constant");
        uint64_t d = out_->eval_node(rhs, 0);
        if (d == 0) fail("division by zero");
        lhs = add_node(Node::kDiv, d, lhs, rhs);
      } else {
        return lhs;
      }
    }
  }

  int parse_factor() {
    int base = parse_unary();
    if (eat('^')) {
      int exp = parse_factor();  // right-associative
      if (!subtree_constant(exp)) fail("exponent must be a constant");
      return add_node(Node::kPow, out_->eval_node(exp, 0), base, exp);
    }
    return base;
  }

  int parse_unary() {
    skip_ws();
    if (src_.substr(pos_).starts_with("log")) {
      // Reject identifiers like "logn" is not a concern: 'n' after "log"
      // is the variable, so "logn" means log n.
      pos_ += 3;
      return add_node(Node::kLog, 0, parse_unary());
    }
    return parse_atom();
  }

  int parse_atom() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      int inner = parse_expr();
      if (!eat(')')) fail("expected ')'");
      return inner;
    }
    if (c == 'n') {
      ++pos_;
      return add_node(Node::kVar);
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      uint64_t v = 0;
      while (pos_ < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        uint64_t digit = static_cast<uint64_t>(src_[pos_] - '0');
        v = sat_add(sat_mul(v, 10), digit);
        ++pos_;
      }
      return add_node(Node::kLit, v);
    }
    fail("unexpected character");
  }

  std::string_view src_;
  size_t pos_ = 0;
  BoundExpr* out_ = nullptr;
};

BoundExpr BoundExpr::parse(std::string_view src) {
  return BoundParser(src).run();
}

uint64_t BoundExpr::eval(uint64_t n) const {
  if (root_ < 0) throw std::logic_error("BoundExpr: evaluating empty expression");
  return eval_node(root_, n);
}

uint64_t BoundExpr::eval_node(int idx, uint64_t n) const {
  const Node& nd = nodes_[static_cast<size_t>(idx)];
  switch (nd.kind) {
    case Node::kLit:
      return nd.lit;
    case Node::kVar:
      return n;
    case Node::kAdd:
      return sat_add(eval_node(nd.lhs, n), eval_node(nd.rhs, n));
    case Node::kMonus: {
      uint64_t a = eval_node(nd.lhs, n);
      uint64_t b = eval_node(nd.rhs, n);
      return a > b ? a - b : 0;
    }
    case Node::kMul:
      return sat_mul(eval_node(nd.lhs, n), eval_node(nd.rhs, n));
    case Node::kDiv:
      return eval_node(nd.lhs, n) / nd.lit;
    case Node::kPow:
      return sat_pow(eval_node(nd.lhs, n), nd.lit);
    case Node::kLog:
      return floor_log2(eval_node(nd.lhs, n));
  }
  throw std::logic_error("BoundExpr: bad node");
}

bool BoundExpr::is_monotone_on(uint64_t lo, uint64_t hi) const {
  if (lo >= hi) return true;
  uint64_t prev = eval(lo);
  for (uint64_t n = lo + 1; n <= hi; ++n) {
    uint64_t cur = eval(n);
    if (cur < prev) return false;
    prev = cur;
  }
  return true;
}

}  // namespace ctlab
