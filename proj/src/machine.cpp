#include "ctlab/machine.hpp"

#include <atomic>
#include <ostream>
#include <vector>

namespace ctlab {

namespace {

enum Op : uint8_t {
  kLeft = 0,
  kRight = 1,
  kFlip = 2,
  kOpen = 3,
  kClose = 4,
  kEmit = 5,
  kRead = 6,
  kHalt = 7,
};

constexpr const char* kOpNames[8] = {"left", "right", "flip", "open",
                                     "close", "emit",  "read", "halt"};

std::atomic<uint64_t> g_runs{0};
std::atomic<uint64_t> g_steps{0};

struct Decoded {
  enum Kind : uint8_t { kEmpty, kLiteral, kOpcodes };
  Kind kind = kEmpty;
  std::vector<uint8_t> ops;
  // open: target when the work bit is 0 (index after the matching close, or
  // ops.size() when unmatched); close: matching open index, or pc+1 when
  // unmatched (no-op).
  std::vector<uint32_t> jump;
};

Decoded decode(const Program& p) {
  Decoded d;
  if (p.empty()) return d;
  if (p[0] == 1) {
    d.kind = Decoded::kLiteral;
    return d;
  }
  d.kind = Decoded::kOpcodes;
  const size_t n_ops = (p.size() - 1) / 3;  // trailing leftover bits dropped
  d.ops.resize(n_ops);
  for (size_t i = 0; i < n_ops; ++i) {
    d.ops[i] = static_cast<uint8_t>(p[1 + 3 * i] << 2 | p[2 + 3 * i] << 1 |
                                    p[3 + 3 * i]);
  }
  d.jump.assign(n_ops, 0);
  std::vector<uint32_t> open_stack;
  for (uint32_t i = 0; i < n_ops; ++i) {
    if (d.ops[i] == kOpen) {
      open_stack.push_back(i);
    } else if (d.ops[i] == kClose) {
      if (open_stack.empty()) {
        d.jump[i] = i + 1;
      } else {
        uint32_t o = open_stack.back();
        open_stack.pop_back();
        d.jump[o] = i + 1;
        d.jump[i] = o;
      }
    }
  }
  for (uint32_t o : open_stack) {
    d.jump[o] = static_cast<uint32_t>(n_ops);  // zero-branch falls off and halts
  }
  return d;
}

// Full machine configuration minus the (control-irrelevant) output; two
// equal configurations must have identical futures.
struct Config {
  uint32_t pc = 0;
  int64_t head = 0;
  int64_t lo = 0;
  int64_t hi = 0;
  size_t cond = 0;
  uint64_t tape_bits = 0;

  friend bool operator==(const Config&, const Config&) = default;
};

// Budgets above this use cycle detection so confined non-halting programs
// do not burn the whole step budget.
constexpr uint64_t kDetectThreshold = 4096;

template <bool kTrace>
ExecResult exec(const Program& p, const BitString& y, ResourceBudget b,
                std::ostream* trace) {
  g_runs.fetch_add(1, std::memory_order_relaxed);
  const Decoded d = decode(p);

  if (d.kind == Decoded::kEmpty) {
    return {RunStatus::kHalted, BitString{}, 0, 0};
  }
  if (d.kind == Decoded::kLiteral) {
    const uint64_t need = p.size();
    if (need > b.max_steps) {
      g_steps.fetch_add(b.max_steps, std::memory_order_relaxed);
      return {RunStatus::kBudgetExceeded, BitString{}, b.max_steps, 0};
    }
    g_steps.fetch_add(need, std::memory_order_relaxed);
    BitString out;
    for (size_t i = 1; i < p.size(); ++i) out.push_back(p[i]);
    return {RunStatus::kHalted, std::move(out), need, 0};
  }

  // Opcode branch. The head occupies the origin before the first step.
  if (b.max_cells == 0) {
    return {RunStatus::kBudgetExceeded, BitString{}, 0, 0};
  }
  std::vector<uint8_t> right(1, 0);  // cells 0, 1, 2, ...
  std::vector<uint8_t> left;         // cells -1, -2, ...
  auto tape = [&](int64_t pos) -> uint8_t& {
    if (pos >= 0) {
      if (static_cast<size_t>(pos) >= right.size()) right.resize(pos + 1, 0);
      return right[static_cast<size_t>(pos)];
    }
    size_t idx = static_cast<size_t>(-pos) - 1;
    if (idx >= left.size()) left.resize(idx + 1, 0);
    return left[idx];
  };

  int64_t head = 0, lo = 0, hi = 0;
  size_t cond = 0;
  uint64_t steps = 0;
  BitString out;
  const uint32_t n_ops = static_cast<uint32_t>(d.ops.size());
  uint32_t pc = 0;
  auto cells = [&]() { return static_cast<uint64_t>(hi - lo + 1); };

  bool detect = b.max_steps == kUnbounded || b.max_steps > kDetectThreshold;
  Config mark;
  bool mark_set = false;
  auto pack_tape = [&]() {
    uint64_t bits = 0;
    for (int64_t pos = lo; pos <= hi; ++pos) {
      bits = bits << 1 | tape(pos);
    }
    return bits;
  };

  auto finish = [&](RunStatus st, uint64_t steps_used) {
    g_steps.fetch_add(steps, std::memory_order_relaxed);
    if (st == RunStatus::kHalted) {
      return ExecResult{st, std::move(out), steps_used, cells()};
    }
    return ExecResult{st, BitString{}, steps_used, cells()};
  };

  for (;;) {
    if (pc >= n_ops) return finish(RunStatus::kHalted, steps);
    if (steps == b.max_steps) {
      return finish(RunStatus::kBudgetExceeded, b.max_steps);
    }

    const uint8_t op = d.ops[pc];
    const uint32_t exec_pc = pc;

    if (op == kLeft || op == kRight) {
      const int64_t next = head + (op == kRight ? 1 : -1);
      if ((next < lo || next > hi) && cells() == b.max_cells) {
        return finish(RunStatus::kBudgetExceeded, steps);
      }
      ++steps;
      head = next;
      if (head < lo) lo = head;
      if (head > hi) hi = head;
      tape(head);  // touch so the window stays materialized
      ++pc;
    } else {
      ++steps;
      switch (op) {
        case kFlip:
          tape(head) ^= 1;
          ++pc;
          break;
        case kOpen:
          pc = tape(head) ? pc + 1 : d.jump[pc];
          break;
        case kClose:
          pc = d.jump[pc];
          break;
        case kEmit:
          out.push_back(tape(head));
          ++pc;
          break;
        case kRead:
          tape(head) = cond < y.size() ? y[cond++] : 0;
          ++pc;
          break;
        case kHalt:
          return finish(RunStatus::kHalted, steps);
        default:
          ++pc;
          break;
      }
    }

    if constexpr (kTrace) {
      *trace << exec_pc << ' ' << kOpNames[d.ops[exec_pc]] << ' ' << head
             << ' ' << int(tape(head)) << ' ' << out.size() << '\n';
    }

    if (detect) {
      if (cells() > 64) {
        detect = false;
        mark_set = false;
      } else {
        if (mark_set && pc == mark.pc && head == mark.head && lo == mark.lo &&
            hi == mark.hi && cond == mark.cond &&
            pack_tape() == mark.tape_bits) {
          // Exact configuration revisited: the run cycles and never halts.
          // Identical result to simulating out the whole step budget, since
          // no new cell can be visited inside a cycle.
          const uint64_t used =
              b.max_steps == kUnbounded ? steps : b.max_steps;
          return finish(RunStatus::kBudgetExceeded, used);
        }
        if ((steps & (steps - 1)) == 0) {  // power of two: move the marker
          mark = Config{pc, head, lo, hi, cond, pack_tape()};
          mark_set = true;
        }
      }
    }
  }
}

}  // namespace

ExecResult run(const Program& p, const BitString& y, ResourceBudget budget) {
  return exec<false>(p, y, budget, nullptr);
}

ExecResult run_traced(const Program& p, const BitString& y,
                      ResourceBudget budget, std::ostream& trace) {
  return exec<true>(p, y, budget, &trace);
}

Program emit_program(const BitString& x) {
  Program p;
  p.push_back(0);
  uint8_t cur = 0;
  auto push_op = [&p](uint8_t op) {
    p.push_back(op >> 2 & 1);
    p.push_back(op >> 1 & 1);
    p.push_back(op & 1);
  };
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i] != cur) {
      push_op(kFlip);
      cur = x[i];
    }
    push_op(kEmit);
  }
  return p;
}

const char* opcode_name(int op) {
  return (op >= 0 && op < 8) ? kOpNames[op] : "?";
}

MeterSnapshot meter_snapshot() {
  return {g_runs.load(std::memory_order_relaxed),
          g_steps.load(std::memory_order_relaxed)};
}

}  // namespace ctlab
