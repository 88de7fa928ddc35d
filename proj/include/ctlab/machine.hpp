#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "ctlab/bits.hpp"

namespace ctlab {

// Every BitString decodes to a program; there are no syntax errors.
using Program = BitString;

inline constexpr uint64_t kUnbounded = UINT64_MAX;

struct ResourceBudget {
  uint64_t max_steps = kUnbounded;
  uint64_t max_cells = kUnbounded;

  static ResourceBudget steps(uint64_t s) { return {s, kUnbounded}; }
  static ResourceBudget cells(uint64_t c) { return {kUnbounded, c}; }
  static ResourceBudget of(uint64_t s, uint64_t c) { return {s, c}; }

  bool covers(const ResourceBudget& o) const {
    return max_steps >= o.max_steps && max_cells >= o.max_cells;
  }
  friend bool operator==(const ResourceBudget&, const ResourceBudget&) = default;
};

enum class RunStatus : uint8_t { kHalted, kBudgetExceeded };

// Outcome of one metered run. A program "outputs x" only if it halts;
// a budget-exceeded run carries no output. steps_used and cells_used never
// exceed the budget that produced the result.
struct ExecResult {
  RunStatus status = RunStatus::kBudgetExceeded;
  BitString output;
  uint64_t steps_used = 0;
  uint64_t cells_used = 0;

  bool halted() const { return status == RunStatus::kHalted; }
  friend bool operator==(const ExecResult&, const ExecResult&) = default;
};

// One deterministic, metered execution of p with read-only condition y.
//
// Decoding: the empty program halts with empty output; a leading 1 bit makes
// the rest of the program the output verbatim (|p| steps, no work tape); a
// leading 0 bit makes the remaining bits 3-bit opcodes (1-2 leftover bits
// are discarded) run on an all-zero two-way work tape:
//
//   000 left   001 right   010 flip    011 open (skip loop on 0)
//   100 close  101 emit    110 read    111 halt
//
// close jumps unconditionally back to its matching open; an unmatched open
// treats the end of the program as its close; an unmatched close is a no-op.
// read consumes the next condition bit (0 once y is exhausted) and writes it
// under the work head. Falling off the end of the opcode list halts. Every
// executed instruction costs one step; cells_used counts distinct work-tape
// cells the head has occupied.
ExecResult run(const Program& p, const BitString& y, ResourceBudget budget);

// Same semantics, plus one trace line per executed opcode
// ("pc mnemonic head_pos work_bit output_len") for differential debugging.
ExecResult run_traced(const Program& p, const BitString& y,
                      ResourceBudget budget, std::ostream& trace);

// Opcode-branch program that prints x and halts by falling off the end:
// an emit per output bit with a flip wherever the bit changes. Runs in
// |x| + (number of bit changes) steps on a single work cell.
Program emit_program(const BitString& x);

const char* opcode_name(int op);

// Process-wide run meters (runs started, opcode/literal steps simulated).
// Feeds the non-canonical counters section of reports.
struct MeterSnapshot {
  uint64_t runs = 0;
  uint64_t steps = 0;
};
MeterSnapshot meter_snapshot();

}  // namespace ctlab
