#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>

#include "ctlab/bounds.hpp"
#include "ctlab/machine.hpp"

namespace ctlab {

// Step ceiling applied when only a space bound is given, so space-respecting
// non-halting loops still terminate. Reports record it whenever it is live.
inline constexpr uint64_t kDefaultSafetyCap = uint64_t{1} << 20;

// Turns a target output length into the metered budget for one run: the
// step bound is t evaluated at the length (time mode), the cell bound is s
// evaluated at the length (space mode), or both. Space mode with no t gets
// the finite safety cap on steps.
struct BudgetPolicy {
  std::optional<BoundExpr> step_bound;
  std::optional<BoundExpr> cell_bound;
  uint64_t safety_cap = kDefaultSafetyCap;

  static BudgetPolicy time(BoundExpr t) {
    BudgetPolicy p;
    p.step_bound = std::move(t);
    return p;
  }
  static BudgetPolicy space(BoundExpr s, uint64_t cap = kDefaultSafetyCap) {
    BudgetPolicy p;
    p.cell_bound = std::move(s);
    p.safety_cap = cap;
    return p;
  }

  bool space_mode() const { return cell_bound.has_value(); }

  ResourceBudget budget_for(uint64_t len) const {
    if (!step_bound && !cell_bound) {
      throw std::logic_error("BudgetPolicy: no bound configured");
    }
    ResourceBudget b;
    b.max_steps = step_bound ? step_bound->eval(len) : safety_cap;
    b.max_cells = cell_bound ? cell_bound->eval(len) : kUnbounded;
    return b;
  }

  // Experiments sweeping a length range insist on nondecreasing bounds so
  // budget monotonicity arguments apply across the range.
  void require_monotone_on(uint64_t lo, uint64_t hi) const {
    if (step_bound && !step_bound->is_monotone_on(lo, hi)) {
      throw std::invalid_argument("time bound '" + step_bound->source() +
                                  "' is not monotone on the experiment range");
    }
    if (cell_bound && !cell_bound->is_monotone_on(lo, hi)) {
      throw std::invalid_argument("space bound '" + cell_bound->source() +
                                  "' is not monotone on the experiment range");
    }
  }
};

// Raised when an enumeration would blow the configured feasibility limits;
// carries the work estimate so callers can report it.
struct InfeasibleError : std::runtime_error {
  InfeasibleError(const std::string& what, uint64_t estimated_programs)
      : std::runtime_error(what), estimate(estimated_programs) {}
  uint64_t estimate;
};

}  // namespace ctlab
