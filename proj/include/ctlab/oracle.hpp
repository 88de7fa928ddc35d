#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctlab/budget.hpp"
#include "ctlab/cache.hpp"
#include "ctlab/machine.hpp"

#include "json.hpp"

namespace ctlab {

// A complexity value; infinite means no program in the admissible length
// range produces the string within the budget. Infinite orders above every
// finite value.
struct CtValue {
  uint64_t v = 0;
  bool infinite = false;

  static CtValue finite(uint64_t value) { return {value, false}; }
  static CtValue inf() { return {0, true}; }

  friend bool operator==(const CtValue&, const CtValue&) = default;
  bool operator<(const CtValue& o) const {
    if (infinite != o.infinite) return o.infinite;
    return !infinite && v < o.v;
  }
  bool operator>=(const CtValue& o) const { return !(*this < o); }

  nlohmann::json to_json() const;
  std::string to_string() const;
};

// A complexity claim plus the evidence: the witness program (absent for
// infinite values) and the budget it ran under. Anything this module
// reports can be replayed from its certificate.
struct Certificate {
  CtValue value;
  std::optional<Program> witness;
  ResourceBudget budget_used;
};

struct OracleLimits {
  uint64_t max_exact_len = 18;  // exact_ct enumerates 2^(|x|+2)-1 programs
  uint64_t max_census_n = 14;   // census holds 2^n rows
};

// Exact resource-bounded complexity of x given condition y: the shortest
// program (first in length-increasing lexicographic order) of length at
// most |x|+1 whose run under policy.budget_for(|x|) halts with output x.
// The |x|+1 radius is sound on this machine because of the literal branch.
Certificate exact_ct(const BitString& x, const BitString& y,
                     const BudgetPolicy& policy, RunCache* cache = nullptr,
                     int jobs = 1, const OracleLimits& limits = {});

// Anytime upper bound on plain complexity: the best certificate across a
// componentwise nondecreasing budget schedule, radius |x|+1 per stage.
struct UpperOutcome {
  Certificate best;
  std::vector<std::pair<ResourceBudget, CtValue>> stages;
};
UpperOutcome upper_c(const BitString& x, const BitString& y,
                     std::span<const ResourceBudget> schedule,
                     RunCache* cache = nullptr, int jobs = 1,
                     const OracleLimits& limits = {});

struct CensusRow {
  BitString x;
  CtValue value;
  std::optional<Program> witness;
};

struct CensusThreshold {
  uint64_t k1 = 0;
  uint64_t threshold = 0;  // n monus k1
  uint64_t count = 0;      // rows with value >= threshold (infinite included)
  std::string fraction;    // exact, reduced, "p/q"
};

struct CensusTable {
  uint64_t n = 0;
  std::string bound_source;
  std::vector<CensusRow> rows;  // 2^n rows in lexicographic order of x
  std::map<uint64_t, uint64_t> histogram;
  uint64_t infinite_count = 0;
  std::vector<CensusThreshold> thresholds;

  nlohmann::json to_json() const;
  void to_csv(std::ostream& out) const;  // columns: x, ct_value, witness
};

// Exact per-length census: C^t(x | nat_to_string(n)) for every x of length
// n, plus the value histogram and the >= n-k1 counts for each requested k1.
// One budget-policy sweep over all programs of length <= n+1 serves every
// row; ties resolve exactly as in exact_ct.
CensusTable census(uint64_t n, const BudgetPolicy& policy,
                   const std::vector<uint64_t>& k1_set,
                   RunCache* cache = nullptr, int jobs = 1,
                   const OracleLimits& limits = {});

// Replays a certificate: a finite value must have a witness of that length
// that halts with output x within the recorded budget.
bool certificate_replays(const Certificate& cert, const BitString& x,
                         const BitString& y);

std::string reduced_fraction(uint64_t num, uint64_t den);

}  // namespace ctlab
