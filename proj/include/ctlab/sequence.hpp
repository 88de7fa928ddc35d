#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctlab/budget.hpp"
#include "ctlab/cache.hpp"

namespace ctlab {

// Parameters of the level construction. Level i targets strings of length
// m_i = c * 2^i; c must be a power of two >= 2 so every m_i is a power of
// two and floor-log2 is exact at the points the bounds are evaluated.
struct LevelParams {
  uint64_t c = 4;
  BudgetPolicy policy;                               // t and/or space bound
  BoundExpr g = BoundExpr::parse("n/2 - log n");     // program-length cutoff
  uint64_t depth = 0;                                // builds levels 0..depth
};

// One built level: the forbidden-prefix count, the candidate count, and the
// selected target set C(i) (2^(i+1) strings of length m_i, sorted).
struct PrefixLevel {
  uint64_t i = 0;
  uint64_t m_i = 0;
  uint64_t b_size = 0;
  uint64_t d_size = 0;
  std::vector<BitString> c_set;
};

// The construction's explicit "no extension remains" answer: the level and
// the parent string that could not be extended twice.
struct BottomReport {
  uint64_t level = 0;
  BitString parent;
};

struct BuildResult {
  std::vector<PrefixLevel> levels;  // complete levels only
  std::optional<BottomReport> bottom;
  bool ok() const { return !bottom.has_value(); }
};

struct SequenceLimits {
  uint64_t max_cutoff = 26;  // per level, programs of length < g(m_i)
};

// Level-by-level construction of the prefix tree of incompressible
// sequences. Per level i: enumerate programs of length < g(m_i), run each
// on every condition nat_to_string(m_i+j) for 0 <= j < m_i under the budget
// for output length m_i+j, collect halting outputs whose length matches the
// condition index and whose m_(i-1)-prefix lies in C(i-1); B(i) holds their
// m_i-length prefixes. C(i) takes, per element of C(i-1) in order, its two
// first extensions avoiding B(i).
BuildResult build_levels(const LevelParams& params, RunCache* cache = nullptr,
                         int jobs = 1, const SequenceLimits& limits = {});

// How the branch bit k_i is chosen at each level.
class ChoiceSource {
 public:
  static ChoiceSource explicit_bits(BitString bits);
  static ChoiceSource constant(uint8_t bit);
  static ChoiceSource expression(BoundExpr e);  // eval at i, reduced mod 2

  // "0101" -> explicit, "const0"/"const1" -> constant, else an expression.
  static ChoiceSource parse(const std::string& spec);

  uint8_t bit(uint64_t i) const;  // explicit lists throw past their end
  const std::string& describe() const { return describe_; }

 private:
  enum class Kind { kExplicit, kConstant, kExpression };
  Kind kind_ = Kind::kConstant;
  BitString bits_;
  uint8_t constant_ = 0;
  std::optional<BoundExpr> expr_;
  std::string describe_;
};

// The n-length prefix of the infinite sequence selected by the choice bits:
// descend the tree one branch bit per level and truncate the first level
// whose strings are long enough. n = 0 yields the empty string without
// consulting the build. Throws when n exceeds the built depth (or the build
// bottomed out before reaching it).
BitString omega_prefix(const BuildResult& build, const ChoiceSource& choices,
                       uint64_t n);

// Executable content of the reconstruction bound: rebuild the construction
// from nothing but (c, bounds, m_i) and the i+1 choice bits, and confirm the
// reproduced length-m_i prefix matches the original build's answer.
bool reconstruct_check(const LevelParams& params, const BitString& choices,
                       uint64_t i, RunCache* cache = nullptr, int jobs = 1,
                       const SequenceLimits& limits = {});

}  // namespace ctlab
