#include "ctlab/sequence.hpp"

#include <algorithm>
#include <bit>

#include "ctlab/parallel.hpp"

namespace ctlab {

namespace {

constexpr uint64_t kChunk = 1024;

void validate(const LevelParams& params) {
  if (params.c < 2 || !std::has_single_bit(params.c)) {
    throw std::invalid_argument("level construction needs c a power of two >= 2");
  }
  if (params.depth > 20 || params.c > (uint64_t{1} << 14) ||
      (params.c << params.depth) > (uint64_t{1} << 20)) {
    throw std::invalid_argument("level construction: depth too large");
  }
}

// Step 1 for level i: the set B(i) of forbidden m_i-length prefixes, sorted.
std::vector<BitString> forbidden_prefixes(const LevelParams& params,
                                          uint64_t m_i,
                                          const std::vector<BitString>& parents,
                                          uint64_t parent_len, RunCache* cache,
                                          int jobs) {
  const uint64_t cutoff = params.g.eval(m_i);
  if (cutoff == 0) return {};
  const uint64_t count = (uint64_t{1} << cutoff) - 1;

  using Set = std::vector<BitString>;
  auto map_chunk = [&](uint64_t lo, uint64_t hi) -> Set {
    Set local;
    for (uint64_t idx = lo; idx < hi; ++idx) {
      const Program p = nat_to_string(idx);
      for (uint64_t j = 0; j < m_i; ++j) {
        const uint64_t target_len = m_i + j;
        const BitString y = nat_to_string(target_len);
        const ExecResult r =
            cached_run(cache, p, y, params.policy.budget_for(target_len));
        if (!r.halted() || r.output.size() != target_len) continue;
        if (!std::binary_search(parents.begin(), parents.end(),
                                r.output.prefix(parent_len))) {
          continue;
        }
        local.push_back(r.output.prefix(m_i));
      }
    }
    std::sort(local.begin(), local.end());
    local.erase(std::unique(local.begin(), local.end()), local.end());
    return local;
  };
  return parallel_reduce<Set>(0, count, jobs, kChunk, Set{}, map_chunk,
                              [](Set a, Set b) {
                                Set merged;
                                merged.reserve(a.size() + b.size());
                                std::merge(a.begin(), a.end(), b.begin(),
                                           b.end(), std::back_inserter(merged));
                                merged.erase(std::unique(merged.begin(),
                                                         merged.end()),
                                             merged.end());
                                return merged;
                              });
}

}  // namespace

BuildResult build_levels(const LevelParams& params, RunCache* cache, int jobs,
                         const SequenceLimits& limits) {
  validate(params);

  // Per-length budgets must not shrink as targets grow within the sweep.
  params.policy.require_monotone_on(params.c, params.c << (params.depth + 1));

  for (uint64_t i = 0; i <= params.depth; ++i) {
    const uint64_t cutoff = params.g.eval(params.c << i);
    if (cutoff > limits.max_cutoff) {
      const uint64_t estimate = (uint64_t{1} << cutoff) - 1;
      throw InfeasibleError(
          "level " + std::to_string(i) + " would enumerate " +
              std::to_string(estimate) + " programs (g = " +
              std::to_string(cutoff) + "); the configured limit is 2^" +
              std::to_string(limits.max_cutoff),
          estimate);
    }
  }

  BuildResult result;
  std::vector<BitString> parents{BitString{}};  // C(-1) = { empty }
  uint64_t parent_len = 0;

  for (uint64_t i = 0; i <= params.depth; ++i) {
    const uint64_t m_i = params.c << i;
    PrefixLevel level;
    level.i = i;
    level.m_i = m_i;

    const std::vector<BitString> forbidden =
        forbidden_prefixes(params, m_i, parents, parent_len, cache, jobs);
    level.b_size = forbidden.size();

    const uint64_t cutoff = params.g.eval(m_i);
    const uint64_t program_bound =
        cutoff == 0 ? 0 : (uint64_t{1} << cutoff) - 1;
    if (level.b_size > m_i * program_bound) {
      throw std::logic_error("forbidden prefix set exceeds its counting bound");
    }

    // D(i) = extensions of C(i-1) to length m_i, minus B(i).
    const uint64_t ext_bits = m_i - parent_len;
    if (ext_bits > 40) {
      throw InfeasibleError("level " + std::to_string(i) + " has 2^" +
                                std::to_string(ext_bits) +
                                " candidate extensions per parent",
                            uint64_t{1} << 40);
    }
    uint64_t in_candidates = 0;
    for (const BitString& b : forbidden) {
      if (std::binary_search(parents.begin(), parents.end(),
                             b.prefix(parent_len))) {
        ++in_candidates;
      }
    }
    level.d_size = parents.size() * (uint64_t{1} << ext_bits) - in_candidates;

    for (const BitString& parent : parents) {
      uint64_t found = 0;
      for (uint64_t v = 0; v < (uint64_t{1} << ext_bits) && found < 2; ++v) {
        BitString candidate = parent;
        candidate.append(BitString::from_value(v, ext_bits));
        if (std::binary_search(forbidden.begin(), forbidden.end(), candidate)) {
          continue;
        }
        level.c_set.push_back(std::move(candidate));
        ++found;
      }
      if (found < 2) {
        result.bottom = BottomReport{i, parent};
        return result;
      }
    }

    parents = level.c_set;
    parent_len = m_i;
    result.levels.push_back(std::move(level));
  }
  return result;
}

ChoiceSource ChoiceSource::explicit_bits(BitString bits) {
  ChoiceSource s;
  s.kind_ = Kind::kExplicit;
  s.describe_ = "bits:" + bits.to_string();
  s.bits_ = std::move(bits);
  return s;
}

ChoiceSource ChoiceSource::constant(uint8_t bit) {
  ChoiceSource s;
  s.kind_ = Kind::kConstant;
  s.constant_ = bit & 1;
  s.describe_ = s.constant_ ? "const1" : "const0";
  return s;
}

ChoiceSource ChoiceSource::expression(BoundExpr e) {
  ChoiceSource s;
  s.kind_ = Kind::kExpression;
  s.describe_ = "expr:" + e.source();
  s.expr_ = std::move(e);
  return s;
}

ChoiceSource ChoiceSource::parse(const std::string& spec) {
  if (spec == "const0") return constant(0);
  if (spec == "const1") return constant(1);
  if (!spec.empty() &&
      spec.find_first_not_of("01") == std::string::npos) {
    return explicit_bits(BitString::from_string(spec));
  }
  return expression(BoundExpr::parse(spec));
}

uint8_t ChoiceSource::bit(uint64_t i) const {
  switch (kind_) {
    case Kind::kExplicit:
      if (i >= bits_.size()) {
        throw std::out_of_range("choice list has " +
                                std::to_string(bits_.size()) +
                                " bits; level " + std::to_string(i) +
                                " needs one more");
      }
      return bits_[i];
    case Kind::kConstant:
      return constant_;
    case Kind::kExpression:
      return static_cast<uint8_t>(expr_->eval(i) & 1);
  }
  return 0;
}

BitString omega_prefix(const BuildResult& build, const ChoiceSource& choices,
                       uint64_t n) {
  if (n == 0) return {};
  size_t idx = 0;
  while (idx < build.levels.size() && build.levels[idx].m_i < n) ++idx;
  if (idx == build.levels.size()) {
    if (build.bottom) {
      throw std::runtime_error(
          "omega_prefix: construction bottomed out at level " +
          std::to_string(build.bottom->level) + " below parent " +
          build.bottom->parent.display());
    }
    throw std::out_of_range(
        "omega_prefix: n = " + std::to_string(n) +
        " exceeds the deepest built level (m = " +
        std::to_string(build.levels.empty() ? 0 : build.levels.back().m_i) +
        ")");
  }
  uint64_t rank = 0;
  for (size_t j = 0; j <= idx; ++j) rank = rank * 2 + choices.bit(j);
  return build.levels[idx].c_set[rank].prefix(n);
}

bool reconstruct_check(const LevelParams& params, const BitString& choices,
                       uint64_t i, RunCache* cache, int jobs,
                       const SequenceLimits& limits) {
  if (params.depth < i) {
    throw std::invalid_argument("reconstruct_check: build depth below level");
  }
  if (choices.size() < i + 1) {
    throw std::invalid_argument("reconstruct_check: need one choice bit per level");
  }
  const uint64_t m_i = params.c << i;
  const ChoiceSource source = ChoiceSource::explicit_bits(choices);

  const BuildResult original = build_levels(params, cache, jobs, limits);
  if (!original.ok()) return false;
  const BitString expected = omega_prefix(original, source, m_i);

  // Reconstruction route: all that survives is (c, bounds, m_i) and the
  // choice bits; the depth is re-derived from m_i.
  LevelParams replay = params;
  replay.depth = floor_log2(m_i / params.c);
  const BuildResult rebuilt = build_levels(replay, cache, jobs, limits);
  if (!rebuilt.ok()) return false;
  return omega_prefix(rebuilt, source, m_i) == expected;
}

}  // namespace ctlab
