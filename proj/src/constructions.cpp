#include "ctlab/constructions.hpp"

#include <algorithm>

#include "ctlab/parallel.hpp"

namespace ctlab {

namespace {

constexpr uint64_t kChunk = 4096;

// Step 1 of the diagonalization: the set B of length-n outputs produced by
// programs shorter than cutoff on condition nat_to_string(n), as sorted
// numeric values of the output strings.
std::vector<uint64_t> forbidden_outputs(const BudgetPolicy& policy, uint64_t n,
                                        uint64_t cutoff, RunCache* cache,
                                        int jobs) {
  if (cutoff == 0) return {};
  const BitString y = nat_to_string(n);
  const ResourceBudget budget = policy.budget_for(n);
  const uint64_t count = (uint64_t{1} << cutoff) - 1;  // all |p| < cutoff

  using Set = std::vector<uint64_t>;
  auto map_chunk = [&](uint64_t lo, uint64_t hi) -> Set {
    Set local;
    for (uint64_t i = lo; i < hi; ++i) {
      const Program p = nat_to_string(i);
      const ExecResult r = cached_run(cache, p, y, budget);
      if (r.halted() && r.output.size() == n) {
        local.push_back(r.output.value());
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

DiagResult diagonalize(const BudgetPolicy& policy, uint64_t n, uint64_t cutoff,
                       uint64_t m, RunCache* cache, int jobs,
                       const DiagLimits& limits) {
  if (n == 0 || n > 63) {
    throw std::invalid_argument("diagonalization needs 1 <= n <= 63");
  }
  if (cutoff > limits.max_cutoff) {
    const uint64_t estimate = (uint64_t{1} << cutoff) - 1;
    throw InfeasibleError(
        "step 1 would enumerate " + std::to_string(estimate) +
            " programs (length < " + std::to_string(cutoff) +
            "); the configured limit is 2^" + std::to_string(limits.max_cutoff),
        estimate);
  }

  const std::vector<uint64_t> forbidden =
      forbidden_outputs(policy, n, cutoff, cache, jobs);

  DiagResult res;
  res.cutoff = cutoff;
  res.forbidden_size = forbidden.size();
  const uint64_t space = uint64_t{1} << n;
  res.candidates_remaining = space - forbidden.size();

  // |B| can never exceed the number of enumerated programs.
  const uint64_t bound = cutoff == 0 ? 0 : (uint64_t{1} << cutoff) - 1;
  if (res.forbidden_size > bound) {
    throw std::logic_error("forbidden set exceeds its counting bound");
  }

  // (m+1)-th value not in the forbidden list: every forbidden value at or
  // below the cursor pushes it one up.
  uint64_t v = m;
  for (uint64_t b : forbidden) {
    if (b <= v) {
      ++v;
    } else {
      break;
    }
  }
  if (v >= space) return res;  // bottom
  res.outcome = BitString::from_value(v, n);
  return res;
}

}  // namespace

DiagResult algorithm_a(const BudgetPolicy& policy, uint64_t n, uint64_t k1,
                       uint64_t m, RunCache* cache, int jobs,
                       const DiagLimits& limits) {
  if (k1 == 0 || k1 >= n) {
    throw std::invalid_argument("algorithm_a needs 0 < k1 < n");
  }
  return diagonalize(policy, n, n - k1, m, cache, jobs, limits);
}

DiagResult algorithm_a_general(const BudgetPolicy& policy, uint64_t n,
                               const BoundExpr& g, uint64_t m, RunCache* cache,
                               int jobs, const DiagLimits& limits) {
  const uint64_t cutoff = g.eval(n);
  if (cutoff > n) {
    throw std::invalid_argument("algorithm_a_general needs g(n) <= n, got " +
                                std::to_string(cutoff));
  }
  return diagonalize(policy, n, cutoff, m, cache, jobs, limits);
}

BitString algorithm_b(uint64_t n, uint64_t m) {
  const BitString w = nat_to_string(m + 1);
  if (w.size() > n) {
    throw std::invalid_argument(
        "algorithm_b: representation of m+1 has " + std::to_string(w.size()) +
        " bits and cannot be padded to length " + std::to_string(n));
  }
  BitString out;
  out.append_zeros(n - w.size());
  out.append(w);
  return out;
}

SampleReport select_random(
    std::span<const BitString> pool, uint64_t a, uint64_t b, BitSource& coin,
    const std::function<bool(const BitString&)>& ground_truth) {
  if (pool.empty()) {
    throw std::invalid_argument("select_random: empty pool");
  }
  SampleReport report;
  const uint64_t start = coin.consumed();
  for (uint64_t round = 0; round < b; ++round) {
    for (uint64_t pick = 0; pick < a; ++pick) {
      uint64_t lo = 0;
      uint64_t size = pool.size();
      while (size > 1) {
        const uint64_t first = (size + 1) / 2;  // odd splits favor the front
        if (coin.next() == 0) {
          size = first;
        } else {
          lo += first;
          size -= first;
        }
      }
      report.chosen.push_back(pool[lo]);
    }
  }
  report.bits_consumed = coin.consumed() - start;
  if (ground_truth) {
    report.success = std::any_of(report.chosen.begin(), report.chosen.end(),
                                 [&](const BitString& s) {
                                   return ground_truth(s);
                                 });
  }
  return report;
}

BitString dilute(const BitString& chi_prefix) {
  BitString out;
  for (size_t i = 1; i <= chi_prefix.size(); ++i) {
    out.push_back(chi_prefix[i - 1]);
    out.append_zeros(size_t{1} << i);
  }
  return out;
}

}  // namespace ctlab
