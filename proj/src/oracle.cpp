#include "ctlab/oracle.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include "ctlab/parallel.hpp"

namespace ctlab {

namespace {

constexpr uint64_t kChunk = 4096;

// Number of programs of length <= len: 2^(len+1) - 1, the index range of
// the length-increasing lexicographic enumeration.
uint64_t programs_up_to(uint64_t len) {
  return (uint64_t{1} << (len + 1)) - 1;
}

void check_exact_feasible(const BitString& x, const OracleLimits& limits) {
  if (x.size() > limits.max_exact_len) {
    throw InfeasibleError(
        "exact complexity needs all " +
            std::to_string(programs_up_to(x.size() + 1)) +
            " programs of length <= " + std::to_string(x.size() + 1) +
            " enumerated; the configured limit is |x| <= " +
            std::to_string(limits.max_exact_len),
        programs_up_to(x.size() + 1));
  }
}

// Shortest program of length <= |x|+1 that halts with output x under the
// given budget; the minimum is over enumeration indexes, so ties break to
// the lexicographically first witness.
Certificate exact_search(const BitString& x, const BitString& y,
                         ResourceBudget budget, RunCache* cache, int jobs) {
  const uint64_t count = programs_up_to(x.size() + 1);
  const uint64_t kMiss = UINT64_MAX;
  auto map_chunk = [&](uint64_t lo, uint64_t hi) -> uint64_t {
    for (uint64_t i = lo; i < hi; ++i) {
      const Program p = nat_to_string(i);
      const ExecResult r = cached_run(cache, p, y, budget);
      if (r.halted() && r.output == x) return i;
    }
    return kMiss;
  };
  const uint64_t best = parallel_reduce<uint64_t>(
      0, count, jobs, kChunk, kMiss, map_chunk,
      [](uint64_t a, uint64_t b) { return std::min(a, b); });

  if (best == kMiss) {
    return Certificate{CtValue::inf(), std::nullopt, budget};
  }
  Program witness = nat_to_string(best);
  const uint64_t len = witness.size();
  return Certificate{CtValue::finite(len), std::move(witness), budget};
}

}  // namespace

nlohmann::json CtValue::to_json() const {
  if (infinite) return "inf";
  return v;
}

std::string CtValue::to_string() const {
  return infinite ? "inf" : std::to_string(v);
}

std::string reduced_fraction(uint64_t num, uint64_t den) {
  const uint64_t g = std::gcd(num, den);
  if (g == 0) return "0/1";
  return std::to_string(num / g) + "/" + std::to_string(den / g);
}

Certificate exact_ct(const BitString& x, const BitString& y,
                     const BudgetPolicy& policy, RunCache* cache, int jobs,
                     const OracleLimits& limits) {
  check_exact_feasible(x, limits);
  return exact_search(x, y, policy.budget_for(x.size()), cache, jobs);
}

UpperOutcome upper_c(const BitString& x, const BitString& y,
                     std::span<const ResourceBudget> schedule, RunCache* cache,
                     int jobs, const OracleLimits& limits) {
  if (schedule.empty()) {
    throw std::invalid_argument("upper_c: empty budget schedule");
  }
  for (size_t i = 1; i < schedule.size(); ++i) {
    if (!schedule[i].covers(schedule[i - 1])) {
      throw std::invalid_argument(
          "upper_c: schedule must be componentwise nondecreasing");
    }
  }

  check_exact_feasible(x, limits);
  UpperOutcome out;
  out.best = Certificate{CtValue::inf(), std::nullopt, schedule.front()};
  for (const ResourceBudget& b : schedule) {
    Certificate c = exact_search(x, y, b, cache, jobs);
    out.stages.emplace_back(b, c.value);
    if (c.value < out.best.value) out.best = std::move(c);
  }
  return out;
}

CensusTable census(uint64_t n, const BudgetPolicy& policy,
                   const std::vector<uint64_t>& k1_set, RunCache* cache,
                   int jobs, const OracleLimits& limits) {
  if (n > limits.max_census_n) {
    throw InfeasibleError(
        "census at n=" + std::to_string(n) + " means " +
            std::to_string(uint64_t{1} << n) + " rows and " +
            std::to_string(programs_up_to(n + 1)) +
            " enumerated programs; the configured limit is n <= " +
            std::to_string(limits.max_census_n),
        programs_up_to(n + 1));
  }

  const BitString y = nat_to_string(n);
  const ResourceBudget budget = policy.budget_for(n);
  const uint64_t rows = uint64_t{1} << n;
  const uint64_t count = programs_up_to(n + 1);
  const uint64_t kMiss = UINT64_MAX;

  // One sweep over the whole program range; per string of length n keep the
  // first (lowest-index) producer, which is exactly the exact_ct witness.
  using Best = std::vector<uint64_t>;
  auto map_chunk = [&](uint64_t lo, uint64_t hi) -> Best {
    Best local(rows, kMiss);
    for (uint64_t i = lo; i < hi; ++i) {
      const Program p = nat_to_string(i);
      const ExecResult r = cached_run(cache, p, y, budget);
      if (r.halted() && r.output.size() == n) {
        uint64_t& slot = local[r.output.value()];
        if (i < slot) slot = i;
      }
    }
    return local;
  };
  Best best = parallel_reduce<Best>(
      0, count, jobs, kChunk, Best(rows, kMiss), map_chunk,
      [](Best a, Best b) {
        for (size_t i = 0; i < a.size(); ++i) a[i] = std::min(a[i], b[i]);
        return a;
      });

  CensusTable table;
  table.n = n;
  table.bound_source = policy.cell_bound ? policy.cell_bound->source()
                                         : policy.step_bound->source();
  table.rows.reserve(rows);
  for (uint64_t v = 0; v < rows; ++v) {
    CensusRow row;
    row.x = BitString::from_value(v, n);
    if (best[v] == kMiss) {
      row.value = CtValue::inf();
      ++table.infinite_count;
    } else {
      row.witness = nat_to_string(best[v]);
      row.value = CtValue::finite(row.witness->size());
      ++table.histogram[row.value.v];
    }
    table.rows.push_back(std::move(row));
  }

  for (uint64_t k1 : k1_set) {
    CensusThreshold th;
    th.k1 = k1;
    th.threshold = n > k1 ? n - k1 : 0;
    for (const CensusRow& row : table.rows) {
      if (row.value >= CtValue::finite(th.threshold)) ++th.count;
    }
    th.fraction = reduced_fraction(th.count, rows);
    table.thresholds.push_back(th);
  }
  return table;
}

nlohmann::json CensusTable::to_json() const {
  nlohmann::json j;
  j["n"] = n;
  j["bound"] = bound_source;
  nlohmann::json jrows = nlohmann::json::array();
  for (const CensusRow& row : rows) {
    nlohmann::json r;
    r["x"] = row.x.to_string();
    r["value"] = row.value.to_json();
    r["witness"] = row.witness ? nlohmann::json(row.witness->to_string())
                               : nlohmann::json(nullptr);
    jrows.push_back(std::move(r));
  }
  j["rows"] = std::move(jrows);
  nlohmann::json hist;
  for (const auto& [value, cnt] : histogram) hist[std::to_string(value)] = cnt;
  if (infinite_count > 0) hist["inf"] = infinite_count;
  j["histogram"] = std::move(hist);
  nlohmann::json ths = nlohmann::json::array();
  for (const CensusThreshold& th : thresholds) {
    ths.push_back({{"k1", th.k1},
                   {"threshold", th.threshold},
                   {"count", th.count},
                   {"fraction", th.fraction}});
  }
  j["thresholds"] = std::move(ths);
  return j;
}

void CensusTable::to_csv(std::ostream& out) const {
  out << "x,ct_value,witness\n";
  for (const CensusRow& row : rows) {
    out << row.x.to_string() << ',' << row.value.to_string() << ','
        << (row.witness ? row.witness->to_string() : "") << '\n';
  }
}

bool certificate_replays(const Certificate& cert, const BitString& x,
                         const BitString& y) {
  if (cert.value.infinite) return !cert.witness.has_value();
  if (!cert.witness) return false;
  if (cert.witness->size() != cert.value.v) return false;
  const ExecResult r = run(*cert.witness, y, cert.budget_used);
  return r.halted() && r.output == x;
}

}  // namespace ctlab
