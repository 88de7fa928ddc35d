#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "ctlab/bits.hpp"
#include "ctlab/machine.hpp"

namespace ctlab {

struct CacheCorruption : std::runtime_error {
  explicit CacheCorruption(const std::string& what) : std::runtime_error(what) {}
};

// Append-only memo of machine runs keyed by (program, condition, budget).
// Determinism of the machine makes records immutable ground truth, so
// duplicate keys must agree and merging is order-independent.
//
// File layout: one canonical JSON record per line in shard-<id>.jsonl files
// under the cache directory. Each process appends to its own shard; readers
// load every shard. merge_shards() compacts a directory.
class RunCache {
 public:
  RunCache() = default;                                   // in-memory only
  explicit RunCache(const std::filesystem::path& dir);    // file-backed

  // Exact-key hit, or a subsuming record: a halted run within the requested
  // budget, or an exhausted run at a budget at least as generous (counters
  // capped to the request).
  std::optional<ExecResult> lookup(const Program& p, const BitString& y,
                                   ResourceBudget budget) const;

  // result must come from machine::run under exactly this budget.
  // Re-storing an identical record is a no-op; a conflicting record for an
  // existing key reports corruption.
  void store(const Program& p, const BitString& y, ResourceBudget budget,
             const ExecResult& result);

  void flush();

  uint64_t lookups() const { return lookups_.load(); }
  uint64_t hits() const { return hits_.load(); }
  size_t size() const;

 private:
  struct Key {
    std::string p, y;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    size_t operator()(const Key& k) const;
  };
  struct Entry {
    ResourceBudget budget;
    ExecResult result;
  };

  void insert_locked(const Program& p, const BitString& y,
                     ResourceBudget budget, const ExecResult& result,
                     bool write_line);

  mutable std::shared_mutex mu_;
  std::unordered_map<Key, std::vector<Entry>, KeyHash> map_;
  std::ofstream shard_;
  mutable std::atomic<uint64_t> lookups_{0};
  mutable std::atomic<uint64_t> hits_{0};
};

// Runs through the cache when one is given; otherwise a direct machine run.
ExecResult cached_run(RunCache* cache, const Program& p, const BitString& y,
                      ResourceBudget budget);

struct MergeStats {
  uint64_t shards_in = 0;
  uint64_t records_in = 0;
  uint64_t records_out = 0;
  uint64_t duplicates = 0;
};

// Compacts every shard-*.jsonl in dir into one sorted shard-merged.jsonl.
// Identical duplicate records collapse; conflicting records for one key
// raise CacheCorruption.
MergeStats merge_shards(const std::filesystem::path& dir);

}  // namespace ctlab
