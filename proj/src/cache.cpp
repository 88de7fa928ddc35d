#include "ctlab/cache.hpp"

#include <algorithm>
#include <atomic>
#include <map>

#include "json.hpp"

namespace ctlab {

namespace {

using nlohmann::json;

json budget_json(uint64_t v) {
  return v == kUnbounded ? json(nullptr) : json(v);
}

uint64_t budget_from_json(const json& j) {
  return j.is_null() ? kUnbounded : j.get<uint64_t>();
}

std::string record_line(const std::string& p, const std::string& y,
                        ResourceBudget budget, const ExecResult& r) {
  json j;
  j["p"] = p;
  j["y"] = y;
  j["steps"] = budget_json(budget.max_steps);
  j["cells"] = budget_json(budget.max_cells);
  j["st"] = r.halted() ? "H" : "X";
  if (r.halted()) j["out"] = r.output.to_string();
  j["su"] = r.steps_used;
  j["cu"] = r.cells_used;
  return j.dump();
}

struct ParsedRecord {
  std::string p, y;
  ResourceBudget budget;
  ExecResult result;
};

ParsedRecord parse_line(const std::string& line, const std::string& where) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw CacheCorruption(where + ": bad JSON record: " + e.what());
  }
  try {
    ParsedRecord rec;
    rec.p = j.at("p").get<std::string>();
    rec.y = j.at("y").get<std::string>();
    rec.budget.max_steps = budget_from_json(j.at("steps"));
    rec.budget.max_cells = budget_from_json(j.at("cells"));
    const std::string st = j.at("st").get<std::string>();
    rec.result.status =
        st == "H" ? RunStatus::kHalted : RunStatus::kBudgetExceeded;
    if (rec.result.halted()) {
      rec.result.output = BitString::from_string(j.at("out").get<std::string>());
    }
    rec.result.steps_used = j.at("su").get<uint64_t>();
    rec.result.cells_used = j.at("cu").get<uint64_t>();
    return rec;
  } catch (const json::exception& e) {
    throw CacheCorruption(where + ": incomplete record: " + e.what());
  }
}

bool is_shard_file(const std::filesystem::path& p) {
  const std::string name = p.filename().string();
  return name.starts_with("shard-") && name.ends_with(".jsonl");
}

}  // namespace

size_t RunCache::KeyHash::operator()(const Key& k) const {
  const std::hash<std::string> h;
  return h(k.p) * 1099511628211ull ^ h(k.y);
}

RunCache::RunCache(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> shards;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && is_shard_file(e.path())) {
      shards.push_back(e.path());
    }
  }
  std::sort(shards.begin(), shards.end());
  for (const auto& path : shards) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cache: cannot open " + path.string());
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      auto rec = parse_line(line, path.string() + ":" + std::to_string(lineno));
      insert_locked(BitString::from_string(rec.p), BitString::from_string(rec.y),
                    rec.budget, rec.result, /*write_line=*/false);
    }
  }

  // Private shard for this process; the counter suffix keeps reopened
  // directories from colliding.
  static std::atomic<uint64_t> counter{0};
  const auto id = std::to_string(
      std::chrono::steady_clock::now().time_since_epoch().count() +
      counter.fetch_add(1));
  shard_.open(dir / ("shard-" + id + ".jsonl"), std::ios::app);
  if (!shard_) {
    throw std::runtime_error("cache: cannot open shard for append in " +
                             dir.string());
  }
}

std::optional<ExecResult> RunCache::lookup(const Program& p, const BitString& y,
                                           ResourceBudget budget) const {
  lookups_.fetch_add(1, std::memory_order_relaxed);
  std::shared_lock lock(mu_);
  auto it = map_.find(Key{p.to_string(), y.to_string()});
  if (it == map_.end()) return std::nullopt;
  const Entry* subsuming = nullptr;
  for (const Entry& e : it->second) {
    if (e.budget == budget) {
      hits_.fetch_add(1, std::memory_order_relaxed);
      return e.result;
    }
    if (subsuming) continue;
    if (e.result.halted()) {
      if (e.result.steps_used <= budget.max_steps &&
          e.result.cells_used <= budget.max_cells) {
        subsuming = &e;
      }
    } else if (e.budget.covers(budget)) {
      subsuming = &e;
    }
  }
  if (!subsuming) return std::nullopt;
  hits_.fetch_add(1, std::memory_order_relaxed);
  ExecResult r = subsuming->result;
  if (!r.halted()) {
    // The exhausted run proves exhaustion at any smaller budget; counters
    // are capped to what the requested budget could have consumed.
    r.steps_used = std::min(r.steps_used, budget.max_steps);
    r.cells_used = std::min(r.cells_used, budget.max_cells);
  }
  return r;
}

void RunCache::store(const Program& p, const BitString& y,
                     ResourceBudget budget, const ExecResult& result) {
  std::unique_lock lock(mu_);
  insert_locked(p, y, budget, result, /*write_line=*/true);
}

void RunCache::insert_locked(const Program& p, const BitString& y,
                             ResourceBudget budget, const ExecResult& result,
                             bool write_line) {
  auto& entries = map_[Key{p.to_string(), y.to_string()}];
  for (const Entry& e : entries) {
    if (e.budget == budget) {
      if (e.result != result) {
        throw CacheCorruption("conflicting results for p=" + p.to_string() +
                              " y=" + y.to_string());
      }
      return;  // idempotent re-store
    }
  }
  entries.push_back(Entry{budget, result});
  if (write_line && shard_.is_open()) {
    shard_ << record_line(p.to_string(), y.to_string(), budget, result) << '\n';
  }
}

void RunCache::flush() {
  std::unique_lock lock(mu_);
  if (shard_.is_open()) shard_.flush();
}

size_t RunCache::size() const {
  std::shared_lock lock(mu_);
  size_t n = 0;
  for (const auto& [k, v] : map_) n += v.size();
  return n;
}

ExecResult cached_run(RunCache* cache, const Program& p, const BitString& y,
                      ResourceBudget budget) {
  if (cache) {
    if (auto hit = cache->lookup(p, y, budget)) return *hit;
    ExecResult r = run(p, y, budget);
    cache->store(p, y, budget, r);
    return r;
  }
  return run(p, y, budget);
}

MergeStats merge_shards(const std::filesystem::path& dir) {
  MergeStats stats;
  std::vector<std::filesystem::path> shards;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && is_shard_file(e.path())) {
      shards.push_back(e.path());
    }
  }
  std::sort(shards.begin(), shards.end());

  // key line -> full line; a std::map keeps the output sorted and canonical
  // regardless of shard order.
  std::map<std::string, std::string> records;
  for (const auto& path : shards) {
    ++stats.shards_in;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("merge: cannot open " + path.string());
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const std::string where = path.string() + ":" + std::to_string(lineno);
      auto rec = parse_line(line, where);
      ++stats.records_in;
      const std::string canonical =
          record_line(rec.p, rec.y, rec.budget, rec.result);
      json key;
      key["p"] = rec.p;
      key["y"] = rec.y;
      key["steps"] = budget_json(rec.budget.max_steps);
      key["cells"] = budget_json(rec.budget.max_cells);
      auto [it, inserted] = records.emplace(key.dump(), canonical);
      if (!inserted) {
        ++stats.duplicates;
        if (it->second != canonical) {
          throw CacheCorruption(where + ": conflicting duplicate record");
        }
      }
    }
  }

  const auto out_path = dir / "shard-merged.jsonl";
  const auto tmp_path = dir / "shard-merged.jsonl.tmp";
  {
    std::ofstream out(tmp_path, std::ios::trunc);
    if (!out) throw std::runtime_error("merge: cannot write " + tmp_path.string());
    for (const auto& [k, line] : records) out << line << '\n';
  }
  for (const auto& path : shards) std::filesystem::remove(path);
  std::filesystem::rename(tmp_path, out_path);
  stats.records_out = records.size();
  return stats;
}

}  // namespace ctlab
