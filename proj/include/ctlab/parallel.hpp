#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

namespace ctlab {

// Chunked map-reduce over an index range with a scheduling-independent
// result: workers claim fixed chunks from an atomic counter, per-chunk
// results land in slots indexed by chunk number, and the fold runs over
// slots in chunk order. Any associative reduce therefore yields the same
// value at every worker count, including the sequential jobs<=1 path.
template <typename R, typename MapFn, typename ReduceFn>
R parallel_reduce(uint64_t begin, uint64_t end, int jobs, uint64_t chunk_size,
                  R init, MapFn&& map_chunk, ReduceFn&& reduce) {
  if (end <= begin) return init;
  if (chunk_size == 0) chunk_size = 1;
  const uint64_t n_chunks = (end - begin + chunk_size - 1) / chunk_size;
  auto chunk_bounds = [&](uint64_t k) {
    uint64_t lo = begin + k * chunk_size;
    uint64_t hi = lo + chunk_size < end ? lo + chunk_size : end;
    return std::pair<uint64_t, uint64_t>{lo, hi};
  };

  if (jobs <= 1 || n_chunks == 1) {
    R acc = std::move(init);
    for (uint64_t k = 0; k < n_chunks; ++k) {
      auto [lo, hi] = chunk_bounds(k);
      acc = reduce(std::move(acc), map_chunk(lo, hi));
    }
    return acc;
  }

  std::vector<std::optional<R>> slots(n_chunks);
  std::atomic<uint64_t> next{0};
  std::exception_ptr first_error;
  std::atomic<bool> failed{false};

  auto worker = [&] {
    for (;;) {
      const uint64_t k = next.fetch_add(1, std::memory_order_relaxed);
      if (k >= n_chunks || failed.load(std::memory_order_relaxed)) return;
      auto [lo, hi] = chunk_bounds(k);
      try {
        slots[k].emplace(map_chunk(lo, hi));
      } catch (...) {
        if (!failed.exchange(true)) first_error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  const uint64_t want = std::min<uint64_t>(static_cast<uint64_t>(jobs), n_chunks);
  pool.reserve(want);
  for (uint64_t i = 0; i < want; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failed.load()) std::rethrow_exception(first_error);

  R acc = std::move(init);
  for (uint64_t k = 0; k < n_chunks; ++k) {
    acc = reduce(std::move(acc), std::move(*slots[k]));
  }
  return acc;
}

}  // namespace ctlab
