#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace talus {

// Run fn(shard) for shard = 0..shards-1 across hardware threads. Callers
// derive per-shard RNG streams (rng.fork(shard)) so results are independent
// of the thread schedule.
inline void run_sharded(int shards, const std::function<void(int)>& fn) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 4;
  int workers = int(hw) < shards ? int(hw) : shards;
  if (workers <= 1) {
    for (int s = 0; s < shards; ++s) fn(s);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(size_t(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int s = w; s < shards; s += workers) fn(s);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace talus
