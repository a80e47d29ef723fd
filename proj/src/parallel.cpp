#include "qpdyn/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace qpdyn {

unsigned worker_count() {
  static const unsigned n = [] {
    if (const char* env = std::getenv("QPDYN_THREADS")) {
      const long v = std::strtol(env, nullptr, 10);
      if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1u;
  }();
  return n;
}

void parallel_for_range(std::size_t count,
                        const std::function<void(std::size_t, std::size_t)>& fn) {
  if (count == 0) return;
  const std::size_t workers = std::min<std::size_t>(worker_count(), count);
  if (workers <= 1) {
    fn(0, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace qpdyn
