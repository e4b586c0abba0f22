#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace dios {

/// Worker count: DIOS_THREADS env var if set, else hardware concurrency.
inline int default_thread_count() {
  if (const char* env = std::getenv("DIOS_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v > 64 ? 64 : v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : int(hw > 8 ? 8 : hw);
}

/// Index-ordered parallel map. Each slot is written exactly once by the
/// worker that claims its index, so downstream reductions see the same
/// sequence regardless of thread count or scheduling.
template <class R>
std::vector<R> parallel_map(int count, int threads,
                            const std::function<R(int)>& fn) {
  std::vector<R> out(count);
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<int> cursor{0};
  auto worker = [&] {
    for (;;) {
      int i = cursor.fetch_add(1);
      if (i >= count) return;
      out[i] = fn(i);
    }
  };
  int nw = threads < count ? threads : count;
  std::vector<std::thread> pool;
  pool.reserve(nw);
  for (int i = 0; i < nw; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace dios
