#include "carnot/parallel.hpp"

#include <atomic>

namespace carnot {

namespace {
std::atomic<int> g_max_threads{0};
}

void set_max_threads(int threads) { g_max_threads = std::max(0, threads); }

int max_threads() {
  const int cap = g_max_threads.load();
  if (cap > 0) return cap;
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace carnot
