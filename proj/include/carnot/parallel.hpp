#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace carnot {

/// Process-wide cap on worker threads; 0 means hardware concurrency.
void set_max_threads(int threads);
int max_threads();

/// Runs f(chunk) for chunk = 0..chunks-1 on up to max_threads() workers.
/// Chunk c always goes to worker c % workers and callers reduce per-chunk
/// results in chunk order, so output never depends on the thread count.
template <typename F>
void parallel_chunks(int chunks, F&& f) {
  const int workers = std::max(1, std::min(max_threads(), chunks));
  if (workers == 1) {
    for (int c = 0; c < chunks; ++c) f(c);
    return;
  }
  std::vector<std::exception_ptr> errors(chunks);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (int c = w; c < chunks; c += workers) {
        try {
          f(c);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace carnot
