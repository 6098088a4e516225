#include "igkit/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace igkit {

namespace {
thread_local std::size_t tl_limit = 0;  // 0: no override
}

ScopedWorkerLimit::ScopedWorkerLimit(std::size_t limit) : previous_(tl_limit) { tl_limit = std::max<std::size_t>(1, limit); }
ScopedWorkerLimit::~ScopedWorkerLimit() { tl_limit = previous_; }

std::size_t worker_count() {
  static const std::size_t count = [] {
    std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("IGKIT_THREADS")) {
      try {
        const long cap = std::stol(env);
        if (cap >= 1) hw = std::min<std::size_t>(hw, static_cast<std::size_t>(cap));
      } catch (const std::exception&) {
        // malformed value: keep the hardware default
      }
    }
    return hw;
  }();
  return tl_limit ? std::min(count, tl_limit) : count;
}

void parallel_for(std::size_t n, std::size_t grain, const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  grain = std::max<std::size_t>(grain, 1);
  const std::size_t chunks = std::min(worker_count(), (n + grain - 1) / grain);
  if (chunks <= 1) {
    fn(0, n);
    return;
  }
  const std::size_t step = (n + chunks - 1) / chunks;
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(chunks);
  for (std::size_t t = 1; t < chunks; ++t) {
    const std::size_t b = t * step, e = std::min(n, b + step);
    if (b >= e) break;
    pool.emplace_back([&, t, b, e] {
      try {
        fn(b, e);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  try {
    fn(0, std::min(n, step));
  } catch (...) {
    errors[0] = std::current_exception();
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace igkit
