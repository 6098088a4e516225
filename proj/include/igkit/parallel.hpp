#pragma once

#include <cstddef>
#include <functional>

namespace igkit {

/// Worker cap: hardware concurrency, lowered by the IGKIT_THREADS environment
/// variable. Read once per process.
std::size_t worker_count();

/// Lowers worker_count() on the calling thread while alive.
class ScopedWorkerLimit {
 public:
  explicit ScopedWorkerLimit(std::size_t limit);
  ~ScopedWorkerLimit();
  ScopedWorkerLimit(const ScopedWorkerLimit&) = delete;
  ScopedWorkerLimit& operator=(const ScopedWorkerLimit&) = delete;

 private:
  std::size_t previous_;
};

/// Runs fn(begin, end) over a partition of [0, n) into at most worker_count()
/// contiguous chunks of at least `grain` items. Chunks are disjoint; fn must
/// only write state owned by its range. Runs inline when one worker suffices.
void parallel_for(std::size_t n, std::size_t grain, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace igkit
