#ifndef OCD_PARALLEL_H_
#define OCD_PARALLEL_H_

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ocd {

// Number of worker threads used by ParallelFor. 0 means hardware concurrency.
inline std::size_t& ParallelismSetting() {
  static std::size_t threads = 0;
  return threads;
}

inline bool& InsideParallelRegion() {
  thread_local bool inside = false;
  return inside;
}

// Runs body(i) for i in [0, count). Each index must write only to its own
// result slot; the first exception thrown by any index is rethrown. Nested
// calls from a worker run sequentially on that worker.
template <typename Body>
void ParallelFor(std::size_t count, Body&& body) {
  std::size_t workers = ParallelismSetting();
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers <= 1 || InsideParallelRegion()) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        InsideParallelRegion() = true;
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace ocd

#endif  // OCD_PARALLEL_H_
