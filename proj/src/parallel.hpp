#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rbcast::detail {

/// Calls fn(i) for i in [0, count) on up to `jobs` threads. Indices are claimed
/// dynamically; callers write results by index so output never depends on timing.
template <typename Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn)
{
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i)
      fn(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= count)
        return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock{failure_mutex};
        if (!failure)
          failure = std::current_exception();
        next.store(count);
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back(work);
  for (auto& th : pool)
    th.join();
  if (failure)
    std::rethrow_exception(failure);
}

} // namespace rbcast::detail
