#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace corrsets {

// Runs fn(chunk_index, begin, end) over [0, total) split into fixed-size
// chunks. The chunk layout depends only on `total` and `chunk_size`, never on
// `jobs`, so per-chunk results can be reduced in chunk order to give output
// that is identical for any degree of parallelism. The first exception thrown
// by any chunk is rethrown on the calling thread after all workers stop.
inline void parallel_chunked(long total, long chunk_size, int jobs,
                             const std::function<void(long, long, long)>& fn) {
  const long chunks = (total + chunk_size - 1) / chunk_size;
  if (jobs <= 1 || chunks <= 1) {
    for (long c = 0; c < chunks; ++c)
      fn(c, c * chunk_size, std::min(total, (c + 1) * chunk_size));
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (long c = next.fetch_add(1); c < chunks; c = next.fetch_add(1)) {
      try {
        fn(c, c * chunk_size, std::min(total, (c + 1) * chunk_size));
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(chunks);  // stop handing out work
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int nthreads = static_cast<int>(std::min<long>(jobs, chunks));
  pool.reserve(nthreads);
  for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace corrsets
