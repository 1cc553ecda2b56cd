#pragma once

#include <algorithm>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace ofm {

/* Splits [0, n) into contiguous shards and runs fn(shard_index, begin, end) on
 * worker threads.  n_threads <= 1 runs inline.  Shard boundaries depend only
 * on (n, n_threads), so seeded per-shard work stays reproducible for a fixed
 * thread count.  The first exception thrown by any shard is rethrown. */
inline void parallel_shards(int n, int n_threads,
                            const std::function<void(int, int, int)>& fn) {
  if (n <= 0) return;
  int t = std::max(1, std::min(n_threads, n));
  if (t == 1) {
    fn(0, 0, n);
    return;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errs(t);
  int base = n / t, rem = n % t;
  int begin = 0;
  for (int s = 0; s < t; ++s) {
    int len = base + (s < rem ? 1 : 0);
    int end = begin + len;
    workers.emplace_back([&, s, begin, end] {
      try {
        fn(s, begin, end);
      } catch (...) {
        errs[s] = std::current_exception();
      }
    });
    begin = end;
  }
  for (auto& w : workers) w.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

}  // namespace ofm
