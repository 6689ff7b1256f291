#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "adl/linalg.hpp"

namespace adl {

namespace detail {
inline std::atomic<int>& thread_override() {
  static std::atomic<int> v{0};
  return v;
}
}  // namespace detail

/// Worker count: explicit override, else ADL_THREADS, else hardware parallelism.
inline int thread_count() {
  if (int o = detail::thread_override().load(); o > 0) return o;
  if (const char* env = std::getenv("ADL_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Overrides the worker count for this process; 0 restores the default.
inline void set_thread_count(int n) { detail::thread_override().store(n); }

inline bool& in_parallel_region() {
  thread_local bool v = false;
  return v;
}

/// Calls f(i) for i in [0, n) over a static partition. f must only write to
/// slots owned by i, which keeps results independent of the worker count.
/// Nested calls run serially on the calling worker. If several iterations
/// throw, the exception of the lowest index is rethrown.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  const std::size_t workers = in_parallel_region()
                                  ? 1
                                  : std::min<std::size_t>(static_cast<std::size_t>(thread_count()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::exception_ptr err;
  std::size_t err_index = n;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      in_parallel_region() = true;
      for (std::size_t i = w; i < n; i += workers) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lk(err_mu);
          if (i < err_index) {
            err_index = i;
            err = std::current_exception();
          }
          break;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

/// Pairwise summation in a fixed tree order.
inline double tree_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    CompensatedSum s;
    for (double x : v) s.add(x);
    return s.value();
  }
  std::size_t h = v.size() / 2;
  return tree_sum(v.subspan(0, h)) + tree_sum(v.subspan(h));
}

}  // namespace adl
