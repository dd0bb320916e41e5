#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

namespace gradwave::cli {

/// Runs fn(i) for i in [0, count) on up to `jobs` threads and returns the results in index
/// order, so any reduction over them is independent of scheduling. The first exception
/// by index is rethrown after the workers stop.
template <class Fn>
auto parallel_map(int count, int jobs, Fn fn) -> std::vector<decltype(fn(0))> {
  using R = decltype(fn(0));
  std::vector<std::optional<R>> slots(static_cast<std::size_t>(count));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      if (failed) break;
      try {
        slots[static_cast<std::size_t>(i)].emplace(fn(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
        failed = true;
      }
    }
  };
  const int n_threads = std::max(1, std::min(jobs, count));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<R> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace gradwave::cli
