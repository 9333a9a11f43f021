#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace fabsel {

/// Runs fn(i) for i in [0, n) on at most `cap` threads. After the first failure no new indices
/// are started. Returns one exception slot per index (null on success or when never started)
/// plus whether every index ran. Callers store results by index, so the outcome does not depend
/// on completion order.
struct ParallelRun {
  std::vector<std::exception_ptr> errors;
  std::vector<bool> completed;

  bool ok() const {
    return std::all_of(completed.begin(), completed.end(), [](bool b) { return b; });
  }
  std::exception_ptr first_error() const {
    for (const auto& e : errors)
      if (e) return e;
    return nullptr;
  }
};

template <typename Fn>
ParallelRun parallel_for(std::size_t n, std::size_t cap, Fn&& fn) {
  ParallelRun run{std::vector<std::exception_ptr>(n), std::vector<bool>(n, false)};
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::vector<char> done(n, 0);

  auto worker = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
        done[i] = 1;
      } catch (...) {
        run.errors[i] = std::current_exception();
        failed.store(true);
      }
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(cap, 1, std::max<std::size_t>(n, 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (std::size_t i = 0; i < n; ++i) run.completed[i] = done[i] != 0;
  return run;
}

}  // namespace fabsel
