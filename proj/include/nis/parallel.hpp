#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <utility>
#include <vector>

namespace nis {

/// `requested` if positive, otherwise the machine's hardware concurrency.
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(i) for i in [0, count) over contiguous blocks, one block per
/// thread. Results must be written to per-index slots; the caller folds them
/// in index order, so output does not depend on the thread count. If any call
/// throws, the exception of the smallest failing index is rethrown together
/// with that index via on_error(index, exception_ptr).
template <typename Fn, typename OnError>
void parallel_for(std::size_t count, int threads, Fn&& fn, OnError&& on_error) {
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(resolve_threads(threads)));
  if (count == 0) return;
  std::vector<std::pair<std::size_t, std::exception_ptr>> failures(workers, {count, nullptr});
  auto run_block = [&](std::size_t w) {
    const std::size_t begin = count * w / workers;
    const std::size_t end = count * (w + 1) / workers;
    for (std::size_t i = begin; i < end; ++i) {
      try {
        fn(i);
      } catch (...) {
        failures[w] = {i, std::current_exception()};
        return;
      }
    }
  };
  if (workers == 1) {
    run_block(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run_block, w);
  }
  for (const auto& [index, error] : failures) {
    if (error) {
      on_error(index, error);
      return;
    }
  }
}

}  // namespace nis
