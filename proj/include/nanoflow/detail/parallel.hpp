#pragma once

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace nanoflow::benchmark {

template <typename F>
void parallel_for(std::size_t n, int workers, F&& f) {
  const auto threads = static_cast<std::size_t>(std::max(1, workers));
  if (threads == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) f(i);
  };
  std::vector<std::jthread> pool;
  pool.reserve(std::min(threads, n));
  for (std::size_t t = 0; t < std::min(threads, n); ++t) pool.emplace_back(body);
}

}  // namespace nanoflow::benchmark
