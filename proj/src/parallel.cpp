#include "mvlstm/parallel.hpp"

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace mvlstm {

std::size_t resolve_threads(std::size_t requested) {
  if (requested == 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
  }
  return requested;
}

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn) {
  threads = std::min(resolve_threads(threads), count);
  if (count == 0) return;
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }

  const std::size_t chunk = (count + threads - 1) / threads;
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(threads);
  workers.reserve(threads - 1);

  auto run_chunk = [&](std::size_t w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(count, lo + chunk);
    try {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };

  for (std::size_t w = 1; w < threads; ++w) workers.emplace_back(run_chunk, w);
  run_chunk(0);
  for (auto& t : workers) t.join();

  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace mvlstm
