#include "convrot/parallel.hpp"

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace convrot {

unsigned thread_count() {
  static const unsigned count = [] {
    const char* env = std::getenv("CONVROT_THREADS");
    if (env == nullptr || *env == '\0') return 1u;
    unsigned long parsed = std::strtoul(env, nullptr, 10);
    if (parsed == 0) {
      unsigned hw = std::thread::hardware_concurrency();
      return hw == 0 ? 1u : hw;
    }
    return static_cast<unsigned>(parsed);
  }();
  return count;
}

void parallel_for(size_t count, const std::function<void(size_t)>& fn) {
  unsigned threads = thread_count();
  if (threads <= 1 || count < 2 * threads) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  size_t chunk = (count + threads - 1) / threads;
  std::vector<std::thread> workers;
  workers.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    size_t begin = t * chunk;
    size_t end = begin + chunk < count ? begin + chunk : count;
    if (begin >= end) break;
    workers.emplace_back([&fn, begin, end] {
      for (size_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& w : workers) w.join();
}

}  // namespace convrot
