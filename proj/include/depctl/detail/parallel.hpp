#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace depctl {

template <class Body>
void parallel_for(long count, unsigned threads, Body body) {
  if (count <= 0) return;
  unsigned workers = threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<long>(workers, count));
  if (workers <= 1) {
    for (long r = 0; r < count; ++r) body(r);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const long block = (count + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const long begin = w * block;
    const long end = std::min(count, begin + block);
    pool.emplace_back([&, w, begin, end] {
      try {
        for (long r = begin; r < end; ++r) body(r);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace depctl
