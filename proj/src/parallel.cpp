#include "mra/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace mra {

int worker_count() {
  if (const char* env = std::getenv("MRA_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return std::min(n, 256);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_chunks(std::size_t n, int n_chunks,
                     const std::function<void(int, std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  n_chunks = std::max(1, n_chunks);
  if (static_cast<std::size_t>(n_chunks) > n) n_chunks = static_cast<int>(n);
  if (n_chunks == 1) {
    fn(0, 0, n);
    return;
  }
  const std::size_t base = n / n_chunks;
  const std::size_t rem = n % n_chunks;
  std::vector<std::thread> pool;
  pool.reserve(n_chunks);
  std::size_t begin = 0;
  for (int c = 0; c < n_chunks; ++c) {
    const std::size_t len = base + (static_cast<std::size_t>(c) < rem ? 1 : 0);
    const std::size_t end = begin + len;
    pool.emplace_back([&fn, c, begin, end] { fn(c, begin, end); });
    begin = end;
  }
  for (auto& t : pool) t.join();
}

}  // namespace mra
