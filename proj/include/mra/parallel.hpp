#pragma once

#include <cstddef>
#include <functional>

namespace mra {

// Worker-pool width: MRA_WORKERS env var if set, else hardware concurrency.
int worker_count();

// Runs fn(chunk_index, begin, end) over a fixed partition of [0, n) into
// n_chunks contiguous ranges. The partition depends only on (n, n_chunks),
// so per-chunk partial results combined in chunk order are deterministic
// regardless of scheduling.
void parallel_chunks(std::size_t n, int n_chunks,
                     const std::function<void(int, std::size_t, std::size_t)>& fn);

}  // namespace mra
