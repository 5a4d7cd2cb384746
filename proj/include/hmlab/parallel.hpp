#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace hmlab {

// Worker count for data-parallel loops. 0 = hardware concurrency.
int worker_count();
void set_worker_count(int n);

// Deterministic data-parallel loop: the index space is cut into fixed-size
// chunks independent of the worker count, workers claim chunks from an
// atomic cursor, and any per-chunk output must be written to chunk-indexed
// slots so reductions happen in canonical chunk order.
inline constexpr std::int64_t kChunk = 4096;

void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& body);

} // namespace hmlab
