#include "hmlab/parallel.hpp"

#include <algorithm>

namespace hmlab {

namespace {
int g_workers = 0;
}

int worker_count() {
    if (g_workers > 0) return g_workers;
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

void set_worker_count(int n) { g_workers = n; }

void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& body) {
    if (n <= 0) return;
    std::int64_t chunks = (n + kChunk - 1) / kChunk;
    int workers = std::min<std::int64_t>(worker_count(), chunks);
    if (workers <= 1) {
        for (std::int64_t c = 0; c < chunks; ++c)
            body(c * kChunk, std::min(n, (c + 1) * kChunk));
        return;
    }
    std::atomic<std::int64_t> cursor{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                std::int64_t c = cursor.fetch_add(1);
                if (c >= chunks) return;
                body(c * kChunk, std::min(n, (c + 1) * kChunk));
            }
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace hmlab
