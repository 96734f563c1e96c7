#include "mrtg/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace mrtg {
namespace {

std::atomic<unsigned> g_override{0};

unsigned default_threads() {
    if (const char* env = std::getenv("MRTG_THREADS"); env != nullptr) {
        try {
            const unsigned long v = std::stoul(env);
            if (v > 0) {
                return static_cast<unsigned>(v);
            }
        } catch (const std::exception&) {
            // fall through to hardware default
        }
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

}  // namespace

unsigned thread_count() {
    const unsigned o = g_override.load();
    return o != 0 ? o : default_threads();
}

void set_thread_count(unsigned n) { g_override.store(n); }

void parallel_for(std::size_t n, std::size_t grain, const std::function<void(std::size_t, std::size_t)>& body) {
    if (n == 0) {
        return;
    }
    grain = std::max<std::size_t>(grain, 1);
    const std::size_t units = (n + grain - 1) / grain;
    const std::size_t workers = std::min<std::size_t>(thread_count(), units);
    if (workers <= 1) {
        body(0, n);
        return;
    }
    const std::size_t per = (units + workers - 1) / workers;
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * per * grain;
        const std::size_t end = std::min(n, (w + 1) * per * grain);
        if (begin >= end) {
            break;
        }
        pool.emplace_back([&body, begin, end] { body(begin, end); });
    }
}

}  // namespace mrtg
