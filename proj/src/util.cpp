#include "phasesim/util.hpp"

#include <cstdlib>
#include <thread>
#include <vector>

namespace phasesim::util {

std::size_t thread_count() {
    static const std::size_t n = [] {
        const char* env = std::getenv("PHASESIM_THREADS");
        if (!env) return std::size_t{1};
        const long v = std::strtol(env, nullptr, 10);
        if (v < 1) return std::size_t{1};
        return static_cast<std::size_t>(v);
    }();
    return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    const std::size_t nt = std::min(thread_count(), n == 0 ? std::size_t{1} : n);
    if (nt <= 1 || n == 0) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(nt);
    const std::size_t chunk = (n + nt - 1) / nt;
    for (std::size_t t = 0; t < nt; ++t) {
        const std::size_t b = t * chunk;
        const std::size_t e = std::min(n, b + chunk);
        if (b >= e) break;
        workers.emplace_back([&, b, e] { fn(b, e); });
    }
    for (auto& w : workers) w.join();
}

} // namespace phasesim::util
