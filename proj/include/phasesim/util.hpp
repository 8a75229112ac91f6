#pragma once

#include <cstddef>
#include <functional>

namespace phasesim::util {

/// Worker thread count: PHASESIM_THREADS when set and valid, else 1.
std::size_t thread_count();

/// Static partition of [0, n) across the configured threads. fn receives
/// (begin, end); ranges are disjoint so the work stays deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

} // namespace phasesim::util
