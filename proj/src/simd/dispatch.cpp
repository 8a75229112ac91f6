#include "phasesim/simd/dispatch.hpp"

#include <atomic>
#include <stdexcept>

namespace phasesim::simd {

bool avx2_available() {
#if defined(PHASESIM_HAVE_AVX2)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

const Ops* pick(Mode m) {
    switch (m) {
    case Mode::scalar:
        return &scalar_ops;
    case Mode::avx2:
#if defined(PHASESIM_HAVE_AVX2)
        if (avx2_available()) return &avx2_ops;
#endif
        throw std::runtime_error("AVX2 kernels are not available on this machine");
    case Mode::auto_detect:
    default:
#if defined(PHASESIM_HAVE_AVX2)
        if (avx2_available()) return &avx2_ops;
#endif
        return &scalar_ops;
    }
}

std::atomic<const Ops*> g_ops{nullptr};
std::atomic<Mode> g_mode{Mode::auto_detect};

} // namespace

const Ops& ops() {
    const Ops* p = g_ops.load(std::memory_order_acquire);
    if (!p) {
        p = pick(Mode::auto_detect);
        g_ops.store(p, std::memory_order_release);
    }
    return *p;
}

void set_mode(Mode m) {
    g_ops.store(pick(m), std::memory_order_release);
    g_mode.store(m);
}

Mode mode() { return g_mode.load(); }

std::string active_name() { return ops().name; }

} // namespace phasesim::simd
