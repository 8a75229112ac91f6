#pragma once

#include <complex>
#include <cstddef>
#include <string>

namespace phasesim::simd {

using cplx = std::complex<double>;

/// Data-parallel inner loops used by the transforms, kick application and
/// reductions. Each entry has a scalar reference implementation and, on
/// x86-64, an AVX2 variant selected at runtime. The two are equivalence-
/// tested against each other.
struct Ops {
    /// Radix-2 butterfly across `nr` unit-stride lanes with one twiddle:
    /// t = w*b[i]; b[i] = a[i] - t; a[i] = a[i] + t.
    void (*butterfly_rows)(cplx* a, cplx* b, cplx w, std::size_t nr);
    /// Radix-2 butterfly along a contiguous line with per-element twiddles:
    /// t = w[j]*b[j]; b[j] = a[j] - t; a[j] = a[j] + t.
    void (*butterfly_line)(cplx* a, cplx* b, const cplx* w, std::size_t nj);
    /// a[i] *= c
    void (*scale)(cplx* a, cplx c, std::size_t n);
    /// a[i] *= k[i]
    void (*cmul)(cplx* a, const cplx* k, std::size_t n);
    /// sum of real parts (compensated)
    double (*sum_real)(const cplx* a, std::size_t n);
    /// sum of |a[i]|^2 (compensated)
    double (*sum_abs2)(const cplx* a, std::size_t n);
    /// max |Im a[i]|
    double (*max_abs_imag)(const cplx* a, std::size_t n);
    /// sum of Re(a[i]) * w[i] (compensated)
    double (*dot_real)(const cplx* a, const double* w, std::size_t n);
    const char* name;
};

enum class Mode { auto_detect, scalar, avx2 };

/// Currently dispatched kernel table.
const Ops& ops();

/// Force a specific lane (used by the equivalence tests). Throws if the
/// requested lane is unavailable on this machine.
void set_mode(Mode mode);
Mode mode();
std::string active_name();
bool avx2_available();

extern const Ops scalar_ops;
#if defined(PHASESIM_HAVE_AVX2)
extern const Ops avx2_ops;
#endif

} // namespace phasesim::simd
