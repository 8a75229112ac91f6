#include "phasesim/simd/dispatch.hpp"

#include <cmath>
#include <immintrin.h>

// AVX2 + FMA variants. One __m256d register holds two complex doubles as
// [re0, im0, re1, im1]; complex products use the fmaddsub shuffle pattern.

namespace phasesim::simd {
namespace {

inline __m256d cmul2(__m256d a, __m256d b) {
    const __m256d b_re = _mm256_movedup_pd(b);
    const __m256d b_im = _mm256_permute_pd(b, 0xF);
    const __m256d a_sw = _mm256_permute_pd(a, 0x5);
    const __m256d t = _mm256_mul_pd(a_sw, b_im);
    return _mm256_fmaddsub_pd(a, b_re, t);
}

void butterfly_rows_avx2(cplx* a, cplx* b, cplx w, std::size_t nr) {
    const __m256d wv = _mm256_broadcast_pd(reinterpret_cast<const __m128d*>(&w));
    std::size_t i = 0;
    double* pa = reinterpret_cast<double*>(a);
    double* pb = reinterpret_cast<double*>(b);
    for (; i + 2 <= nr; i += 2) {
        const __m256d av = _mm256_loadu_pd(pa + 2 * i);
        const __m256d bv = _mm256_loadu_pd(pb + 2 * i);
        const __m256d t = cmul2(bv, wv);
        _mm256_storeu_pd(pb + 2 * i, _mm256_sub_pd(av, t));
        _mm256_storeu_pd(pa + 2 * i, _mm256_add_pd(av, t));
    }
    for (; i < nr; ++i) {
        const cplx t = w * b[i];
        b[i] = a[i] - t;
        a[i] += t;
    }
}

void butterfly_line_avx2(cplx* a, cplx* b, const cplx* w, std::size_t nj) {
    std::size_t j = 0;
    double* pa = reinterpret_cast<double*>(a);
    double* pb = reinterpret_cast<double*>(b);
    const double* pw = reinterpret_cast<const double*>(w);
    for (; j + 2 <= nj; j += 2) {
        const __m256d av = _mm256_loadu_pd(pa + 2 * j);
        const __m256d bv = _mm256_loadu_pd(pb + 2 * j);
        const __m256d wv = _mm256_loadu_pd(pw + 2 * j);
        const __m256d t = cmul2(bv, wv);
        _mm256_storeu_pd(pb + 2 * j, _mm256_sub_pd(av, t));
        _mm256_storeu_pd(pa + 2 * j, _mm256_add_pd(av, t));
    }
    for (; j < nj; ++j) {
        const cplx t = w[j] * b[j];
        b[j] = a[j] - t;
        a[j] += t;
    }
}

void scale_avx2(cplx* a, cplx c, std::size_t n) {
    const __m256d cv = _mm256_broadcast_pd(reinterpret_cast<const __m128d*>(&c));
    std::size_t i = 0;
    double* pa = reinterpret_cast<double*>(a);
    for (; i + 2 <= n; i += 2) {
        const __m256d av = _mm256_loadu_pd(pa + 2 * i);
        _mm256_storeu_pd(pa + 2 * i, cmul2(av, cv));
    }
    for (; i < n; ++i) a[i] *= c;
}

void cmul_avx2(cplx* a, const cplx* k, std::size_t n) {
    std::size_t i = 0;
    double* pa = reinterpret_cast<double*>(a);
    const double* pk = reinterpret_cast<const double*>(k);
    for (; i + 2 <= n; i += 2) {
        const __m256d av = _mm256_loadu_pd(pa + 2 * i);
        const __m256d kv = _mm256_loadu_pd(pk + 2 * i);
        _mm256_storeu_pd(pa + 2 * i, cmul2(av, kv));
    }
    for (; i < n; ++i) a[i] *= k[i];
}

// Lane-wise Kahan accumulation; lanes are combined in a fixed order so the
// result is deterministic on a given machine.
struct Kahan4 {
    __m256d s = _mm256_setzero_pd();
    __m256d c = _mm256_setzero_pd();
    inline void add(__m256d v) {
        const __m256d y = _mm256_sub_pd(v, c);
        const __m256d t = _mm256_add_pd(s, y);
        c = _mm256_sub_pd(_mm256_sub_pd(t, s), y);
        s = t;
    }
    double lane(int i) const {
        alignas(32) double out[4];
        _mm256_store_pd(out, s);
        return out[i];
    }
};

double sum_real_avx2(const cplx* a, std::size_t n) {
    Kahan4 acc;
    std::size_t i = 0;
    const double* pa = reinterpret_cast<const double*>(a);
    for (; i + 2 <= n; i += 2) acc.add(_mm256_loadu_pd(pa + 2 * i));
    double s = acc.lane(0) + acc.lane(2);
    for (; i < n; ++i) s += a[i].real();
    return s;
}

double sum_abs2_avx2(const cplx* a, std::size_t n) {
    Kahan4 acc;
    std::size_t i = 0;
    const double* pa = reinterpret_cast<const double*>(a);
    for (; i + 2 <= n; i += 2) {
        const __m256d v = _mm256_loadu_pd(pa + 2 * i);
        acc.add(_mm256_mul_pd(v, v));
    }
    double s = acc.lane(0) + acc.lane(1) + acc.lane(2) + acc.lane(3);
    for (; i < n; ++i) s += a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
    return s;
}

double max_abs_imag_avx2(const cplx* a, std::size_t n) {
    const __m256d signmask = _mm256_set1_pd(-0.0);
    __m256d m = _mm256_setzero_pd();
    std::size_t i = 0;
    const double* pa = reinterpret_cast<const double*>(a);
    for (; i + 2 <= n; i += 2) {
        const __m256d v = _mm256_andnot_pd(signmask, _mm256_loadu_pd(pa + 2 * i));
        m = _mm256_max_pd(m, v);
    }
    alignas(32) double out[4];
    _mm256_store_pd(out, m);
    double mx = std::max(out[1], out[3]); // imaginary lanes
    for (; i < n; ++i) mx = std::max(mx, std::abs(a[i].imag()));
    return mx;
}

double dot_real_avx2(const cplx* a, const double* w, std::size_t n) {
    Kahan4 acc;
    std::size_t i = 0;
    const double* pa = reinterpret_cast<const double*>(a);
    for (; i + 2 <= n; i += 2) {
        const __m256d v = _mm256_loadu_pd(pa + 2 * i);
        const __m256d wv = _mm256_setr_pd(w[i], 0.0, w[i + 1], 0.0);
        acc.add(_mm256_mul_pd(v, wv));
    }
    double s = acc.lane(0) + acc.lane(2);
    for (; i < n; ++i) s += a[i].real() * w[i];
    return s;
}

} // namespace

const Ops avx2_ops = {
    butterfly_rows_avx2, butterfly_line_avx2, scale_avx2, cmul_avx2,
    sum_real_avx2,       sum_abs2_avx2,       max_abs_imag_avx2,
    dot_real_avx2,       "avx2",
};

} // namespace phasesim::simd
