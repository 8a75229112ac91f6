#include "phasesim/simd/dispatch.hpp"

#include <cmath>

namespace phasesim::simd {
namespace {

void butterfly_rows_scalar(cplx* a, cplx* b, cplx w, std::size_t nr) {
    for (std::size_t i = 0; i < nr; ++i) {
        const cplx t = w * b[i];
        b[i] = a[i] - t;
        a[i] += t;
    }
}

void butterfly_line_scalar(cplx* a, cplx* b, const cplx* w, std::size_t nj) {
    for (std::size_t j = 0; j < nj; ++j) {
        const cplx t = w[j] * b[j];
        b[j] = a[j] - t;
        a[j] += t;
    }
}

void scale_scalar(cplx* a, cplx c, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) a[i] *= c;
}

void cmul_scalar(cplx* a, const cplx* k, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) a[i] *= k[i];
}

double sum_real_scalar(const cplx* a, std::size_t n) {
    double s = 0.0, c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double y = a[i].real() - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

double sum_abs2_scalar(const cplx* a, std::size_t n) {
    double s = 0.0, c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
        const double y = v - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

double max_abs_imag_scalar(const cplx* a, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(a[i].imag()));
    return m;
}

double dot_real_scalar(const cplx* a, const double* w, std::size_t n) {
    double s = 0.0, c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double y = a[i].real() * w[i] - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

} // namespace

const Ops scalar_ops = {
    butterfly_rows_scalar, butterfly_line_scalar, scale_scalar, cmul_scalar,
    sum_real_scalar,       sum_abs2_scalar,       max_abs_imag_scalar,
    dot_real_scalar,       "scalar",
};

} // namespace phasesim::simd
