#include "phasesim/fft.hpp"

#include "phasesim/errors.hpp"
#include "phasesim/simd/dispatch.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace phasesim::fft {

namespace {
bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }
} // namespace

Plan::Plan(std::size_t n) : n_(n) {
    if (!is_pow2(n)) throw ConfigError("FFT length must be a power of two");
    log2n_ = 0;
    while ((std::size_t{1} << log2n_) < n) ++log2n_;

    bitrev_.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = 0, v = i;
        for (std::size_t b = 0; b < log2n_; ++b) {
            r = (r << 1) | (v & 1);
            v >>= 1;
        }
        bitrev_[i] = r;
    }

    tw_fwd_.resize(log2n_);
    tw_inv_.resize(log2n_);
    for (std::size_t s = 0; s < log2n_; ++s) {
        const std::size_t m = std::size_t{1} << (s + 1);
        const std::size_t half = m / 2;
        tw_fwd_[s].resize(half);
        tw_inv_[s].resize(half);
        for (std::size_t j = 0; j < half; ++j) {
            const double ang = 2.0 * std::numbers::pi * double(j) / double(m);
            tw_fwd_[s][j] = {std::cos(ang), -std::sin(ang)};
            tw_inv_[s][j] = {std::cos(ang), std::sin(ang)};
        }
    }
}

void Plan::line_inplace(cplx* a, int sign) const {
    for (std::size_t i = 0; i < n_; ++i) {
        const std::size_t r = bitrev_[i];
        if (i < r) std::swap(a[i], a[r]);
    }
    const auto& ops = simd::ops();
    const auto& tw = sign < 0 ? tw_fwd_ : tw_inv_;
    for (std::size_t s = 0; s < log2n_; ++s) {
        const std::size_t m = std::size_t{1} << (s + 1);
        const std::size_t half = m / 2;
        for (std::size_t k = 0; k < n_; k += m)
            ops.butterfly_line(a + k, a + k + half, tw[s].data(), half);
    }
}

void Plan::lines(cplx* data, std::size_t count, int sign) const {
    for (std::size_t c = 0; c < count; ++c) line_inplace(data + c * n_, sign);
}

void Plan::strided_lanes(cplx* base, std::size_t after, std::size_t lane_begin,
                         std::size_t lane_end, int sign) const {
    const auto& ops = simd::ops();
    const auto& tw = sign < 0 ? tw_fwd_ : tw_inv_;
    const std::size_t nl = lane_end - lane_begin;
    for (std::size_t i = 0; i < n_; ++i) {
        const std::size_t r = bitrev_[i];
        if (i < r)
            for (std::size_t t = lane_begin; t < lane_end; ++t)
                std::swap(base[i * after + t], base[r * after + t]);
    }
    for (std::size_t s = 0; s < log2n_; ++s) {
        const std::size_t m = std::size_t{1} << (s + 1);
        const std::size_t half = m / 2;
        for (std::size_t k = 0; k < n_; k += m)
            for (std::size_t j = 0; j < half; ++j)
                ops.butterfly_rows(base + (k + j) * after + lane_begin,
                                   base + (k + j + half) * after + lane_begin,
                                   tw[s][j], nl);
    }
}

void Plan::strided(cplx* data, std::size_t before, std::size_t after, int sign) const {
    const std::size_t block = n_ * after;
    for (std::size_t b = 0; b < before; ++b)
        strided_lanes(data + b * block, after, 0, after, sign);
}

const Plan& plan_for(std::size_t n) {
    static std::mutex mu;
    static std::map<std::size_t, Plan> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, Plan(n)).first;
    return it->second;
}

} // namespace phasesim::fft
