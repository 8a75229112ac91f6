#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace phasesim::fft {

using cplx = std::complex<double>;

/// Radix-2 plan for power-of-two length n: bit-reversal permutation plus
/// per-stage twiddle tables for both transform directions. Unnormalized;
/// sign -1 applies the analysis kernel e^{-2*pi*i*j*k/n}, sign +1 the
/// synthesis kernel e^{+2*pi*i*j*k/n}.
class Plan {
public:
    explicit Plan(std::size_t n);

    std::size_t size() const { return n_; }

    /// Transform `count` independent contiguous lines of length n starting at
    /// data, data+n, ... Butterfly loops are unit-stride within each line.
    void lines(cplx* data, std::size_t count, int sign) const;

    /// Transform along the middle axis of a [before][n][after] block
    /// (elements of one logical line are `after` apart). Butterflies are
    /// unit-stride across the `after` lanes.
    void strided(cplx* data, std::size_t before, std::size_t after, int sign) const;

    /// Same as strided for a single [n][after] block, restricted to the
    /// lane range [lane_begin, lane_end); lanes are independent.
    void strided_lanes(cplx* block, std::size_t after, std::size_t lane_begin,
                       std::size_t lane_end, int sign) const;

private:
    void line_inplace(cplx* line, int sign) const;

    std::size_t n_;
    std::size_t log2n_;
    std::vector<std::size_t> bitrev_;              // in-place swap pairs, i < bitrev_[i]
    std::vector<std::vector<cplx>> tw_fwd_;        // per stage, analysis twiddles
    std::vector<std::vector<cplx>> tw_inv_;        // per stage, synthesis twiddles
};

/// Shared plan cache (thread-safe).
const Plan& plan_for(std::size_t n);

} // namespace phasesim::fft
