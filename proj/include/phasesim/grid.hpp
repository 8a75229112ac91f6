#pragma once

#include "phasesim/errors.hpp"

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

namespace phasesim {

using cplx = std::complex<double>;

enum class AxisLabel { x, p, omega };
enum class Rep { direct, conjugate };

const char* to_string(AxisLabel l);
AxisLabel axis_label_from(const std::string& s);
/// Conjugate-variable name of the paired axis: x->lambda, p->theta, omega->tau.
const char* conjugate_name(AxisLabel l);

/// One discretized direct axis. Samples are u_i = min + i*spacing with
/// spacing (max-min)/n; max is excluded (periodic wrap point).
struct Axis {
    AxisLabel label;
    std::size_t n = 0;
    double min = 0.0;
    double max = 0.0;

    double spacing() const { return (max - min) / double(n); }
    double value(std::size_t i) const { return min + double(i) * spacing(); }
    /// Spacing on the conjugate ladder, 2*pi/(n*spacing).
    double conj_spacing() const;
    /// Conjugate value at FFT storage index k (0, 1, ..., n/2-1, -n/2, ..., -1).
    double freq_fft(std::size_t k) const;
};

/// The conjugate ladder of an Axis as exposed to callers: the centered
/// frequency ladder (-n/2 .. n/2-1) * conj_spacing, 0 included exactly once.
struct ConjugateAxis {
    std::string label; // lambda | theta | tau
    std::size_t n = 0;
    std::vector<double> samples;
};

struct AxisSpec {
    AxisLabel label;
    std::size_t n;
    double min;
    double max;
};

/// Discretized phase-space grid: ordered direct axes plus the action
/// constant hbar shared by all spectral kernels built on it.
class PhaseGrid {
public:
    PhaseGrid() = default;
    PhaseGrid(std::vector<Axis> axes, double hbar);

    const std::vector<Axis>& axes() const { return axes_; }
    double hbar() const { return hbar_; }
    std::size_t rank() const { return axes_.size(); }
    std::size_t size() const; // product of axis counts
    bool has(AxisLabel l) const;
    std::size_t axis_index(AxisLabel l) const; // throws if absent
    const Axis& axis(AxisLabel l) const { return axes_[axis_index(l)]; }
    double cell_volume() const;
    ConjugateAxis conjugate(AxisLabel l) const;

    bool operator==(const PhaseGrid& other) const;
    /// Stable content key used for kernel caching.
    std::string cache_key() const;

private:
    std::vector<Axis> axes_;
    double hbar_ = 1.0;
};

PhaseGrid make_grid(const std::vector<AxisSpec>& specs, double hbar);

/// Complex samples over a PhaseGrid with a per-axis representation tag.
/// Data is row-major in declared axis order; conjugate axes are stored in
/// FFT ladder order (the exposed ConjugateAxis reports centered samples).
struct Field {
    PhaseGrid grid;
    std::vector<Rep> reps;
    std::vector<cplx> data;

    static Field zeros(const PhaseGrid& g);
    static Field zeros_like(const Field& f);

    bool all_direct() const;
    Rep rep(AxisLabel l) const { return reps[grid.axis_index(l)]; }
    std::size_t stride(std::size_t axis_idx) const;
    std::size_t size() const { return data.size(); }
};

enum class Direction { to_conjugate, to_direct };

/// Unitary discrete transform along one axis. Analysis kernel e^{-i k u},
/// synthesis e^{+i k u}, 1/sqrt(n) both ways; grid offsets enter through
/// the phase e^{-i k u_min} so spectra of centered states come out centered.
Field transform(const Field& f, AxisLabel axis, Direction dir);

/// -i d/du along a direct axis, computed by transform, multiply by the
/// conjugate ladder value, transform back.
Field spectral_derivative(const Field& f, AxisLabel axis);

} // namespace phasesim
