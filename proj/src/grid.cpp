#include "phasesim/grid.hpp"

#include "phasesim/fft.hpp"
#include "phasesim/simd/dispatch.hpp"
#include "phasesim/util.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace phasesim {

namespace {
bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }
} // namespace

const char* to_string(AxisLabel l) {
    switch (l) {
    case AxisLabel::x: return "x";
    case AxisLabel::p: return "p";
    case AxisLabel::omega: return "omega";
    }
    return "?";
}

AxisLabel axis_label_from(const std::string& s) {
    if (s == "x") return AxisLabel::x;
    if (s == "p") return AxisLabel::p;
    if (s == "omega") return AxisLabel::omega;
    throw ConfigError("unknown axis label '" + s + "' (expected x, p or omega)");
}

const char* conjugate_name(AxisLabel l) {
    switch (l) {
    case AxisLabel::x: return "lambda";
    case AxisLabel::p: return "theta";
    case AxisLabel::omega: return "tau";
    }
    return "?";
}

double Axis::conj_spacing() const {
    return 2.0 * std::numbers::pi / (double(n) * spacing());
}

double Axis::freq_fft(std::size_t k) const {
    const double dk = conj_spacing();
    const std::size_t half = n / 2;
    return k < half ? double(k) * dk : (double(k) - double(n)) * dk;
}

PhaseGrid::PhaseGrid(std::vector<Axis> axes, double hbar)
    : axes_(std::move(axes)), hbar_(hbar) {
    if (axes_.empty()) throw ConfigError("grid needs at least one axis");
    if (!(hbar_ > 0.0)) throw ConfigError("hbar must be positive");
    for (const auto& a : axes_) {
        if (!is_pow2(a.n) || a.n < 8)
            throw ConfigError(std::string("axis ") + to_string(a.label) +
                              ": sample count must be a power of two >= 8");
        if (!(a.min < a.max))
            throw ConfigError(std::string("axis ") + to_string(a.label) +
                              ": min must be below max");
    }
    for (std::size_t i = 0; i < axes_.size(); ++i)
        for (std::size_t j = i + 1; j < axes_.size(); ++j)
            if (axes_[i].label == axes_[j].label)
                throw ConfigError("duplicate axis label");
}

std::size_t PhaseGrid::size() const {
    std::size_t s = 1;
    for (const auto& a : axes_) s *= a.n;
    return s;
}

bool PhaseGrid::has(AxisLabel l) const {
    return std::any_of(axes_.begin(), axes_.end(),
                       [&](const Axis& a) { return a.label == l; });
}

std::size_t PhaseGrid::axis_index(AxisLabel l) const {
    for (std::size_t i = 0; i < axes_.size(); ++i)
        if (axes_[i].label == l) return i;
    throw ConfigError(std::string("grid has no ") + to_string(l) + " axis");
}

double PhaseGrid::cell_volume() const {
    double v = 1.0;
    for (const auto& a : axes_) v *= a.spacing();
    return v;
}

ConjugateAxis PhaseGrid::conjugate(AxisLabel l) const {
    const Axis& a = axis(l);
    ConjugateAxis c;
    c.label = conjugate_name(l);
    c.n = a.n;
    c.samples.resize(a.n);
    const double dk = a.conj_spacing();
    for (std::size_t i = 0; i < a.n; ++i)
        c.samples[i] = (double(i) - double(a.n / 2)) * dk;
    return c;
}

bool PhaseGrid::operator==(const PhaseGrid& o) const {
    if (hbar_ != o.hbar_ || axes_.size() != o.axes_.size()) return false;
    for (std::size_t i = 0; i < axes_.size(); ++i) {
        const Axis &a = axes_[i], &b = o.axes_[i];
        if (a.label != b.label || a.n != b.n || a.min != b.min || a.max != b.max)
            return false;
    }
    return true;
}

std::string PhaseGrid::cache_key() const {
    std::ostringstream os;
    os.precision(17);
    os << "hbar=" << hbar_;
    for (const auto& a : axes_)
        os << ";" << to_string(a.label) << "," << a.n << "," << a.min << "," << a.max;
    return os.str();
}

PhaseGrid make_grid(const std::vector<AxisSpec>& specs, double hbar) {
    std::vector<Axis> axes;
    axes.reserve(specs.size());
    for (const auto& s : specs) axes.push_back(Axis{s.label, s.n, s.min, s.max});
    return PhaseGrid(std::move(axes), hbar);
}

Field Field::zeros(const PhaseGrid& g) {
    Field f;
    f.grid = g;
    f.reps.assign(g.rank(), Rep::direct);
    f.data.assign(g.size(), cplx{0.0, 0.0});
    return f;
}

Field Field::zeros_like(const Field& other) {
    Field f;
    f.grid = other.grid;
    f.reps = other.reps;
    f.data.assign(other.data.size(), cplx{0.0, 0.0});
    return f;
}

bool Field::all_direct() const {
    return std::all_of(reps.begin(), reps.end(),
                       [](Rep r) { return r == Rep::direct; });
}

std::size_t Field::stride(std::size_t axis_idx) const {
    std::size_t s = 1;
    for (std::size_t i = axis_idx + 1; i < grid.rank(); ++i) s *= grid.axes()[i].n;
    return s;
}

Field transform(const Field& f, AxisLabel label, Direction dir) {
    const std::size_t j = f.grid.axis_index(label);
    const Rep want_from = dir == Direction::to_conjugate ? Rep::direct : Rep::conjugate;
    if (f.reps[j] != want_from)
        throw ConfigError(std::string("axis ") + to_string(label) +
                          " is already in the requested representation");

    const Axis& ax = f.grid.axes()[j];
    const std::size_t n = ax.n;
    const std::size_t after = f.stride(j);
    const std::size_t before = f.data.size() / (n * after);

    Field out = f;
    out.reps[j] = dir == Direction::to_conjugate ? Rep::conjugate : Rep::direct;

    // Phase-and-scale coefficients per ladder index: analysis applies
    // e^{-i k u_min}/sqrt(n) after the forward pass, synthesis applies
    // the conjugate before the inverse pass.
    const double inv_sqrt_n = 1.0 / std::sqrt(double(n));
    std::vector<cplx> coeff(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double ang = ax.freq_fft(k) * ax.min;
        const cplx ph{std::cos(ang), -std::sin(ang)};
        coeff[k] = (dir == Direction::to_conjugate ? ph : std::conj(ph)) * inv_sqrt_n;
    }

    const auto& plan = fft::plan_for(n);
    const auto& ops = simd::ops();
    cplx* data = out.data.data();

    auto apply_coeff = [&]() {
        if (after == 1) {
            for (std::size_t b = 0; b < before; ++b)
                ops.cmul(data + b * n, coeff.data(), n);
        } else {
            for (std::size_t b = 0; b < before; ++b)
                for (std::size_t k = 0; k < n; ++k)
                    ops.scale(data + (b * n + k) * after, coeff[k], after);
        }
    };

    auto run_fft = [&](int sign) {
        if (after == 1) {
            util::parallel_for(before, [&](std::size_t b0, std::size_t b1) {
                plan.lines(data + b0 * n, b1 - b0, sign);
            });
        } else if (before >= util::thread_count()) {
            util::parallel_for(before, [&](std::size_t b0, std::size_t b1) {
                plan.strided(data + b0 * n * after, b1 - b0, after, sign);
            });
        } else {
            for (std::size_t b = 0; b < before; ++b) {
                cplx* block = data + b * n * after;
                util::parallel_for(after, [&](std::size_t t0, std::size_t t1) {
                    plan.strided_lanes(block, after, t0, t1, sign);
                });
            }
        }
    };

    if (dir == Direction::to_conjugate) {
        run_fft(-1);
        apply_coeff();
    } else {
        apply_coeff();
        run_fft(+1);
    }
    return out;
}

Field spectral_derivative(const Field& f, AxisLabel label) {
    const std::size_t j = f.grid.axis_index(label);
    if (f.reps[j] != Rep::direct)
        throw ConfigError(std::string("axis ") + to_string(label) +
                          " must be in direct representation");
    Field g = transform(f, label, Direction::to_conjugate);
    const Axis& ax = f.grid.axes()[j];
    const std::size_t n = ax.n;
    const std::size_t after = g.stride(j);
    const std::size_t before = g.data.size() / (n * after);
    const auto& ops = simd::ops();
    for (std::size_t b = 0; b < before; ++b)
        for (std::size_t k = 0; k < n; ++k) {
            const cplx c{ax.freq_fft(k), 0.0};
            ops.scale(g.data.data() + (b * n + k) * after, c, after);
        }
    return transform(g, label, Direction::to_direct);
}

} // namespace phasesim
