#include "phasesim/propagator.hpp"

#include "phasesim/fft.hpp"
#include "phasesim/observables.hpp"
#include "phasesim/simd/dispatch.hpp"

#include <cmath>
#include <numbers>

namespace phasesim::propagator {

const char* to_string(EvolutionMode m) {
    switch (m) {
    case EvolutionMode::moyal: return "moyal";
    case EvolutionMode::liouville: return "liouville";
    case EvolutionMode::extended_quantum: return "extended_quantum";
    case EvolutionMode::extended_classical: return "extended_classical";
    case EvolutionMode::olavo: return "olavo";
    }
    return "?";
}

EvolutionMode mode_from(const std::string& s) {
    if (s == "moyal") return EvolutionMode::moyal;
    if (s == "liouville") return EvolutionMode::liouville;
    if (s == "extended_quantum") return EvolutionMode::extended_quantum;
    if (s == "extended_classical") return EvolutionMode::extended_classical;
    if (s == "olavo") return EvolutionMode::olavo;
    throw ConfigError("unknown evolution mode '" + s + "'");
}

namespace {

void check_margin(const Axis& ax, double center, double sigma, const char* what,
                  std::string* warning) {
    const double d = std::min(center - ax.min, ax.max - center);
    if (d < 2.0 * sigma)
        throw ConfigError(std::string("initial state ") + what +
                          " support is within 2 sigma of the boundary");
    if (d < 4.0 * sigma && warning)
        *warning += std::string(warning->empty() ? "" : "; ") + what +
                    " support within 4 sigma of the boundary";
}

} // namespace

Field initial_gaussian(const PhaseGrid& g, double x0, double p0, double sigma_x,
                       double omega_center, double omega_sigma, std::string* warning) {
    if (!(sigma_x > 0.0)) throw ConfigError("sigma_x must be positive");
    const double sigma_p = g.hbar() / (2.0 * sigma_x);
    const Axis& ax = g.axis(AxisLabel::x);
    const Axis& ap = g.axis(AxisLabel::p);
    check_margin(ax, x0, sigma_x, "x", warning);
    check_margin(ap, p0, sigma_p, "p", warning);
    const bool extended = g.has(AxisLabel::omega);
    if (extended) check_margin(g.axis(AxisLabel::omega), omega_center, omega_sigma, "omega", warning);

    Field f = Field::zeros(g);
    const std::size_t ix = g.axis_index(AxisLabel::x);
    const std::size_t ip = g.axis_index(AxisLabel::p);
    const std::size_t sx = f.stride(ix), sp = f.stride(ip);

    std::vector<double> gx(ax.n), gp(ap.n);
    for (std::size_t i = 0; i < ax.n; ++i) {
        const double u = (ax.value(i) - x0) / sigma_x;
        gx[i] = std::exp(-0.5 * u * u);
    }
    for (std::size_t j = 0; j < ap.n; ++j) {
        const double u = (ap.value(j) - p0) / sigma_p;
        gp[j] = std::exp(-0.5 * u * u);
    }

    if (!extended) {
        for (std::size_t i = 0; i < ax.n; ++i)
            for (std::size_t j = 0; j < ap.n; ++j)
                f.data[i * sx + j * sp] = cplx{gx[i] * gp[j], 0.0};
    } else {
        const Axis& ao = g.axis(AxisLabel::omega);
        const std::size_t so = f.stride(g.axis_index(AxisLabel::omega));
        std::vector<double> go(ao.n);
        for (std::size_t k = 0; k < ao.n; ++k) {
            const double u = (ao.value(k) - omega_center) / omega_sigma;
            go[k] = std::exp(-0.5 * u * u);
        }
        for (std::size_t i = 0; i < ax.n; ++i)
            for (std::size_t j = 0; j < ap.n; ++j)
                for (std::size_t k = 0; k < ao.n; ++k)
                    f.data[i * sx + j * sp + k * so] = cplx{gx[i] * gp[j] * go[k], 0.0};
    }

    const double total = observables::total_integral(f);
    if (!(total > 0.0)) throw NumericError("initial state has zero mass on the grid");
    const double inv = 1.0 / total;
    for (auto& v : f.data) v *= inv;
    return f;
}

Field wigner_from_wavefunction(std::span<const cplx> psi, const PhaseGrid& g) {
    const Axis& ax = g.axis(AxisLabel::x);
    const Axis& ap = g.axis(AxisLabel::p);
    if (psi.size() != ax.n)
        throw ConfigError("wavefunction sample count does not match the x axis");
    const double h = g.hbar();
    const double dx = ax.spacing();

    double norm = 0.0;
    for (const auto& v : psi) norm += std::norm(v);
    norm *= dx;
    if (std::abs(norm - 1.0) > 1e-6)
        throw ConfigError("wavefunction is not normalized on the x axis");

    const std::size_t n = ax.n;
    const auto& plan = fft::plan_for(n);

    // spectral shift: psi(x + a) = synthesis of e^{+i lam a} analysis
    std::vector<cplx> base(psi.begin(), psi.end());
    plan.lines(base.data(), 1, -1);
    auto shifted = [&](double a, std::vector<cplx>& out) {
        out = base;
        for (std::size_t k = 0; k < n; ++k) {
            const double ang = ax.freq_fft(k) * a;
            out[k] *= cplx{std::cos(ang), std::sin(ang)};
        }
        plan.lines(out.data(), 1, +1);
        const double inv = 1.0 / double(n);
        for (auto& v : out) v *= inv;
    };

    // s quadrature spans the x extent; centered ladder
    const double ds = dx;
    std::vector<double> s(n);
    for (std::size_t j = 0; j < n; ++j) s[j] = (double(j) - double(n / 2)) * ds;

    std::vector<cplx> corr(n * n); // [x][s]
    std::vector<cplx> plus(n), minus(n);
    for (std::size_t j = 0; j < n; ++j) {
        shifted(s[j] / 2.0, plus);
        shifted(-s[j] / 2.0, minus);
        for (std::size_t i = 0; i < n; ++i)
            corr[i * n + j] = std::conj(plus[i]) * minus[i];
    }

    Field W = Field::zeros(g);
    const std::size_t sx = W.stride(g.axis_index(AxisLabel::x));
    const std::size_t sp = W.stride(g.axis_index(AxisLabel::p));
    const double scale = ds / (2.0 * std::numbers::pi * h);
    std::vector<cplx> phase(ap.n * n); // [p][s]
    for (std::size_t k = 0; k < ap.n; ++k) {
        const double pk = ap.value(k);
        for (std::size_t j = 0; j < n; ++j) {
            const double ang = pk * s[j] / h;
            phase[k * n + j] = cplx{std::cos(ang), std::sin(ang)};
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < ap.n; ++k) {
            cplx acc{0.0, 0.0};
            const cplx* crow = corr.data() + i * n;
            const cplx* prow = phase.data() + k * n;
            for (std::size_t j = 0; j < n; ++j) acc += crow[j] * prow[j];
            W.data[i * sx + k * sp] = acc * scale;
        }
    return W;
}

ObservableSummary summarize(const Field& f) {
    ObservableSummary s;
    s.l2_norm = observables::l2_norm(f);
    s.max_abs_imag = observables::max_abs_imag(f);
    if (f.all_direct()) {
        s.total_integral = observables::total_integral(f);
        s.mean_x = observables::moment(f, {{AxisLabel::x, 1, 0.0}});
        s.mean_p = observables::moment(f, {{AxisLabel::p, 1, 0.0}});
    }
    return s;
}

Propagator::Propagator(EvolutionMode mode, HamiltonianModel model, PhaseGrid grid,
                       double dt)
    : mode_(mode), model_(std::move(model)), grid_(std::move(grid)), dt_(dt) {
    if (!(dt_ >= 0.0)) throw ConfigError("dt must be non-negative");
    model_.validate();
    extended_ = mode_ == EvolutionMode::extended_quantum ||
                mode_ == EvolutionMode::extended_classical;
    if (extended_) {
        if (!grid_.has(AxisLabel::omega))
            throw ConfigError("extended modes require an omega axis");
    } else if (grid_.rank() != 2 || !grid_.has(AxisLabel::x) || !grid_.has(AxisLabel::p)) {
        throw ConfigError(std::string(to_string(mode_)) +
                          " mode requires exactly the (x, p) axes");
    }
    stationary_ = !model_.time_dependent();
}

void Propagator::ensure_factors(double t_mid) {
    if (factors_time_ && (stationary_ || *factors_time_ == t_mid)) return;

    Field ku, kt;
    switch (mode_) {
    case EvolutionMode::moyal:
    case EvolutionMode::extended_quantum:
        ku = kernels::quantum_potential_kernel(model_, grid_, t_mid, extended_);
        kt = kernels::quantum_kinetic_kernel(model_, grid_, t_mid, extended_);
        break;
    case EvolutionMode::liouville:
    case EvolutionMode::extended_classical:
        ku = kernels::classical_potential_kernel(model_, grid_, t_mid, extended_);
        kt = kernels::classical_kinetic_kernel(model_, grid_, t_mid, extended_);
        break;
    case EvolutionMode::olavo:
        ku = kernels::olavo_potential_symbol(model_, grid_, t_mid);
        kt = kernels::olavo_kinetic_symbol(model_, grid_, t_mid);
        break;
    }

    // multiplicative factors: exp(dt_k K) for kernels (K purely imaginary,
    // stored as i*y), exp(-(i/hbar) S dt_k) for the amplitude symbols
    auto exponentiate = [&](const Field& k, double dt_k) {
        Field fac = k;
        if (mode_ == EvolutionMode::olavo) {
            const double c = -dt_k / grid_.hbar();
            for (auto& v : fac.data) {
                const double ang = c * v.real();
                v = cplx{std::cos(ang), std::sin(ang)};
            }
        } else {
            for (auto& v : fac.data) {
                const double ang = dt_k * v.imag();
                v = cplx{std::cos(ang), std::sin(ang)};
            }
        }
        return fac;
    };
    fac_u_half_ = exponentiate(ku, dt_ / 2.0);
    fac_t_full_ = exponentiate(kt, dt_);
    factors_time_ = t_mid;
}

Field Propagator::apply_kick(Field f, const Field& factor, bool kinetic) const {
    const AxisLabel main = kinetic ? AxisLabel::x : AxisLabel::p;
    f = transform(f, main, Direction::to_conjugate);
    if (extended_) f = transform(f, AxisLabel::omega, Direction::to_conjugate);
    simd::ops().cmul(f.data.data(), factor.data.data(), f.data.size());
    if (extended_) f = transform(f, AxisLabel::omega, Direction::to_direct);
    f = transform(f, main, Direction::to_direct);
    return f;
}

Field Propagator::step(Field f, double t) {
    if (!f.all_direct()) throw ConfigError("step expects an all-direct field");
    if (!(f.grid == grid_)) throw ConfigError("field grid does not match the propagator");
    ensure_factors(t + dt_ / 2.0);
    f = apply_kick(std::move(f), fac_u_half_, false);
    f = apply_kick(std::move(f), fac_t_full_, true);
    f = apply_kick(std::move(f), fac_u_half_, false);
    return f;
}

namespace {

void check_finite(const Field& f) {
    for (const auto& v : f.data)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw NumericError("field left the finite range (kernel overflow?)");
}

} // namespace

Field Propagator::evolve(Field f, double t0, std::size_t n_steps,
                         std::size_t snapshot_every, const SnapshotSink& sink) {
    auto emit = [&](std::size_t s, double t) {
        check_finite(f);
        if (sink) sink(SnapshotEvent{s, t, f, summarize(f)});
    };
    if (snapshot_every > 0) emit(0, t0);
    for (std::size_t s = 0; s < n_steps; ++s) {
        f = step(std::move(f), t0 + double(s) * dt_);
        const std::size_t done = s + 1;
        if (snapshot_every > 0 && (done % snapshot_every == 0 || done == n_steps))
            emit(done, t0 + double(done) * dt_);
    }
    if (snapshot_every == 0) check_finite(f);
    return f;
}

Field step(const Field& f, EvolutionMode mode, const HamiltonianModel& m, double t,
           double dt) {
    Propagator prop(mode, m, f.grid, dt);
    return prop.step(f, t);
}

Field evolve(const Field& f, EvolutionMode mode, const HamiltonianModel& m, double t0,
             double dt, std::size_t n_steps, std::size_t snapshot_every,
             const SnapshotSink& sink) {
    Propagator prop(mode, m, f.grid, dt);
    return prop.evolve(f, t0, n_steps, snapshot_every, sink);
}

Field step_olavo(const Field& psi, const HamiltonianModel& m, double t, double dt) {
    Propagator prop(EvolutionMode::olavo, m, psi.grid, dt);
    return prop.step(psi, t);
}

} // namespace phasesim::propagator
