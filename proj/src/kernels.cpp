#include "phasesim/kernels.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace phasesim::kernels {

namespace {

using expr::Program;

struct MixedGridValues {
    // per-point sample of the mixed-rep coordinate for each axis role
    std::vector<double> x_or_lam;  // direct x or lambda ladder
    std::vector<double> p_or_th;   // direct p or theta ladder
    std::vector<double> tau;       // tau ladder (extended only, else empty)
};

// Samples the mixed grid for a kernel term. For the kinetic term the x axis
// is on its conjugate (lambda) ladder and p stays direct; for the potential
// term x stays direct and p is on its theta ladder. omega is always on tau.
MixedGridValues sample_mixed(const PhaseGrid& g, Term term, bool extended) {
    const std::size_t total = g.size();
    MixedGridValues v;
    v.x_or_lam.resize(total);
    v.p_or_th.resize(total);
    if (extended) v.tau.resize(total);

    const std::size_t ix = g.axis_index(AxisLabel::x);
    const std::size_t ip = g.axis_index(AxisLabel::p);
    const std::size_t io = extended ? g.axis_index(AxisLabel::omega) : 0;

    std::vector<std::size_t> strides(g.rank(), 1);
    for (std::size_t a = g.rank(); a-- > 1;)
        strides[a - 1] = strides[a] * g.axes()[a].n;

    const Axis& ax = g.axes()[ix];
    const Axis& ap = g.axes()[ip];
    for (std::size_t idx = 0; idx < total; ++idx) {
        const std::size_t kx = (idx / strides[ix]) % ax.n;
        const std::size_t kp = (idx / strides[ip]) % ap.n;
        v.x_or_lam[idx] = term == Term::kinetic ? ax.freq_fft(kx) : ax.value(kx);
        v.p_or_th[idx] = term == Term::kinetic ? ap.value(kp) : ap.freq_fft(kp);
        if (extended) {
            const Axis& ao = g.axes()[io];
            const std::size_t ko = (idx / strides[io]) % ao.n;
            v.tau[idx] = ao.freq_fft(ko);
        }
    }
    return v;
}

Field mixed_field(const PhaseGrid& g, Term term) {
    Field f = Field::zeros(g);
    f.reps[g.axis_index(term == Term::kinetic ? AxisLabel::x : AxisLabel::p)] = Rep::conjugate;
    if (g.has(AxisLabel::omega)) f.reps[g.axis_index(AxisLabel::omega)] = Rep::conjugate;
    return f;
}

void require(const HamiltonianModel& m, const PhaseGrid& g, bool extended) {
    m.validate();
    if (extended) {
        if (!g.has(AxisLabel::omega))
            throw ConfigError("extended kernels require an omega axis");
    } else if (g.rank() != 2 || !g.has(AxisLabel::x) || !g.has(AxisLabel::p)) {
        throw ConfigError("ordinary kernels require exactly the (x, p) axes");
    }
}

Field quantum_kernel(const HamiltonianModel& m, const PhaseGrid& g, double t,
                     bool extended, Term term) {
    require(m, g, extended);
    const double h = g.hbar();
    const auto v = sample_mixed(g, term, extended);
    const std::size_t total = g.size();

    const std::string main_var = term == Term::kinetic ? "p" : "x";
    const std::vector<std::string> inputs{main_var, "t"};
    const expr::Expr& fn = term == Term::kinetic ? m.T : m.U;
    Program prog = Program::compile(fn, inputs, m.params);

    // shifted main argument: p +- h*lam/2 for T, x -+ h*th/2 for U
    const double sgn = term == Term::kinetic ? +1.0 : -1.0;
    std::vector<double> arg_plus(total), arg_minus(total);
    std::vector<double> t_plus(total), t_minus(total);
    for (std::size_t i = 0; i < total; ++i) {
        const double main = term == Term::kinetic ? v.p_or_th[i] : v.x_or_lam[i];
        const double conj = term == Term::kinetic ? v.x_or_lam[i] : v.p_or_th[i];
        arg_plus[i] = main + sgn * h * conj / 2.0;
        arg_minus[i] = main - sgn * h * conj / 2.0;
        const double dt = extended ? h * v.tau[i] / 2.0 : 0.0;
        t_plus[i] = t + dt;
        t_minus[i] = t - dt;
    }

    std::vector<double> f_plus(total), f_minus(total);
    {
        const double* in1[2] = {arg_plus.data(), t_plus.data()};
        prog.run(std::span<const double* const>(in1, 2), f_plus.data(), total);
        const double* in2[2] = {arg_minus.data(), t_minus.data()};
        prog.run(std::span<const double* const>(in2, 2), f_minus.data(), total);
    }

    Field k = mixed_field(g, term);
    bool finite = true;
    for (std::size_t i = 0; i < total; ++i) {
        const double im = -(f_plus[i] - f_minus[i]) / h; // (1/ih)(f+ - f-) = -i(f+ - f-)/h
        k.data[i] = cplx{0.0, im};
        finite &= std::isfinite(im);
    }
    if (!finite) throw NumericError("kernel evaluation produced non-finite values");
    return k;
}

Field classical_kernel(const HamiltonianModel& m, const PhaseGrid& g, double t,
                       bool extended, Term term) {
    require(m, g, extended);
    const auto v = sample_mixed(g, term, extended);
    const std::size_t total = g.size();

    const std::string main_var = term == Term::kinetic ? "p" : "x";
    const std::vector<std::string> inputs{main_var, "t"};
    const expr::Expr& fn = term == Term::kinetic ? m.T : m.U;
    Program d_main = Program::compile(expr::diff(fn, main_var), inputs, m.params);
    Program d_time = Program::compile(expr::diff(fn, "t"), inputs, m.params);

    std::vector<double> main_arg(total), t_arg(total, t);
    for (std::size_t i = 0; i < total; ++i)
        main_arg[i] = term == Term::kinetic ? v.p_or_th[i] : v.x_or_lam[i];

    std::vector<double> dm(total), dt_(total);
    const double* in[2] = {main_arg.data(), t_arg.data()};
    d_main.run(std::span<const double* const>(in, 2), dm.data(), total);
    d_time.run(std::span<const double* const>(in, 2), dt_.data(), total);

    Field k = mixed_field(g, term);
    bool finite = true;
    for (std::size_t i = 0; i < total; ++i) {
        const double conj = term == Term::kinetic ? v.x_or_lam[i] : v.p_or_th[i];
        const double tau = extended ? v.tau[i] : 0.0;
        // K_T^cl = -i(lam dT/dp + tau dT/dt);  K_U^cl = +i(th dU/dx - tau dU/dt)
        const double im = term == Term::kinetic ? -(conj * dm[i] + tau * dt_[i])
                                                : (conj * dm[i] - tau * dt_[i]);
        k.data[i] = cplx{0.0, im};
        finite &= std::isfinite(im);
    }
    if (!finite) throw NumericError("kernel evaluation produced non-finite values");
    return k;
}

} // namespace

Field quantum_kinetic_kernel(const HamiltonianModel& m, const PhaseGrid& g,
                             double t, bool extended) {
    return quantum_kernel(m, g, t, extended, Term::kinetic);
}

Field quantum_potential_kernel(const HamiltonianModel& m, const PhaseGrid& g,
                               double t, bool extended) {
    return quantum_kernel(m, g, t, extended, Term::potential);
}

Field classical_kinetic_kernel(const HamiltonianModel& m, const PhaseGrid& g,
                               double t, bool extended) {
    return classical_kernel(m, g, t, extended, Term::kinetic);
}

Field classical_potential_kernel(const HamiltonianModel& m, const PhaseGrid& g,
                                 double t, bool extended) {
    return classical_kernel(m, g, t, extended, Term::potential);
}

Field build_kernel(const KernelSpec& s, const HamiltonianModel& m, const PhaseGrid& g) {
    if (s.kind == Kind::quantum)
        return quantum_kernel(m, g, s.time, s.extended, s.term);
    return classical_kernel(m, g, s.time, s.extended, s.term);
}

namespace {

Field olavo_symbol(const HamiltonianModel& m, const PhaseGrid& g, double t, Term term) {
    require(m, g, false);
    const double h = g.hbar();
    const auto v = sample_mixed(g, term, false);
    const std::size_t total = g.size();

    const std::string main_var = term == Term::kinetic ? "p" : "x";
    const std::vector<std::string> inputs{main_var, "t"};
    Program prog = Program::compile(term == Term::kinetic ? m.T : m.U, inputs, m.params);

    const double sgn = term == Term::kinetic ? +1.0 : -1.0;
    std::vector<double> arg(total), t_arg(total, t);
    for (std::size_t i = 0; i < total; ++i) {
        const double main = term == Term::kinetic ? v.p_or_th[i] : v.x_or_lam[i];
        const double conj = term == Term::kinetic ? v.x_or_lam[i] : v.p_or_th[i];
        arg[i] = main + sgn * h * conj / 2.0;
    }
    std::vector<double> fv(total);
    const double* in[2] = {arg.data(), t_arg.data()};
    prog.run(std::span<const double* const>(in, 2), fv.data(), total);

    Field k = mixed_field(g, term);
    bool finite = true;
    for (std::size_t i = 0; i < total; ++i) {
        k.data[i] = cplx{fv[i], 0.0};
        finite &= std::isfinite(fv[i]);
    }
    if (!finite) throw NumericError("kernel evaluation produced non-finite values");
    return k;
}

} // namespace

Field olavo_kinetic_symbol(const HamiltonianModel& m, const PhaseGrid& g, double t) {
    return olavo_symbol(m, g, t, Term::kinetic);
}

Field olavo_potential_symbol(const HamiltonianModel& m, const PhaseGrid& g, double t) {
    return olavo_symbol(m, g, t, Term::potential);
}

const Field& KernelCache::get(const KernelSpec& s, const HamiltonianModel& m,
                              const PhaseGrid& g) {
    std::ostringstream key;
    key.precision(17);
    key << (s.kind == Kind::quantum ? "q" : "c") << (s.term == Term::kinetic ? "T" : "U")
        << (s.extended ? "x" : "o") << ";t=" << s.time << ";" << m.cache_key() << ";"
        << g.cache_key();
    auto it = cache_.find(key.str());
    if (it == cache_.end()) it = cache_.emplace(key.str(), build_kernel(s, m, g)).first;
    return it->second;
}

} // namespace phasesim::kernels
