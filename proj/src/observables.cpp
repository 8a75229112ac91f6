#include "phasesim/observables.hpp"

#include "phasesim/simd/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace phasesim::observables {

namespace {

constexpr double kNegativityTolerance = 1e-8;
constexpr double kEntropyFloor = 1e-300;

void require_all_direct(const Field& f, const char* what) {
    if (!f.all_direct())
        throw ConfigError(std::string(what) + " requires an all-direct field");
}

void require_same_grid(const Field& A, const Field& B) {
    if (!(A.grid == B.grid)) throw ConfigError("fields live on different grids");
}

struct KahanAcc {
    double s = 0.0, c = 0.0;
    void add(double v) {
        const double y = v - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
};

} // namespace

double total_integral(const Field& f) {
    require_all_direct(f, "total_integral");
    return simd::ops().sum_real(f.data.data(), f.data.size()) * f.grid.cell_volume();
}

double l2_norm(const Field& f) {
    return std::sqrt(simd::ops().sum_abs2(f.data.data(), f.data.size()) *
                     f.grid.cell_volume());
}

double max_abs_imag(const Field& f) {
    return simd::ops().max_abs_imag(f.data.data(), f.data.size());
}

std::vector<double> marginal(const Field& f, AxisLabel label) {
    require_all_direct(f, "marginal");
    const std::size_t j = f.grid.axis_index(label);
    const Axis& ax = f.grid.axes()[j];
    const std::size_t after = f.stride(j);
    const std::size_t before = f.data.size() / (ax.n * after);
    const double measure = f.grid.cell_volume() / ax.spacing();
    std::vector<double> out(ax.n, 0.0);
    for (std::size_t b = 0; b < before; ++b)
        for (std::size_t k = 0; k < ax.n; ++k) {
            const cplx* row = f.data.data() + (b * ax.n + k) * after;
            double s = 0.0;
            for (std::size_t t = 0; t < after; ++t) s += row[t].real();
            out[k] += s;
        }
    for (auto& v : out) v *= measure;
    return out;
}

std::vector<double> marginal2(const Field& f, AxisLabel la, AxisLabel lb) {
    require_all_direct(f, "marginal2");
    const std::size_t ia = f.grid.axis_index(la);
    const std::size_t ib = f.grid.axis_index(lb);
    if (ia == ib) throw ConfigError("marginal2 needs two distinct axes");
    const std::size_t na = f.grid.axes()[ia].n;
    const std::size_t nb = f.grid.axes()[ib].n;
    double measure = f.grid.cell_volume() /
                     (f.grid.axes()[ia].spacing() * f.grid.axes()[ib].spacing());
    const std::size_t sa = f.stride(ia);
    const std::size_t sb = f.stride(ib);

    std::vector<std::size_t> other_strides;
    std::vector<std::size_t> other_counts;
    for (std::size_t k = 0; k < f.grid.rank(); ++k)
        if (k != ia && k != ib) {
            other_strides.push_back(f.stride(k));
            other_counts.push_back(f.grid.axes()[k].n);
        }

    std::vector<double> out(na * nb, 0.0);
    for (std::size_t a = 0; a < na; ++a)
        for (std::size_t b = 0; b < nb; ++b) {
            double s = 0.0;
            if (other_counts.empty()) {
                s = f.data[a * sa + b * sb].real();
            } else {
                // at most one leftover axis on rank-3 grids
                for (std::size_t k = 0; k < other_counts[0]; ++k)
                    s += f.data[a * sa + b * sb + k * other_strides[0]].real();
            }
            out[a * nb + b] = s * measure;
        }
    return out;
}

double moment(const Field& f, const std::vector<MomentTerm>& terms) {
    require_all_direct(f, "moment");
    // per-axis weight tables
    std::vector<std::vector<double>> w(f.grid.rank());
    for (std::size_t a = 0; a < f.grid.rank(); ++a) {
        const Axis& ax = f.grid.axes()[a];
        w[a].assign(ax.n, 1.0);
        for (const auto& t : terms)
            if (f.grid.axis_index(t.axis) == a)
                for (std::size_t i = 0; i < ax.n; ++i)
                    w[a][i] *= std::pow(ax.value(i) - t.center, t.power);
    }
    KahanAcc acc;
    std::vector<std::size_t> idx(f.grid.rank(), 0);
    const std::size_t total = f.data.size();
    for (std::size_t flat = 0; flat < total; ++flat) {
        double weight = 1.0;
        for (std::size_t a = 0; a < f.grid.rank(); ++a) weight *= w[a][idx[a]];
        acc.add(f.data[flat].real() * weight);
        for (std::size_t a = f.grid.rank(); a-- > 0;) {
            if (++idx[a] < f.grid.axes()[a].n) break;
            idx[a] = 0;
        }
    }
    return acc.s * f.grid.cell_volume();
}

namespace {

template <typename Fn>
void for_each_xp(const Field& f, Fn&& fn) {
    const std::size_t ix = f.grid.axis_index(AxisLabel::x);
    const std::size_t ip = f.grid.axis_index(AxisLabel::p);
    const Axis& ax = f.grid.axes()[ix];
    const Axis& ap = f.grid.axes()[ip];
    const std::size_t sx = f.stride(ix), sp = f.stride(ip);
    for (std::size_t i = 0; i < ax.n; ++i)
        for (std::size_t j = 0; j < ap.n; ++j)
            fn(ax.value(i), ap.value(j), f.data[i * sx + j * sp].real());
}

double entropy_integrand(double v) {
    if (v < -kNegativityTolerance)
        throw NumericError("field is negative beyond tolerance: entropy undefined "
                           "(Wigner negativity)");
    const double fv = std::max(v, kEntropyFloor);
    return -fv * std::log(fv);
}

} // namespace

double probability_over_domain(const Field& f, const DomainSpec& d) {
    require_all_direct(f, "probability_over_domain");
    if (f.grid.rank() != 2) throw ConfigError("domain functionals expect (x,p) fields");
    KahanAcc acc;
    bool hit = false;
    for_each_xp(f, [&](double x, double p, double v) {
        if (d.contains(x, p)) {
            acc.add(v);
            hit = true;
        }
    });
    if (!hit) throw ConfigError("domain '" + d.label + "' contains no grid points");
    return acc.s * f.grid.cell_volume();
}

double entropy_over_domain(const Field& f, const DomainSpec& d) {
    require_all_direct(f, "entropy_over_domain");
    if (f.grid.rank() != 2) throw ConfigError("domain functionals expect (x,p) fields");
    KahanAcc acc;
    bool hit = false;
    for_each_xp(f, [&](double x, double p, double v) {
        if (d.contains(x, p)) {
            acc.add(entropy_integrand(v));
            hit = true;
        }
    });
    if (!hit) throw ConfigError("domain '" + d.label + "' contains no grid points");
    return acc.s * f.grid.cell_volume();
}

namespace {

// 8-point Lagrange stencil on a periodic axis: base index and weights for
// offsets -3..4 around the containing cell.
void lagrange8(const Axis& ax, double u, std::array<std::size_t, 8>& idx,
               std::array<double, 8>& wt) {
    const double d = ax.spacing();
    double rel = (u - ax.min) / d;
    const double jf = std::floor(rel);
    const double frac = rel - jf;
    const long j = static_cast<long>(jf);
    for (int o = 0; o < 8; ++o) {
        long k = j + o - 3;
        const long n = static_cast<long>(ax.n);
        k %= n;
        if (k < 0) k += n;
        idx[o] = static_cast<std::size_t>(k);
        wt[o] = 1.0;
    }
    for (int a = 0; a < 8; ++a) {
        const double oa = a - 3;
        for (int b = 0; b < 8; ++b) {
            if (a == b) continue;
            const double ob = b - 3;
            wt[a] *= (frac - ob) / (oa - ob);
        }
    }
}

} // namespace

double value_at(const Field& f, double x, double p) {
    require_all_direct(f, "value_at");
    if (f.grid.rank() != 2) throw ConfigError("value_at expects (x,p) fields");
    const std::size_t ix = f.grid.axis_index(AxisLabel::x);
    const std::size_t ip = f.grid.axis_index(AxisLabel::p);
    const std::size_t sx = f.stride(ix), sp = f.stride(ip);
    std::array<std::size_t, 8> ia, ja;
    std::array<double, 8> wa, wb;
    lagrange8(f.grid.axes()[ix], x, ia, wa);
    lagrange8(f.grid.axes()[ip], p, ja, wb);
    double s = 0.0;
    for (int a = 0; a < 8; ++a) {
        double row = 0.0;
        for (int b = 0; b < 8; ++b) row += wb[b] * f.data[ia[a] * sx + ja[b] * sp].real();
        s += wa[a] * row;
    }
    return s;
}

double probability_at_points(const Field& f, const std::vector<Point2>& pts, double weight) {
    KahanAcc acc;
    for (const auto& pt : pts) acc.add(value_at(f, pt.x, pt.p));
    return acc.s * weight;
}

double entropy_at_points(const Field& f, const std::vector<Point2>& pts, double weight) {
    KahanAcc acc;
    for (const auto& pt : pts) acc.add(entropy_integrand(value_at(f, pt.x, pt.p)));
    return acc.s * weight;
}

namespace {

// d/du as i * (-i d/du)
Field partial(const Field& f, AxisLabel l) {
    Field g = spectral_derivative(f, l);
    for (auto& v : g.data) v *= cplx{0.0, 1.0};
    return g;
}

} // namespace

Field poisson_bracket(const Field& A, const Field& B) {
    require_same_grid(A, B);
    require_all_direct(A, "poisson_bracket");
    require_all_direct(B, "poisson_bracket");
    const Field dxA = partial(A, AxisLabel::x);
    const Field dpA = partial(A, AxisLabel::p);
    const Field dxB = partial(B, AxisLabel::x);
    const Field dpB = partial(B, AxisLabel::p);
    Field out = Field::zeros_like(A);
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = dxA.data[i] * dpB.data[i] - dpA.data[i] * dxB.data[i];
    return out;
}

Field extended_poisson_bracket(const Field& A, const Field& B, const Field* dtA,
                               const Field* dtB) {
    require_same_grid(A, B);
    if (!A.grid.has(AxisLabel::omega))
        throw ConfigError("extended_poisson_bracket requires an omega axis");
    if (dtA) require_same_grid(A, *dtA);
    if (dtB) require_same_grid(A, *dtB);
    Field out = poisson_bracket(A, B);
    const Field dEA = partial(A, AxisLabel::omega);
    const Field dEB = partial(B, AxisLabel::omega);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        const cplx ta = dtA ? dtA->data[i] : cplx{0.0, 0.0};
        const cplx tb = dtB ? dtB->data[i] : cplx{0.0, 0.0};
        out.data[i] += dEA.data[i] * tb - ta * dEB.data[i];
    }
    return out;
}

Field moyal_bracket(const Field& A, const Field& B, double hbar) {
    require_same_grid(A, B);
    require_all_direct(A, "moyal_bracket");
    require_all_direct(B, "moyal_bracket");
    if (A.grid.rank() != 2) throw ConfigError("moyal_bracket expects (x,p) fields");
    if (!(hbar > 0.0)) throw ConfigError("hbar must be positive");

    const std::size_t ix = A.grid.axis_index(AxisLabel::x);
    const std::size_t ip = A.grid.axis_index(AxisLabel::p);
    const Axis& ax = A.grid.axes()[ix];
    const Axis& ap = A.grid.axes()[ip];
    const std::size_t nx = ax.n, np = ap.n;
    if (nx * np > 16384)
        throw ConfigError("moyal_bracket: grid too large for the dense spectral product");

    Field At = transform(transform(A, AxisLabel::x, Direction::to_conjugate),
                         AxisLabel::p, Direction::to_conjugate);
    Field Bt = transform(transform(B, AxisLabel::x, Direction::to_conjugate),
                         AxisLabel::p, Direction::to_conjugate);

    // physical mode coefficients: f(x,p) = sum c_k e^{i(lam x + th p)}
    const double root = std::sqrt(double(nx * np));
    std::vector<cplx> ca(At.data.size()), cb(Bt.data.size());
    for (std::size_t i = 0; i < ca.size(); ++i) {
        ca[i] = At.data[i] / root;
        cb[i] = Bt.data[i] / root;
    }

    std::vector<double> lam(nx), th(np);
    std::vector<long> lx(nx), lp(np); // integer ladder indices
    for (std::size_t k = 0; k < nx; ++k) {
        lam[k] = ax.freq_fft(k);
        lx[k] = k < nx / 2 ? long(k) : long(k) - long(nx);
    }
    for (std::size_t k = 0; k < np; ++k) {
        th[k] = ap.freq_fft(k);
        lp[k] = k < np / 2 ? long(k) : long(k) - long(np);
    }
    const double dkx = ax.conj_spacing();
    const double dkp = ap.conj_spacing();

    const std::size_t sxA = At.stride(ix), spA = At.stride(ip);
    std::vector<cplx> acc(nx * np, cplx{0.0, 0.0});

    // (A*B - B*A)/(i hbar): mode pairs combine with -(2/hbar) sin(hbar*Phi/2),
    // Phi = lam*th' - th*lam'. Mode sums that leave the representable ladder
    // fold back; each fold costs the constant phase e^{i*n*dk*u_min}.
    for (std::size_t kx = 0; kx < nx; ++kx)
        for (std::size_t kp = 0; kp < np; ++kp) {
            const cplx a = ca[kx * sxA + kp * spA];
            if (std::abs(a.real()) + std::abs(a.imag()) < 1e-300) continue;
            for (std::size_t qx = 0; qx < nx; ++qx) {
                const std::size_t mx = (kx + qx) % nx;
                const long foldx = lx[kx] + lx[qx] - lx[mx]; // in {-nx, 0, +nx}
                const double ang_x = foldx ? double(foldx) * dkx * ax.min : 0.0;
                for (std::size_t qp = 0; qp < np; ++qp) {
                    const cplx b = cb[qx * sxA + qp * spA];
                    const double phi = lam[kx] * th[qp] - th[kp] * lam[qx];
                    const double amp = -(2.0 / hbar) * std::sin(0.5 * hbar * phi);
                    if (amp == 0.0) continue;
                    const std::size_t mp = (kp + qp) % np;
                    const long foldp = lp[kp] + lp[qp] - lp[mp];
                    const double ang = ang_x + (foldp ? double(foldp) * dkp * ap.min : 0.0);
                    cplx contrib = a * b * amp;
                    if (ang != 0.0) contrib *= cplx{std::cos(ang), std::sin(ang)};
                    acc[mx * np + mp] += contrib;
                }
            }
        }

    Field out = Field::zeros_like(At);
    for (std::size_t kx = 0; kx < nx; ++kx)
        for (std::size_t kp = 0; kp < np; ++kp)
            out.data[kx * sxA + kp * spA] = acc[kx * np + kp] * root;
    out = transform(out, AxisLabel::x, Direction::to_direct);
    out = transform(out, AxisLabel::p, Direction::to_direct);
    return out;
}

double olavo_energy(const Field& psi, const HamiltonianModel& m, double t) {
    require_all_direct(psi, "olavo_energy");
    if (psi.grid.rank() != 2) throw ConfigError("olavo_energy expects (x,p) fields");
    m.validate();
    const double dV = psi.grid.cell_volume();
    const double norm = simd::ops().sum_abs2(psi.data.data(), psi.data.size()) * dV;
    if (std::abs(norm - 1.0) > 1e-6)
        throw ConfigError("olavo_energy expects a normalized amplitude");

    const std::size_t ix = psi.grid.axis_index(AxisLabel::x);
    const std::size_t ip = psi.grid.axis_index(AxisLabel::p);
    const Axis& ax = psi.grid.axes()[ix];
    const Axis& ap = psi.grid.axes()[ip];

    std::vector<double> pv(ap.n), tv(std::max(ax.n, ap.n), t), Tv(ap.n);
    for (std::size_t j = 0; j < ap.n; ++j) pv[j] = ap.value(j);
    auto progT = expr::Program::compile(m.T, std::vector<std::string>{"p", "t"}, m.params);
    {
        const double* in[2] = {pv.data(), tv.data()};
        progT.run(std::span<const double* const>(in, 2), Tv.data(), ap.n);
    }
    std::vector<double> xv(ax.n), Uv(ax.n);
    for (std::size_t i = 0; i < ax.n; ++i) xv[i] = ax.value(i);
    auto progU = expr::Program::compile(m.U, std::vector<std::string>{"x", "t"}, m.params);
    {
        const double* in[2] = {xv.data(), tv.data()};
        progU.run(std::span<const double* const>(in, 2), Uv.data(), ax.n);
    }

    const std::size_t sx = psi.stride(ix), sp = psi.stride(ip);
    KahanAcc acc;
    for (std::size_t i = 0; i < ax.n; ++i)
        for (std::size_t j = 0; j < ap.n; ++j) {
            const cplx v = psi.data[i * sx + j * sp];
            acc.add((Tv[j] + Uv[i]) * (v.real() * v.real() + v.imag() * v.imag()));
        }
    return acc.s * dV;
}

Field gibbs_state(const HamiltonianModel& m, const PhaseGrid& g, GibbsSpec& spec, double t) {
    m.validate();
    if (!(spec.beta > 0.0)) throw ConfigError("beta must be positive");
    if (!g.has(AxisLabel::omega))
        throw ConfigError("gibbs_state requires an (x,p,omega) grid");

    const std::size_t ix = g.axis_index(AxisLabel::x);
    const std::size_t ip = g.axis_index(AxisLabel::p);
    const std::size_t io = g.axis_index(AxisLabel::omega);
    const Axis& ax = g.axes()[ix];
    const Axis& ap = g.axes()[ip];
    const Axis& ao = g.axes()[io];

    std::vector<double> Tv(ap.n), Uv(ax.n), tv(std::max(ax.n, ap.n), t);
    {
        std::vector<double> pv(ap.n);
        for (std::size_t j = 0; j < ap.n; ++j) pv[j] = ap.value(j);
        auto prog = expr::Program::compile(m.T, std::vector<std::string>{"p", "t"}, m.params);
        const double* in[2] = {pv.data(), tv.data()};
        prog.run(std::span<const double* const>(in, 2), Tv.data(), ap.n);
    }
    {
        std::vector<double> xv(ax.n);
        for (std::size_t i = 0; i < ax.n; ++i) xv[i] = ax.value(i);
        auto prog = expr::Program::compile(m.U, std::vector<std::string>{"x", "t"}, m.params);
        const double* in[2] = {xv.data(), tv.data()};
        prog.run(std::span<const double* const>(in, 2), Uv.data(), ax.n);
    }

    Field f = Field::zeros(g);
    const std::size_t sx = f.stride(ix), sp = f.stride(ip), so = f.stride(io);
    KahanAcc zsum;
    for (std::size_t i = 0; i < ax.n; ++i)
        for (std::size_t j = 0; j < ap.n; ++j) {
            const double H = Tv[j] + Uv[i];
            for (std::size_t k = 0; k < ao.n; ++k) {
                const double arg = -spec.beta * (H - ao.value(k));
                if (arg > 700.0)
                    throw NumericError(
                        "gibbs_state overflow: beta*(H - omega) < -700 on the grid; "
                        "rescale beta or shrink the omega axis");
                const double v = std::exp(arg);
                f.data[i * sx + j * sp + k * so] = cplx{v, 0.0};
                zsum.add(v);
            }
        }
    spec.Z = zsum.s * g.cell_volume();
    if (!(spec.Z > 0.0) || !std::isfinite(spec.Z))
        throw NumericError("gibbs_state: normalization is not finite");
    const double inv = 1.0 / spec.Z;
    for (auto& v : f.data) v *= inv;
    return f;
}

namespace {

// 8th-order centered first derivative along one axis, periodic indexing.
std::vector<double> fd8(const Field& f, std::size_t axis_idx) {
    static constexpr double c1 = 4.0 / 5.0, c2 = -1.0 / 5.0, c3 = 4.0 / 105.0,
                            c4 = -1.0 / 280.0;
    const Axis& ax = f.grid.axes()[axis_idx];
    const std::size_t n = ax.n;
    const std::size_t after = f.stride(axis_idx);
    const std::size_t before = f.data.size() / (n * after);
    const double invd = 1.0 / ax.spacing();
    std::vector<double> out(f.data.size());
    auto at = [&](std::size_t b, long k, std::size_t t) {
        const long nn = static_cast<long>(n);
        k %= nn;
        if (k < 0) k += nn;
        return f.data[(b * n + static_cast<std::size_t>(k)) * after + t].real();
    };
    for (std::size_t b = 0; b < before; ++b)
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t t = 0; t < after; ++t) {
                const long kk = static_cast<long>(k);
                const double v = c1 * (at(b, kk + 1, t) - at(b, kk - 1, t)) +
                                 c2 * (at(b, kk + 2, t) - at(b, kk - 2, t)) +
                                 c3 * (at(b, kk + 3, t) - at(b, kk - 3, t)) +
                                 c4 * (at(b, kk + 4, t) - at(b, kk - 4, t));
                out[(b * n + k) * after + t] = v * invd;
            }
    return out;
}

} // namespace

double extended_liouville_residual(const Field& f, const HamiltonianModel& m, double t,
                                   const Field* dtf) {
    require_all_direct(f, "extended_liouville_residual");
    if (!f.grid.has(AxisLabel::omega))
        throw ConfigError("extended_liouville_residual requires an (x,p,omega) field");
    if (dtf) require_same_grid(f, *dtf);
    m.validate();

    const PhaseGrid& g = f.grid;
    const std::size_t ix = g.axis_index(AxisLabel::x);
    const std::size_t ip = g.axis_index(AxisLabel::p);
    const std::size_t io = g.axis_index(AxisLabel::omega);
    const Axis& ax = g.axes()[ix];
    const Axis& ap = g.axes()[ip];
    const Axis& ao = g.axes()[io];

    const std::vector<double> dxF = fd8(f, ix);
    const std::vector<double> dpF = fd8(f, ip);
    const std::vector<double> dwF = fd8(f, io);

    // model derivatives
    std::vector<double> dpT(ap.n), dxU(ax.n), dtT(ap.n), dtU(ax.n);
    {
        std::vector<double> pv(ap.n), tv(ap.n, t);
        for (std::size_t j = 0; j < ap.n; ++j) pv[j] = ap.value(j);
        auto p1 = expr::Program::compile(expr::diff(m.T, "p"), std::vector<std::string>{"p", "t"}, m.params);
        auto p2 = expr::Program::compile(expr::diff(m.T, "t"), std::vector<std::string>{"p", "t"}, m.params);
        const double* in[2] = {pv.data(), tv.data()};
        p1.run(std::span<const double* const>(in, 2), dpT.data(), ap.n);
        p2.run(std::span<const double* const>(in, 2), dtT.data(), ap.n);
    }
    {
        std::vector<double> xv(ax.n), tv(ax.n, t);
        for (std::size_t i = 0; i < ax.n; ++i) xv[i] = ax.value(i);
        auto p1 = expr::Program::compile(expr::diff(m.U, "x"), std::vector<std::string>{"x", "t"}, m.params);
        auto p2 = expr::Program::compile(expr::diff(m.U, "t"), std::vector<std::string>{"x", "t"}, m.params);
        const double* in[2] = {xv.data(), tv.data()};
        p1.run(std::span<const double* const>(in, 2), dxU.data(), ax.n);
        p2.run(std::span<const double* const>(in, 2), dtU.data(), ax.n);
    }

    const std::size_t sx = f.stride(ix), sp = f.stride(ip), so = f.stride(io);
    double rmax = 0.0, dmax = 0.0;
    for (std::size_t i = ax.n / 4; i < 3 * ax.n / 4; ++i)
        for (std::size_t j = ap.n / 4; j < 3 * ap.n / 4; ++j) {
            const double dtH_xp = dtT[j] + dtU[i];
            for (std::size_t k = ao.n / 4; k < 3 * ao.n / 4; ++k) {
                const std::size_t idx = i * sx + j * sp + k * so;
                const double t_brk_x = dxF[idx] * dpT[j];
                const double t_brk_p = dpF[idx] * dxU[i];
                const double t_omega = dtH_xp * dwF[idx];
                const double t_time = dtf ? dtf->data[idx].real() : 0.0;
                const double R = t_time + (t_brk_x - t_brk_p) + t_omega;
                const double D = std::abs(t_brk_x) + std::abs(t_brk_p) +
                                 std::abs(t_omega) + std::abs(t_time);
                rmax = std::max(rmax, std::abs(R));
                dmax = std::max(dmax, D);
            }
        }
    return rmax / std::max(dmax, 1e-300);
}

} // namespace phasesim::observables
