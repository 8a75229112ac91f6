#include "phasesim/characteristics.hpp"

#include <cmath>

namespace phasesim::characteristics {

namespace {

using expr::Program;

struct OrdinaryRhs {
    Program dTdp; // over (p, t)
    Program dUdx; // over (x, t)

    explicit OrdinaryRhs(const HamiltonianModel& m)
        : dTdp(Program::compile(expr::diff(m.T, "p"), std::vector<std::string>{"p", "t"},
                                m.params)),
          dUdx(Program::compile(expr::diff(m.U, "x"), std::vector<std::string>{"x", "t"},
                                m.params)) {}

    // derivatives for a batch of points, SoA
    void operator()(const std::vector<double>& x, const std::vector<double>& p, double t,
                    std::vector<double>& xdot, std::vector<double>& pdot,
                    std::vector<double>& tbuf) {
        const std::size_t n = x.size();
        tbuf.assign(n, t);
        const double* in_p[2] = {p.data(), tbuf.data()};
        dTdp.run(std::span<const double* const>(in_p, 2), xdot.data(), n);
        const double* in_x[2] = {x.data(), tbuf.data()};
        dUdx.run(std::span<const double* const>(in_x, 2), pdot.data(), n);
        for (std::size_t i = 0; i < n; ++i) pdot[i] = -pdot[i];
    }
};

void rk4_batch(OrdinaryRhs& rhs, std::vector<double>& x, std::vector<double>& p,
               double t, double dt) {
    const std::size_t n = x.size();
    static thread_local std::vector<double> k1x, k1p, k2x, k2p, k3x, k3p, k4x, k4p, xs, ps, tb;
    k1x.resize(n); k1p.resize(n); k2x.resize(n); k2p.resize(n);
    k3x.resize(n); k3p.resize(n); k4x.resize(n); k4p.resize(n);
    xs.resize(n); ps.resize(n); tb.resize(n);

    rhs(x, p, t, k1x, k1p, tb);
    for (std::size_t i = 0; i < n; ++i) { xs[i] = x[i] + 0.5 * dt * k1x[i]; ps[i] = p[i] + 0.5 * dt * k1p[i]; }
    rhs(xs, ps, t + 0.5 * dt, k2x, k2p, tb);
    for (std::size_t i = 0; i < n; ++i) { xs[i] = x[i] + 0.5 * dt * k2x[i]; ps[i] = p[i] + 0.5 * dt * k2p[i]; }
    rhs(xs, ps, t + 0.5 * dt, k3x, k3p, tb);
    for (std::size_t i = 0; i < n; ++i) { xs[i] = x[i] + dt * k3x[i]; ps[i] = p[i] + dt * k3p[i]; }
    rhs(xs, ps, t + dt, k4x, k4p, tb);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] += dt / 6.0 * (k1x[i] + 2.0 * (k2x[i] + k3x[i]) + k4x[i]);
        p[i] += dt / 6.0 * (k1p[i] + 2.0 * (k2p[i] + k3p[i]) + k4p[i]);
    }
}

} // namespace

OrdinaryTrajectory integrate_ordinary(const HamiltonianModel& m, double x0, double p0,
                                      double t0, double t1, double dt) {
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    m.validate();
    OrdinaryRhs rhs(m);
    OrdinaryTrajectory traj;
    std::vector<double> x{x0}, p{p0};
    double t = t0;
    traj.t.push_back(t);
    traj.state.push_back({x0, p0});
    const auto nsteps = static_cast<std::size_t>(std::llround((t1 - t0) / dt));
    for (std::size_t s = 0; s < nsteps; ++s) {
        rk4_batch(rhs, x, p, t, dt);
        t = t0 + double(s + 1) * dt;
        if (!std::isfinite(x[0]) || !std::isfinite(p[0]))
            throw NumericError("trajectory left the finite domain");
        traj.t.push_back(t);
        traj.state.push_back({x[0], p[0]});
    }
    return traj;
}

ExtendedTrajectory integrate_extended(const HamiltonianModel& m, const ExtendedState& s0,
                                      double sa, double sb, double ds) {
    if (!(ds > 0.0)) throw ConfigError("ds must be positive");
    m.validate();

    Program dTdp = Program::compile(expr::diff(m.T, "p"), std::vector<std::string>{"p", "t"}, m.params);
    Program dUdx = Program::compile(expr::diff(m.U, "x"), std::vector<std::string>{"x", "t"}, m.params);
    Program dTdt = Program::compile(expr::diff(m.T, "t"), std::vector<std::string>{"p", "t"}, m.params);
    Program dUdt = Program::compile(expr::diff(m.U, "t"), std::vector<std::string>{"x", "t"}, m.params);

    auto rhs = [&](const ExtendedState& y, double out[4]) {
        const double pt[2] = {y.p, y.t};
        const double xt[2] = {y.x, y.t};
        out[0] = dTdp.run1(std::span<const double>(pt, 2));
        out[1] = -dUdx.run1(std::span<const double>(xt, 2));
        out[2] = dTdt.run1(std::span<const double>(pt, 2)) + dUdt.run1(std::span<const double>(xt, 2));
        out[3] = 1.0;
    };

    ExtendedTrajectory traj;
    ExtendedState y = s0;
    double s = sa;
    traj.s.push_back(s);
    traj.state.push_back(y);
    const auto nsteps = static_cast<std::size_t>(std::llround((sb - sa) / ds));
    for (std::size_t n = 0; n < nsteps; ++n) {
        double k1[4], k2[4], k3[4], k4[4];
        rhs(y, k1);
        ExtendedState y2{y.x + 0.5 * ds * k1[0], y.p + 0.5 * ds * k1[1],
                         y.E + 0.5 * ds * k1[2], y.t + 0.5 * ds * k1[3]};
        rhs(y2, k2);
        ExtendedState y3{y.x + 0.5 * ds * k2[0], y.p + 0.5 * ds * k2[1],
                         y.E + 0.5 * ds * k2[2], y.t + 0.5 * ds * k2[3]};
        rhs(y3, k3);
        ExtendedState y4{y.x + ds * k3[0], y.p + ds * k3[1], y.E + ds * k3[2],
                         y.t + ds * k3[3]};
        rhs(y4, k4);
        y.x += ds / 6.0 * (k1[0] + 2.0 * (k2[0] + k3[0]) + k4[0]);
        y.p += ds / 6.0 * (k1[1] + 2.0 * (k2[1] + k3[1]) + k4[1]);
        y.E += ds / 6.0 * (k1[2] + 2.0 * (k2[2] + k3[2]) + k4[2]);
        y.t += ds / 6.0 * (k1[3] + 2.0 * (k2[3] + k3[3]) + k4[3]);
        s = sa + double(n + 1) * ds;
        if (!std::isfinite(y.x) || !std::isfinite(y.p) || !std::isfinite(y.E))
            throw NumericError("extended trajectory left the finite domain");
        traj.s.push_back(s);
        traj.state.push_back(y);
    }
    return traj;
}

std::vector<Point2> transport_points(const HamiltonianModel& m,
                                     const std::vector<Point2>& pts,
                                     double t0, double t1, double dt) {
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    m.validate();
    OrdinaryRhs rhs(m);
    std::vector<double> x(pts.size()), p(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        x[i] = pts[i].x;
        p[i] = pts[i].p;
    }
    const bool forward = t1 >= t0;
    const double step = forward ? dt : -dt;
    const auto nsteps = static_cast<std::size_t>(std::llround(std::abs(t1 - t0) / dt));
    double t = t0;
    for (std::size_t s = 0; s < nsteps; ++s) {
        rk4_batch(rhs, x, p, t, step);
        t = t0 + double(s + 1) * step;
    }
    std::vector<Point2> out(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(p[i]))
            throw NumericError("transported point left the finite domain");
        out[i] = {x[i], p[i]};
    }
    return out;
}

DomainSpec DomainSpec::rectangle(double x_lo, double x_hi, double p_lo, double p_hi,
                                 std::string label) {
    DomainSpec d;
    d.shape = Shape::rectangle;
    d.x_lo = x_lo; d.x_hi = x_hi; d.p_lo = p_lo; d.p_hi = p_hi;
    d.label = std::move(label);
    return d;
}

DomainSpec DomainSpec::disc(double cx, double cp, double r, std::string label) {
    DomainSpec d;
    d.shape = Shape::disc;
    d.cx = cx; d.cp = cp; d.r = r;
    d.label = std::move(label);
    return d;
}

bool DomainSpec::contains(double x, double p) const {
    if (shape == Shape::rectangle)
        return x >= x_lo && x <= x_hi && p >= p_lo && p <= p_hi;
    const double dx = x - cx, dp = p - cp;
    return dx * dx + dp * dp <= r * r;
}

DomainQuadrature make_domain_quadrature(const PhaseGrid& g, const DomainSpec& d) {
    const Axis& ax = g.axis(AxisLabel::x);
    const Axis& ap = g.axis(AxisLabel::p);
    DomainQuadrature q;
    q.weight = ax.spacing() * ap.spacing();
    for (std::size_t i = 0; i < ax.n; ++i)
        for (std::size_t j = 0; j < ap.n; ++j) {
            const double x = ax.value(i), p = ap.value(j);
            if (d.contains(x, p)) q.points.push_back({x, p});
        }
    if (q.points.empty())
        throw ConfigError("domain '" + d.label + "' contains no grid points");
    return q;
}

} // namespace phasesim::characteristics
