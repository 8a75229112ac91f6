#pragma once

#include "phasesim/expr.hpp"
#include "phasesim/grid.hpp"

#include <functional>
#include <vector>

namespace phasesim::characteristics {

using expr::HamiltonianModel;

struct Point2 {
    double x;
    double p;
};

struct ExtendedState {
    double x;
    double p;
    double E;
    double t;
};

struct OrdinaryTrajectory {
    std::vector<double> t;
    std::vector<Point2> state;
};

struct ExtendedTrajectory {
    std::vector<double> s;
    std::vector<ExtendedState> state;
};

/// Classic fixed-step RK4 on xdot = dH/dp, pdot = -dH/dx with the
/// derivatives taken symbolically from the model. Samples every step,
/// including both endpoints. Aborts on non-finite state.
OrdinaryTrajectory integrate_ordinary(const HamiltonianModel& m, double x0, double p0,
                                      double t0, double t1, double dt);

/// RK4 on the extended system xdot = dH/dp, pdot = -dH/dx, Edot = dH/dt,
/// tdot = 1, parameterized by s.
ExtendedTrajectory integrate_extended(const HamiltonianModel& m, const ExtendedState& s0,
                                      double sa, double sb, double ds);

/// Advances a point cloud with the ordinary flow (batched RK4).
std::vector<Point2> transport_points(const HamiltonianModel& m,
                                     const std::vector<Point2>& pts,
                                     double t0, double t1, double dt);

/// Phase-space domains used for P_G / S_G style functionals.
struct DomainSpec {
    enum class Shape { rectangle, disc };
    Shape shape = Shape::disc;
    // rectangle: [x_lo, x_hi] x [p_lo, p_hi]; disc: center (cx, cp), radius r
    double x_lo = 0, x_hi = 0, p_lo = 0, p_hi = 0;
    double cx = 0, cp = 0, r = 0;
    std::string label;

    static DomainSpec rectangle(double x_lo, double x_hi, double p_lo, double p_hi,
                                std::string label = "rect");
    static DomainSpec disc(double cx, double cp, double r, std::string label = "disc");
    bool contains(double x, double p) const;
};

/// Fixed quadrature over a domain: the (x, p) grid points inside it at t=0,
/// each carrying the cell volume as weight. Transporting the points with
/// the flow realizes integrals over the transported domain image.
struct DomainQuadrature {
    std::vector<Point2> points;
    double weight = 0.0;
};

DomainQuadrature make_domain_quadrature(const PhaseGrid& g, const DomainSpec& d);

} // namespace phasesim::characteristics
