#pragma once

#include "phasesim/characteristics.hpp"
#include "phasesim/expr.hpp"
#include "phasesim/grid.hpp"

#include <vector>

namespace phasesim::observables {

using characteristics::DomainSpec;
using characteristics::Point2;
using expr::HamiltonianModel;

/// Midpoint-rule quadrature (exact for band-limited periodic samples).
/// All of these require the field to be in all-direct representation.
double total_integral(const Field& f);
double l2_norm(const Field& f);
double max_abs_imag(const Field& f);

/// Marginal onto one axis: integrate out every other axis.
std::vector<double> marginal(const Field& f, AxisLabel axis);

/// Joint marginal onto two axes (row-major, `a` major); identity for 2-D
/// fields in (a, b) order.
std::vector<double> marginal2(const Field& f, AxisLabel a, AxisLabel b);

struct MomentTerm {
    AxisLabel axis;
    int power = 1;
    double center = 0.0;
};

/// Mixed moment of the product of (u_axis - center)^power factors.
double moment(const Field& f, const std::vector<MomentTerm>& terms);

/// P_G = integral of f over the domain (indicator quadrature on the grid).
double probability_over_domain(const Field& f, const DomainSpec& d);

/// S_G = -integral of f ln f over the domain. Samples below -1e-8 are an
/// error (negativity makes the entropy undefined); samples in (-1e-8, 0]
/// are clamped to 1e-300 and contribute nothing.
double entropy_over_domain(const Field& f, const DomainSpec& d);

/// Field value at an off-grid (x, p) point: tensor 8-point Lagrange
/// interpolation on the periodic grid (real part). 2-D fields only.
double value_at(const Field& f, double x, double p);

/// Integrals over a transported domain image: the quadrature points of the
/// initial domain, advanced by the characteristics flow, paired with the
/// field at the current time.
double probability_at_points(const Field& f, const std::vector<Point2>& pts, double weight);
double entropy_at_points(const Field& f, const std::vector<Point2>& pts, double weight);

/// {A,B} = dA/dx dB/dp - dA/dp dB/dx via spectral derivatives.
Field poisson_bracket(const Field& A, const Field& B);

/// {A,B}* = {A,B} + dA/dE dB/dt - dA/dt dB/dE. The energy coordinate E is
/// the omega axis; grid fields carry no t axis, so the d/dt slots accept
/// caller-supplied sample fields (null means identically zero).
Field extended_poisson_bracket(const Field& A, const Field& B,
                               const Field* dtA = nullptr, const Field* dtB = nullptr);

/// [A,B] = (A*B - B*A)/(i hbar) with the star product evaluated by the
/// exact shifted-argument spectral form (dense twisted convolution over
/// mode pairs, no series truncation). Cost is O((nx*np)^2); intended for
/// diagnostic grids.
Field moyal_bracket(const Field& A, const Field& B, double hbar);

/// Integral of (T(p,t) + U(x,t)) |psi|^2 dx dp for a normalized amplitude.
double olavo_energy(const Field& psi, const HamiltonianModel& m, double t = 0.0);

struct GibbsSpec {
    double beta = 1.0;
    double Z = 0.0; // filled by gibbs_state
};

/// f = exp(-beta (H(x,p,t) - Omega)) / Z, normalized on the (x,p,Omega)
/// grid; Z is returned through the spec.
Field gibbs_state(const HamiltonianModel& m, const PhaseGrid& g, GibbsSpec& spec, double t);

/// Max-norm defect of the extended Liouville equation,
///   R = df/dt + {f, H} + dH/dt * df/dOmega,
/// normalized by the largest term magnitude over the interior (central
/// half per axis). df/dt is caller-supplied (null for stationarity tests).
/// Field derivatives use 8th-order centered stencils: the interesting
/// inputs (Gibbs exponentials) are not periodic, which rules out spectral
/// differentiation along omega.
double extended_liouville_residual(const Field& f, const HamiltonianModel& m, double t,
                                   const Field* dtf = nullptr);

} // namespace phasesim::observables
