#pragma once

#include "phasesim/expr.hpp"
#include "phasesim/grid.hpp"

#include <map>
#include <string>

namespace phasesim::kernels {

using expr::HamiltonianModel;

enum class Kind { quantum, classical };
enum class Term { kinetic, potential };

struct KernelSpec {
    Kind kind;
    Term term;
    bool extended = false;
    double time = 0.0;
};

/// Multiplicative propagation kernels sampled over mixed-representation
/// grids. Conjugate axes are sampled on the FFT-order ladder so the result
/// multiplies transformed data directly. All kernels are purely imaginary
/// by construction (values are stored as i * <real sample>).
///
/// Kinetic kernels live on (lambda, p[, tau]):
///   quantum   K_T = (T(p + h*lam/2 [, t + h*tau/2]) - T(p - h*lam/2 [, t - h*tau/2])) / (i*h)
///   classical K_T = -i * (lam * dT/dp + tau * dT/dt)
/// Potential kernels live on (x, theta[, tau]):
///   quantum   K_U = (U(x - h*th/2 [, t + h*tau/2]) - U(x + h*th/2 [, t - h*tau/2])) / (i*h)
///   classical K_U = +i * (th * dU/dx - tau * dU/dt)
Field quantum_kinetic_kernel(const HamiltonianModel& m, const PhaseGrid& g,
                             double t, bool extended);
Field quantum_potential_kernel(const HamiltonianModel& m, const PhaseGrid& g,
                               double t, bool extended);
Field classical_kinetic_kernel(const HamiltonianModel& m, const PhaseGrid& g,
                               double t, bool extended);
Field classical_potential_kernel(const HamiltonianModel& m, const PhaseGrid& g,
                                 double t, bool extended);

Field build_kernel(const KernelSpec& spec, const HamiltonianModel& m, const PhaseGrid& g);

/// Single-evaluation symbols for the phase-space amplitude propagator:
/// T(p + h*lam/2, t) on (lambda, p) and U(x - h*th/2, t) on (x, theta),
/// stored in the real part.
Field olavo_kinetic_symbol(const HamiltonianModel& m, const PhaseGrid& g, double t);
Field olavo_potential_symbol(const HamiltonianModel& m, const PhaseGrid& g, double t);

/// Kernel cache keyed by (spec, hbar, model, grid). Stationary models hit
/// the cache on every step; time-dependent models rebuild when t changes.
class KernelCache {
public:
    const Field& get(const KernelSpec& spec, const HamiltonianModel& m, const PhaseGrid& g);
    void clear() { cache_.clear(); }
    std::size_t size() const { return cache_.size(); }

private:
    std::map<std::string, Field> cache_;
};

} // namespace phasesim::kernels
