#pragma once

#include "phasesim/expr.hpp"
#include "phasesim/grid.hpp"
#include "phasesim/kernels.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>

namespace phasesim::propagator {

using expr::HamiltonianModel;

enum class EvolutionMode { moyal, liouville, extended_quantum, extended_classical, olavo };

const char* to_string(EvolutionMode m);
EvolutionMode mode_from(const std::string& s);

/// Minimum-uncertainty Gaussian state, total integral 1 on the grid.
/// sigma_p = hbar / (2 sigma_x). On extended grids the omega axis carries a
/// Gaussian profile centered at omega_center with width omega_sigma.
/// Support closer than 2 sigma to a boundary is an error; closer than
/// 4 sigma appends a warning to *warning when given.
Field initial_gaussian(const PhaseGrid& g, double x0, double p0, double sigma_x,
                       double omega_center = 0.0, double omega_sigma = 0.5,
                       std::string* warning = nullptr);

/// Weyl transform of a configuration-space wavefunction sampled on the
/// grid's x axis: W(x,p) = (1/2 pi hbar) Int psi*(x+s/2) psi(x-s/2) e^{ips/hbar} ds.
/// Shifted samples come from the spectral interpolant; the s quadrature
/// spans the x domain extent. psi must be normalized to 1e-6.
Field wigner_from_wavefunction(std::span<const cplx> psi, const PhaseGrid& g);

struct ObservableSummary {
    double total_integral = 0.0;
    double l2_norm = 0.0;
    double max_abs_imag = 0.0;
    double mean_x = 0.0;
    double mean_p = 0.0;
};

ObservableSummary summarize(const Field& f);

struct SnapshotEvent {
    std::size_t step;
    double time;
    const Field& field;
    ObservableSummary summary;
};

using SnapshotSink = std::function<void(const SnapshotEvent&)>;

/// Strang-split spectral stepper. The kick order is potential half-step,
/// kinetic full step, potential half-step; non-stationary kernels are
/// frozen at the step midpoint t + dt/2. Kick factors are cached and only
/// rebuilt when the midpoint time changes (never, for stationary models).
class Propagator {
public:
    Propagator(EvolutionMode mode, HamiltonianModel model, PhaseGrid grid, double dt);

    Field step(Field f, double t);
    /// Runs n_steps steps from t0, invoking the sink at step 0, every
    /// snapshot_every steps and at the final step (snapshot_every == 0
    /// disables snapshots). NaN detection runs at snapshot intervals.
    Field evolve(Field f, double t0, std::size_t n_steps, std::size_t snapshot_every,
                 const SnapshotSink& sink);

    EvolutionMode mode() const { return mode_; }
    double dt() const { return dt_; }

private:
    void ensure_factors(double t_mid);
    Field apply_kick(Field f, const Field& factor, bool kinetic) const;

    EvolutionMode mode_;
    HamiltonianModel model_;
    PhaseGrid grid_;
    double dt_;
    bool extended_;
    bool stationary_;
    std::optional<double> factors_time_;
    Field fac_u_half_;
    Field fac_t_full_;
};

/// One Strang step of the given mode (convenience wrapper over Propagator).
Field step(const Field& f, EvolutionMode mode, const HamiltonianModel& m, double t,
           double dt);

Field evolve(const Field& f, EvolutionMode mode, const HamiltonianModel& m, double t0,
             double dt, std::size_t n_steps, std::size_t snapshot_every,
             const SnapshotSink& sink);

/// One Strang step of the phase-space amplitude equation: kinetic factor
/// exp(-(i/hbar) T(p + hbar*lam/2) dt) in (lambda, p), potential factor
/// exp(-(i/hbar) U(x - hbar*th/2) dt) in (x, theta).
Field step_olavo(const Field& psi, const HamiltonianModel& m, double t, double dt);

} // namespace phasesim::propagator
