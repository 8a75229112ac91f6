#pragma once

#include "phasesim/expr.hpp"
#include "phasesim/grid.hpp"
#include "phasesim/propagator.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace phasesim::config {

struct CheckSpec {
    std::string name;
    double tol = 0.0;
    std::vector<double> args;
};

/// Parsed run configuration. The file format is a flat sectioned text
/// format ([run], [grid], [model], [initial], [checks]); expressions are
/// carried as quoted strings. See docs/formats.md.
struct RunConfig {
    // [run]
    std::string mode = "moyal";
    double dt = 1e-3;
    std::size_t steps = 0;
    std::size_t snapshot_every = 0;
    std::string out_dir;
    std::uint64_t seed = 0;
    std::string run_id;

    // [grid]
    double hbar = 1.0;
    std::vector<AxisSpec> axes;

    // [model]
    std::string T_text = "p^2/(2*m)";
    std::string U_text = "0";
    std::map<std::string, double> params;

    // [initial]
    std::string initial_type = "gaussian"; // gaussian | wavefunction | amplitude
    double x0 = 0.0, p0 = 0.0;
    double sigma_x = 1.0;
    std::optional<double> omega_center; // empty = auto (H(x0, p0, t0))
    double omega_sigma = 0.5;
    std::string psi_re, psi_im; // amplitude/wavefunction initial expressions

    // [checks]
    std::vector<CheckSpec> checks;
};

RunConfig parse_config_text(const std::string& text, const std::string& origin);
RunConfig parse_config_file(const std::filesystem::path& path);

struct ValidatedRun {
    RunConfig cfg;
    expr::HamiltonianModel model;
    PhaseGrid grid;
    propagator::EvolutionMode mode;
};

/// Builds and cross-checks the model, grid and mode without running.
ValidatedRun validate(const RunConfig& cfg);

/// Initial state per the config (gaussian, wavefunction over x, or a
/// complex amplitude from psi_re / psi_im expressions over (x, p)).
Field build_initial_state(const ValidatedRun& v, std::string* warning = nullptr);

} // namespace phasesim::config
