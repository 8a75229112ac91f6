#include "phasesim/config.hpp"

#include "phasesim/observables.hpp"

#include <fstream>
#include <sstream>

namespace phasesim::config {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
        return s.substr(1, s.size() - 2);
    return s;
}

[[noreturn]] void fail(const std::string& origin, std::size_t lineno, const std::string& msg) {
    throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + msg);
}

double parse_double(const std::string& origin, std::size_t lineno, const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) fail(origin, lineno, "bad number '" + s + "'");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        fail(origin, lineno, "bad number '" + s + "'");
    }
}

std::size_t parse_size(const std::string& origin, std::size_t lineno, const std::string& s) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(s, &used);
        if (used != s.size() || v < 0) fail(origin, lineno, "bad count '" + s + "'");
        return static_cast<std::size_t>(v);
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        fail(origin, lineno, "bad count '" + s + "'");
    }
}

} // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    std::size_t lineno = 0;
    bool saw_omega_center = false;

    while (std::getline(in, line)) {
        ++lineno;
        // strip comments outside quotes
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') quoted = !quoted;
            else if (line[i] == '#' && !quoted) {
                line = line.substr(0, i);
                break;
            }
        }
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            const auto e = line.find(']');
            if (e == std::string::npos) fail(origin, lineno, "unterminated section header");
            section = line.substr(1, e - 1);
            if (section != "run" && section != "grid" && section != "model" &&
                section != "initial" && section != "checks")
                fail(origin, lineno, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(origin, lineno, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) fail(origin, lineno, "empty key or value");

        if (section == "run") {
            if (key == "mode") cfg.mode = value;
            else if (key == "dt") cfg.dt = parse_double(origin, lineno, value);
            else if (key == "steps") cfg.steps = parse_size(origin, lineno, value);
            else if (key == "snapshot_every") cfg.snapshot_every = parse_size(origin, lineno, value);
            else if (key == "out") cfg.out_dir = value;
            else if (key == "seed") cfg.seed = parse_size(origin, lineno, value);
            else if (key == "run_id") cfg.run_id = value;
            else fail(origin, lineno, "unknown key '" + key + "' in [run]");
        } else if (section == "grid") {
            if (key == "hbar") cfg.hbar = parse_double(origin, lineno, value);
            else if (key == "axis") {
                std::istringstream as(value);
                std::string label;
                std::string ns, mins, maxs;
                if (!(as >> label >> ns >> mins >> maxs))
                    fail(origin, lineno, "axis needs: label n min max");
                AxisSpec spec{axis_label_from(label), parse_size(origin, lineno, ns),
                              parse_double(origin, lineno, mins),
                              parse_double(origin, lineno, maxs)};
                cfg.axes.push_back(spec);
            } else fail(origin, lineno, "unknown key '" + key + "' in [grid]");
        } else if (section == "model") {
            if (key == "T") cfg.T_text = unquote(value);
            else if (key == "U") cfg.U_text = unquote(value);
            else if (key == "param") {
                std::istringstream ps(value);
                std::string name, num;
                if (!(ps >> name >> num)) fail(origin, lineno, "param needs: name value");
                cfg.params[name] = parse_double(origin, lineno, num);
            } else fail(origin, lineno, "unknown key '" + key + "' in [model]");
        } else if (section == "initial") {
            if (key == "type") cfg.initial_type = value;
            else if (key == "x0") cfg.x0 = parse_double(origin, lineno, value);
            else if (key == "p0") cfg.p0 = parse_double(origin, lineno, value);
            else if (key == "sigma_x") cfg.sigma_x = parse_double(origin, lineno, value);
            else if (key == "omega_center") {
                if (value != "auto") {
                    cfg.omega_center = parse_double(origin, lineno, value);
                }
                saw_omega_center = true;
            } else if (key == "omega_sigma")
                cfg.omega_sigma = parse_double(origin, lineno, value);
            else if (key == "psi_re") cfg.psi_re = unquote(value);
            else if (key == "psi_im") cfg.psi_im = unquote(value);
            else fail(origin, lineno, "unknown key '" + key + "' in [initial]");
        } else if (section == "checks") {
            if (key == "check") {
                std::istringstream cs(value);
                CheckSpec c;
                std::string tols;
                if (!(cs >> c.name >> tols)) fail(origin, lineno, "check needs: name tol [args...]");
                c.tol = parse_double(origin, lineno, tols);
                std::string arg;
                while (cs >> arg) c.args.push_back(parse_double(origin, lineno, arg));
                cfg.checks.push_back(c);
            } else fail(origin, lineno, "unknown key '" + key + "' in [checks]");
        } else {
            fail(origin, lineno, "key outside of any section");
        }
    }
    (void)saw_omega_center;
    return cfg;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path.string());
}

ValidatedRun validate(const RunConfig& cfg) {
    ValidatedRun v{cfg, {}, {}, propagator::mode_from(cfg.mode)};
    if (cfg.axes.empty()) throw ConfigError("config defines no grid axes");
    v.grid = make_grid(cfg.axes, cfg.hbar);
    v.model = expr::HamiltonianModel::from_strings(cfg.T_text, cfg.U_text, cfg.params);
    if (!(cfg.dt > 0.0) && cfg.steps > 0) throw ConfigError("dt must be positive");

    const bool extended = v.mode == propagator::EvolutionMode::extended_quantum ||
                          v.mode == propagator::EvolutionMode::extended_classical;
    if (extended && !v.grid.has(AxisLabel::omega))
        throw ConfigError("extended modes require an omega axis in [grid]");
    if (!extended && v.grid.has(AxisLabel::omega))
        throw ConfigError("mode '" + cfg.mode + "' expects exactly the (x, p) axes");

    if (cfg.initial_type != "gaussian" && cfg.initial_type != "wavefunction" &&
        cfg.initial_type != "amplitude")
        throw ConfigError("unknown initial state type '" + cfg.initial_type + "'");
    if (cfg.initial_type == "amplitude") {
        if (v.mode != propagator::EvolutionMode::olavo)
            throw ConfigError("amplitude initial states are for olavo mode");
        if (cfg.psi_re.empty())
            throw ConfigError("amplitude initial state needs psi_re (and optional psi_im)");
        expr::parse_expression(cfg.psi_re);
        if (!cfg.psi_im.empty()) expr::parse_expression(cfg.psi_im);
    }
    for (const auto& c : cfg.checks)
        if (c.name.empty()) throw ConfigError("check with empty name");
    return v;
}

Field build_initial_state(const ValidatedRun& v, std::string* warning) {
    const RunConfig& cfg = v.cfg;
    if (cfg.initial_type == "gaussian") {
        double oc = 0.0;
        if (v.grid.has(AxisLabel::omega))
            oc = cfg.omega_center ? *cfg.omega_center
                                  : v.model.eval_H(cfg.x0, cfg.p0, 0.0);
        Field f = propagator::initial_gaussian(v.grid, cfg.x0, cfg.p0, cfg.sigma_x, oc,
                                               cfg.omega_sigma, warning);
        if (v.mode == propagator::EvolutionMode::olavo) {
            // amplitude whose density is the minimum-uncertainty Gaussian:
            // psi = sqrt(W), real positive
            for (auto& z : f.data) z = cplx{std::sqrt(std::max(z.real(), 0.0)), 0.0};
            const double n2 = observables::l2_norm(f);
            for (auto& z : f.data) z /= n2;
        }
        return f;
    }
    if (cfg.initial_type == "amplitude") {
        Field f = Field::zeros(v.grid);
        const auto re = expr::parse_expression(cfg.psi_re);
        const auto im = cfg.psi_im.empty() ? expr::make_number(0.0)
                                           : expr::parse_expression(cfg.psi_im);
        const Axis& ax = v.grid.axis(AxisLabel::x);
        const Axis& ap = v.grid.axis(AxisLabel::p);
        const std::size_t sx = f.stride(v.grid.axis_index(AxisLabel::x));
        const std::size_t sp = f.stride(v.grid.axis_index(AxisLabel::p));
        auto b = cfg.params;
        for (std::size_t i = 0; i < ax.n; ++i)
            for (std::size_t j = 0; j < ap.n; ++j) {
                b["x"] = ax.value(i);
                b["p"] = ap.value(j);
                b["t"] = 0.0;
                f.data[i * sx + j * sp] = cplx{expr::eval(re, b), expr::eval(im, b)};
            }
        const double n2 = observables::l2_norm(f);
        if (!(n2 > 0.0)) throw ConfigError("amplitude initial state is identically zero");
        for (auto& z : f.data) z /= n2;
        return f;
    }
    // wavefunction: Gaussian psi over x at (x0, p0) with width sigma_x,
    // turned into W by the Weyl transform
    const Axis& ax = v.grid.axis(AxisLabel::x);
    std::vector<cplx> psi(ax.n);
    double norm = 0.0;
    for (std::size_t i = 0; i < ax.n; ++i) {
        const double u = (ax.value(i) - cfg.x0) / cfg.sigma_x;
        const double mag = std::exp(-0.25 * u * u);
        const double ang = cfg.p0 * ax.value(i) / v.grid.hbar();
        psi[i] = cplx{mag * std::cos(ang), mag * std::sin(ang)};
        norm += std::norm(psi[i]);
    }
    norm = std::sqrt(norm * ax.spacing());
    for (auto& z : psi) z /= norm;
    return propagator::wigner_from_wavefunction(psi, v.grid);
}

} // namespace phasesim::config
