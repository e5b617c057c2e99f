#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dispersion.hpp"
#include "errors.hpp"
#include "poling.hpp"
#include "solver_approx.hpp"
#include "solver_exact.hpp"
#include "solver_ode.hpp"

namespace chirpsq {

using json = nlohmann::json;

struct DispersionConfig {
    std::string mode = "quadratic";
    double pump_wavelength_nm = 532.0;
    double temperature_c = sellmeier_mgo_cln::reference_temperature_c;
    double alpha = 735.0;
    double beta = 901.0;
};

struct ProfileConfig {
    std::string kind = "linear";
    double length_mm = 4.5;
    double k0 = 894.0;
    double chirp = 38.5;
    std::vector<double> band_edges{0.25, 0.5};  // quadratic_hyperbolic: sorted detunings
    std::string direction = "decreasing";
    std::string table_path;
};

struct CouplingConfig {
    std::optional<double> nu;
    std::optional<double> nu0;
    std::optional<double> gamma;
    std::optional<double> phi0;  // empty: chosen so that psi_L(phi0_reference_x) = 0
    double phi0_reference_x = 0.5;
};

struct GridConfig {
    bool symmetric = true;
    double half_width = 0.55;
    double lo = -0.55;
    double hi = 0.55;
    std::size_t points = 1024;
    bool points_explicit = false;  // false: subcommands may pick their own default
};

struct SolverConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    std::size_t max_steps = 2'000'000;
    double x_max = 40.0;
    double wronskian_tolerance = 1e-8;
    std::string layer_phase = "quadratic_fit";
    unsigned threads = 0;
};

struct AnglesConfig {
    double psi_l_reference = 0.5;
    std::optional<double> psi_0_reference;  // empty: same offset as psi_L
};

struct MetricsConfig {
    double band_shrink = 0.02;
    double deflection_threshold = 0.05;
    bool exclude_truncated = false;
};

struct RunConfig {
    DispersionConfig dispersion;
    ProfileConfig profile;
    CouplingConfig coupling;
    GridConfig grid;
    SolverConfig solver;
    AnglesConfig angles;
    MetricsConfig metrics;
    std::vector<std::string> solvers{"exact", "approx"};
    std::string output_prefix = "run";
};

namespace detail {

template <typename T>
void read_opt(const json& j, const char* key, T& out, const std::string& section) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(section + "." + key, e.what());
    }
}

template <typename T>
void read_opt(const json& j, const char* key, std::optional<T>& out, const std::string& section) {
    if (!j.contains(key) || j.at(key).is_null()) return;
    T v{};
    read_opt(j, key, v, section);
    out = v;
}

inline const json& section(const json& root, const char* name) {
    static const json empty = json::object();
    if (!root.contains(name)) return empty;
    if (!root.at(name).is_object()) throw ConfigError(name, "must be an object");
    return root.at(name);
}

}  // namespace detail

/// Checks the cross-field invariants; throws ConfigError naming the field.
inline void validate(const RunConfig& c) {
    const auto& d = c.dispersion;
    if (d.mode != "quadratic" && d.mode != "sellmeier") throw ConfigError("dispersion.mode", "quadratic|sellmeier");
    if (!(d.pump_wavelength_nm > 0.0)) throw ConfigError("dispersion.pump_wavelength_nm", "must be positive");
    if (d.mode == "quadratic" && !(d.alpha > 0.0 && d.beta > 0.0)) {
        throw ConfigError("dispersion.alpha_rad_per_mm", "alpha and beta must be positive");
    }
    const auto& p = c.profile;
    if (p.kind != "linear" && p.kind != "quadratic_hyperbolic" && p.kind != "custom") {
        throw ConfigError("profile.kind", "linear|quadratic_hyperbolic|custom");
    }
    if (p.kind != "custom" && !(p.length_mm > 0.0)) throw ConfigError("profile.L_mm", "must be positive");
    if (p.kind == "quadratic_hyperbolic") {
        if (p.band_edges.size() != 2 || !(p.band_edges[0] > 0.0) || !(p.band_edges[1] > p.band_edges[0]) ||
            !(p.band_edges[1] < 1.0)) {
            throw ConfigError("profile.band_edges_normalized", "need 0 < lo < hi < 1");
        }
        if (p.direction != "decreasing" && p.direction != "increasing") {
            throw ConfigError("profile.direction", "decreasing|increasing");
        }
    }
    if (p.kind == "custom" && p.table_path.empty()) throw ConfigError("profile.table_path", "required for custom");
    const auto& k = c.coupling;
    const int given = int(k.nu.has_value()) + int(k.nu0.has_value()) + int(k.gamma.has_value());
    if (given != 1) throw ConfigError("coupling", "give exactly one of nu, nu0, gamma_rad_per_mm");
    if ((k.nu && *k.nu < 0.0) || (k.nu0 && *k.nu0 < 0.0) || (k.gamma && *k.gamma < 0.0)) {
        throw ConfigError("coupling", "pump parameter must be non-negative");
    }
    if (k.nu && p.kind != "linear") throw ConfigError("coupling.nu", "nu applies to linear profiles; use nu0");
    if (!(std::abs(k.phi0_reference_x) < 1.0)) throw ConfigError("coupling.phi0_reference_x", "must be in (-1, 1)");
    const auto& g = c.grid;
    if (g.points < 64) throw ConfigError("grid.points", "N must be at least 64");
    if (g.symmetric) {
        if (!(g.half_width > 0.0 && g.half_width < 1.0)) throw ConfigError("grid.half_width", "must be in (0, 1)");
    } else if (!(g.lo > -1.0 && g.hi < 1.0 && g.lo < g.hi)) {
        throw ConfigError("grid.lo", "need -1 < lo < hi < 1");
    }
    const auto& s = c.solver;
    if (!(s.rel_tol > 0.0) || !(s.abs_tol >= 0.0)) throw ConfigError("solver.rel_tol", "tolerances must be positive");
    if (s.layer_phase != "quadratic_fit" && s.layer_phase != "exact_layer") {
        throw ConfigError("solver.layer_phase", "quadratic_fit|exact_layer");
    }
    if (c.solvers.empty()) throw ConfigError("solvers", "at least one solver");
    for (const auto& name : c.solvers) {
        if (name != "exact" && name != "approx" && name != "ode") throw ConfigError("solvers", "unknown solver " + name);
    }
    if (!(c.metrics.band_shrink >= 0.0 && c.metrics.band_shrink < 0.5)) {
        throw ConfigError("metrics.band_shrink", "must be in [0, 0.5)");
    }
}

inline RunConfig parse_config(const json& root) {
    if (!root.is_object()) throw ConfigError("<root>", "configuration must be a JSON object");
    RunConfig c;
    {
        const json& j = detail::section(root, "dispersion");
        detail::read_opt(j, "mode", c.dispersion.mode, "dispersion");
        detail::read_opt(j, "pump_wavelength_nm", c.dispersion.pump_wavelength_nm, "dispersion");
        detail::read_opt(j, "temperature_c", c.dispersion.temperature_c, "dispersion");
        detail::read_opt(j, "alpha_rad_per_mm", c.dispersion.alpha, "dispersion");
        detail::read_opt(j, "beta_rad_per_mm", c.dispersion.beta, "dispersion");
    }
    {
        const json& j = detail::section(root, "profile");
        detail::read_opt(j, "kind", c.profile.kind, "profile");
        detail::read_opt(j, "L_mm", c.profile.length_mm, "profile");
        detail::read_opt(j, "K0_rad_per_mm", c.profile.k0, "profile");
        detail::read_opt(j, "chirp_rad_per_mm2", c.profile.chirp, "profile");
        detail::read_opt(j, "band_edges_normalized", c.profile.band_edges, "profile");
        detail::read_opt(j, "direction", c.profile.direction, "profile");
        detail::read_opt(j, "table_path", c.profile.table_path, "profile");
    }
    {
        const json& j = detail::section(root, "coupling");
        detail::read_opt(j, "nu", c.coupling.nu, "coupling");
        detail::read_opt(j, "nu0", c.coupling.nu0, "coupling");
        detail::read_opt(j, "gamma_rad_per_mm", c.coupling.gamma, "coupling");
        detail::read_opt(j, "phi0", c.coupling.phi0, "coupling");
        detail::read_opt(j, "phi0_reference_x", c.coupling.phi0_reference_x, "coupling");
    }
    {
        const json& j = detail::section(root, "grid");
        detail::read_opt(j, "symmetric", c.grid.symmetric, "grid");
        detail::read_opt(j, "half_width", c.grid.half_width, "grid");
        detail::read_opt(j, "lo", c.grid.lo, "grid");
        detail::read_opt(j, "hi", c.grid.hi, "grid");
        detail::read_opt(j, "points", c.grid.points, "grid");
        c.grid.points_explicit = j.contains("points");
    }
    {
        const json& j = detail::section(root, "solver");
        detail::read_opt(j, "rel_tol", c.solver.rel_tol, "solver");
        detail::read_opt(j, "abs_tol", c.solver.abs_tol, "solver");
        detail::read_opt(j, "max_steps", c.solver.max_steps, "solver");
        detail::read_opt(j, "x_max", c.solver.x_max, "solver");
        detail::read_opt(j, "wronskian_tolerance", c.solver.wronskian_tolerance, "solver");
        detail::read_opt(j, "layer_phase", c.solver.layer_phase, "solver");
        detail::read_opt(j, "threads", c.solver.threads, "solver");
    }
    {
        const json& j = detail::section(root, "angles");
        detail::read_opt(j, "psi_L_reference", c.angles.psi_l_reference, "angles");
        detail::read_opt(j, "psi_0_reference", c.angles.psi_0_reference, "angles");
    }
    {
        const json& j = detail::section(root, "metrics");
        detail::read_opt(j, "band_shrink", c.metrics.band_shrink, "metrics");
        detail::read_opt(j, "deflection_threshold", c.metrics.deflection_threshold, "metrics");
        detail::read_opt(j, "exclude_truncated", c.metrics.exclude_truncated, "metrics");
    }
    detail::read_opt(root, "solvers", c.solvers, "");
    detail::read_opt(root, "output_prefix", c.output_prefix, "");
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open " + path);
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("--config", e.what());
    }
    return parse_config(root);
}

inline json to_json(const RunConfig& c) {
    json j;
    j["dispersion"] = {{"mode", c.dispersion.mode},
                       {"pump_wavelength_nm", c.dispersion.pump_wavelength_nm},
                       {"temperature_c", c.dispersion.temperature_c},
                       {"alpha_rad_per_mm", c.dispersion.alpha},
                       {"beta_rad_per_mm", c.dispersion.beta}};
    j["profile"] = {{"kind", c.profile.kind},
                    {"L_mm", c.profile.length_mm},
                    {"K0_rad_per_mm", c.profile.k0},
                    {"chirp_rad_per_mm2", c.profile.chirp},
                    {"band_edges_normalized", c.profile.band_edges},
                    {"direction", c.profile.direction},
                    {"table_path", c.profile.table_path}};
    json k = {{"phi0_reference_x", c.coupling.phi0_reference_x}};
    k["nu"] = c.coupling.nu ? json(*c.coupling.nu) : json(nullptr);
    k["nu0"] = c.coupling.nu0 ? json(*c.coupling.nu0) : json(nullptr);
    k["gamma_rad_per_mm"] = c.coupling.gamma ? json(*c.coupling.gamma) : json(nullptr);
    k["phi0"] = c.coupling.phi0 ? json(*c.coupling.phi0) : json(nullptr);
    j["coupling"] = k;
    j["grid"] = {{"symmetric", c.grid.symmetric},
                 {"half_width", c.grid.half_width},
                 {"lo", c.grid.lo},
                 {"hi", c.grid.hi},
                 {"points", c.grid.points}};
    j["solver"] = {{"rel_tol", c.solver.rel_tol},
                   {"abs_tol", c.solver.abs_tol},
                   {"max_steps", c.solver.max_steps},
                   {"x_max", c.solver.x_max},
                   {"wronskian_tolerance", c.solver.wronskian_tolerance},
                   {"layer_phase", c.solver.layer_phase}};
    j["angles"] = {{"psi_L_reference", c.angles.psi_l_reference},
                   {"psi_0_reference",
                    c.angles.psi_0_reference ? json(*c.angles.psi_0_reference) : json(nullptr)}};
    j["metrics"] = {{"band_shrink", c.metrics.band_shrink},
                    {"deflection_threshold", c.metrics.deflection_threshold},
                    {"exclude_truncated", c.metrics.exclude_truncated}};
    j["solvers"] = c.solvers;
    j["output_prefix"] = c.output_prefix;
    return j;
}

/// FNV-1a 64 of the canonical (key-sorted) dump; thread count is excluded
/// since results do not depend on it.
inline std::string config_hash(const RunConfig& c) {
    const std::string text = to_json(c).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

/// Physical objects assembled from a validated configuration.
struct Setup {
    DispersionModel dispersion;
    PolingProfile profile;
    PumpCoupling coupling;
    FrequencyGrid grid;
};

inline PolingProfile read_profile_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("profile.table_path", "cannot open " + path);
    std::vector<double> z, k;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        for (char& ch : line) {
            if (ch == ',' || ch == ';' || ch == '\t') ch = ' ';
        }
        std::istringstream row(line);
        double a = 0.0, b = 0.0;
        if (!(row >> a >> b)) continue;  // header
        z.push_back(a);
        k.push_back(b);
    }
    try {
        return PolingProfile::custom(std::move(z), std::move(k));
    } catch (const DomainError& e) {
        throw ConfigError("profile.table_path", e.what());
    }
}

inline DispersionModel make_dispersion(const DispersionConfig& d) {
    if (d.mode == "sellmeier") return DispersionModel::sellmeier(d.pump_wavelength_nm, d.temperature_c);
    return DispersionModel::quadratic(d.alpha, d.beta, d.pump_wavelength_nm, d.temperature_c);
}

inline PolingProfile make_profile(const ProfileConfig& p, const DispersionModel& dispersion) {
    if (p.kind == "linear") {
        try {
            return PolingProfile::linear(p.length_mm, p.k0, p.chirp);
        } catch (const DomainError& e) {
            throw ConfigError("profile", e.what());
        }
    }
    if (p.kind == "quadratic_hyperbolic") {
        const bool decreasing = p.direction == "decreasing";
        const double entry = decreasing ? p.band_edges[0] : p.band_edges[1];
        const double exit = decreasing ? p.band_edges[1] : p.band_edges[0];
        return design_from_band_edges(entry, exit, p.length_mm, dispersion).profile;
    }
    return read_profile_table(p.table_path);
}

inline ApproxOptions approx_options(const SolverConfig& s) {
    return {s.layer_phase == "exact_layer" ? LayerPhaseModel::exact_layer : LayerPhaseModel::quadratic_fit};
}

inline OdeOptions ode_options(const SolverConfig& s) {
    OdeOptions o;
    o.rel_tol = s.rel_tol;
    o.abs_tol = s.abs_tol;
    o.max_steps = s.max_steps;
    return o;
}

inline ExactOptions exact_options(const SolverConfig& s) { return {s.x_max, s.wronskian_tolerance}; }

inline FrequencyGrid make_grid(const GridConfig& g) {
    if (g.symmetric) return FrequencyGrid::symmetric(g.half_width, g.points);
    return FrequencyGrid::uniform(g.lo, g.hi, g.points);
}

inline Setup make_setup(const RunConfig& c) {
    validate(c);
    DispersionModel dispersion = make_dispersion(c.dispersion);
    PolingProfile profile = make_profile(c.profile, dispersion);
    PumpCoupling coupling;
    if (c.coupling.nu) coupling = PumpCoupling::from_nu(*c.coupling.nu, profile);
    if (c.coupling.nu0) coupling = PumpCoupling::from_nu0(*c.coupling.nu0, profile);
    if (c.coupling.gamma) coupling = PumpCoupling{*c.coupling.gamma, 0.0};
    if (c.coupling.phi0) {
        coupling.phi0 = *c.coupling.phi0;
    } else {
        coupling.phi0 = ApproxSolver(profile, dispersion, coupling, approx_options(c.solver))
                            .reference_pump_phase(c.coupling.phi0_reference_x);
    }
    return {dispersion, profile, coupling, make_grid(c.grid)};
}

}  // namespace chirpsq
