#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "characterization.hpp"
#include "config.hpp"
#include "io.hpp"
#include "plots.hpp"
#include "solver_approx.hpp"
#include "solver_exact.hpp"
#include "solver_ode.hpp"

namespace chirpsq {

namespace fs = std::filesystem;

struct RunFlags {
    bool best_effort = false;  // per-point solver failures become NaN rows
    bool force = false;        // compare outputs with different config hashes
};

struct SolverRun {
    BogoliubovCoefficients coeffs;
    std::size_t failed_points = 0;
};

struct RunOutput {
    std::vector<fs::path> files;
    json report;
};

namespace detail {

inline BogoliubovPoint failed_point() {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    BogoliubovPoint p;
    p.u = p.v = p.a = p.b = complex(nan, nan);
    p.in_band = false;
    return p;
}

inline SolverRun solve_points(SolverTag tag, const FrequencyGrid& grid, const std::function<BogoliubovPoint(double)>& at,
                              bool best_effort, unsigned threads) {
    SolverRun run{{tag, grid, std::vector<BogoliubovPoint>(grid.size())}, 0};
    std::vector<char> failed(grid.size(), 0);
    parallel_for(
        grid.size(),
        [&](std::size_t i) {
            if (!best_effort) {
                run.coeffs.points[i] = at(grid[i]);
                return;
            }
            try {
                run.coeffs.points[i] = at(grid[i]);
            } catch (const AccuracyLossError&) {
                run.coeffs.points[i] = failed_point();
                failed[i] = 1;
            } catch (const StiffnessError&) {
                run.coeffs.points[i] = failed_point();
                failed[i] = 1;
            }
        },
        threads);
    for (char f : failed) run.failed_points += static_cast<std::size_t>(f);
    return run;
}

inline json report_json(const ComparisonReport& r) {
    json j = {{"solver_a", r.solver_a},
              {"solver_b", r.solver_b},
              {"band", {r.band.lo, r.band.hi}},
              {"points", r.points},
              {"mean_rel_v2", r.mean_rel_v2},
              {"max_rel_v2", r.max_rel_v2},
              {"band_average_rel_v2", r.band_average_rel_v2},
              {"ripple_averaged_rel_v2", r.ripple_averaged_rel_v2},
              {"ripple_averaged_rel_s2", r.ripple_averaged_rel_s2},
              {"band_average_rel_s2", r.band_average_rel_s2},
              {"max_abs_s2", r.max_abs_s2},
              {"psi_offset", r.psi_offset},
              {"deflection", r.deflection}};
    j["max_dpsi_L"] = r.max_dpsi_l ? json(*r.max_dpsi_l) : json(nullptr);
    j["max_dpsi_0"] = r.max_dpsi_0 ? json(*r.max_dpsi_0) : json(nullptr);
    return j;
}

inline json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json coupling_json(const Setup& s) {
    json j = {{"gamma_rad_per_mm", s.coupling.gamma},
              {"phi0", s.coupling.phi0},
              {"nu0", s.coupling.nu0(s.profile)}};
    if (s.profile.kind() == PolingProfile::Kind::linear) j["nu"] = s.coupling.gamma * s.coupling.gamma / s.profile.chirp();
    return j;
}

inline json validity_json(const Setup& s) {
    try {
        const ValidityMetrics m = validity_metrics(s.profile, s.dispersion, s.coupling, s.grid);
        const double nu0 = s.coupling.nu0(s.profile);
        return {{"max_epsilon", m.max_epsilon},
                {"max_epsilon_prime", m.max_epsilon_prime},
                {"max_period_slope", m.max_period_slope},
                {"epsilon_prime_over_sqrt_nu0", nu0 > 0.0 ? json(m.max_epsilon_prime / std::sqrt(nu0)) : json(nullptr)}};
    } catch (const SingularProfileError& e) {
        return {{"error", e.what()}};
    }
}

inline std::string file_stem(const RunConfig& c, const std::string& solver, const std::string& kind) {
    return c.output_prefix + "_" + solver + "_" + kind;
}

}  // namespace detail

/// Runs one configured solver over the configured grid.
inline SolverRun run_solver(const std::string& name, const Setup& s, const RunConfig& c, const RunFlags& flags) {
    const unsigned threads = c.solver.threads;
    if (name == "exact") {
        if (s.profile.kind() != PolingProfile::Kind::linear) {
            throw ConfigError("solvers", "the exact solver needs a linear profile");
        }
        const ExactSolver solver(s.profile, s.dispersion, s.coupling, exact_options(c.solver));
        return detail::solve_points(SolverTag::exact, s.grid, [&](double x) { return solver.at(x); }, flags.best_effort,
                                    threads);
    }
    if (name == "ode") {
        const OdeSolver solver(s.profile, s.dispersion, s.coupling, ode_options(c.solver));
        return detail::solve_points(SolverTag::ode, s.grid, [&](double x) { return solver.at(x); }, flags.best_effort,
                                    threads);
    }
    const ApproxSolver solver(s.profile, s.dispersion, s.coupling, approx_options(c.solver));
    return detail::solve_points(SolverTag::approx, s.grid, [&](double x) { return solver.at(x); }, flags.best_effort,
                                threads);
}

/// The solver others are compared against: exact, else ode, else the first listed.
inline std::string reference_solver(const std::vector<std::string>& names) {
    for (const char* want : {"exact", "ode"}) {
        for (const auto& n : names) {
            if (n == want) return n;
        }
    }
    return names.front();
}

/// Shifts psi_L so that psi_L(x_l) = 0; psi_0 uses its own reference when given,
/// otherwise the psi_L offset. Returns the two offsets.
inline std::pair<double, double> normalize_angles(SqueezingCharacterization& ch, double x_l,
                                                  std::optional<double> x_0) {
    std::vector<double> x;
    std::vector<std::optional<double>> pl, p0;
    for (const auto& p : ch.points) {
        x.push_back(p.x);
        pl.push_back(p.psi_l);
        p0.push_back(p.psi_0);
    }
    double off_l = 0.0, off_0 = 0.0;
    try {
        off_l = angle_offset(x, pl, x_l);
        off_0 = x_0 ? angle_offset(x, p0, *x_0) : off_l;
    } catch (const DomainError&) {
        return {0.0, 0.0};  // no defined angles (vacuum)
    }
    for (auto& p : ch.points) {
        if (p.psi_l) *p.psi_l -= off_l;
        if (p.psi_0) *p.psi_0 -= off_0;
    }
    return {off_l, off_0};
}

namespace detail {

struct SolverOutputs {
    std::vector<SolverRun> runs;
    std::vector<SqueezingCharacterization> chars;
    Band band;
    Band qpm;
};

inline SolverOutputs run_all(const Setup& s, const RunConfig& c, const RunFlags& flags) {
    SolverOutputs out;
    out.qpm = qpm_band(s.profile, s.dispersion);
    out.band = out.qpm.shrunk(c.metrics.band_shrink);
    for (const auto& name : c.solvers) {
        out.runs.push_back(run_solver(name, s, c, flags));
        out.chars.push_back(characterize(out.runs.back().coeffs, s.dispersion.omega0(), out.band));
    }
    return out;
}

inline json meta_json(const RunConfig& c, const Setup& s, const SolverRun& run, const std::string& kind,
                      const Band& band) {
    return {{"kind", kind},
            {"solver", std::string(to_string(run.coeffs.solver))},
            {"config_hash", config_hash(c)},
            {"config", to_json(c)},
            {"coupling", coupling_json(s)},
            {"band", {band.lo, band.hi}},
            {"max_unitarity_residual", run.coeffs.max_unitarity_residual()},
            {"failed_points", run.failed_points}};
}

inline json comparisons_json(const SolverOutputs& o, const RunConfig& c, bool& deflection) {
    json list = json::array();
    const std::string ref = reference_solver(c.solvers);
    std::size_t ref_index = 0;
    for (std::size_t i = 0; i < c.solvers.size(); ++i) {
        if (c.solvers[i] == ref) ref_index = i;
    }
    deflection = false;
    for (std::size_t i = 0; i < c.solvers.size(); ++i) {
        if (i == ref_index) continue;
        const ComparisonReport r = compare(o.runs[i].coeffs, o.runs[ref_index].coeffs, o.band,
                                           {c.metrics.deflection_threshold, c.metrics.exclude_truncated});
        deflection = deflection || r.deflection;
        list.push_back(report_json(r));
    }
    return list;
}

inline void write_coefficients(const fs::path& dir, const RunConfig& c, const Setup& s, const SolverRun& run,
                               const Band& band, std::vector<fs::path>& files) {
    const std::string name(to_string(run.coeffs.solver));
    const fs::path path = dir / (file_stem(c, name, "coeffs") + ".csv");
    io::write_text(path, io::coefficient_table(run.coeffs).str());
    io::write_json(io::meta_path(path), meta_json(c, s, run, "coefficients", band));
    files.push_back(path);
}

}  // namespace detail

/// Spectra S, S1, S2 and squeezing parameters per solver, plus a comparison report.
inline RunOutput run_spectrum(const RunConfig& config, const fs::path& dir, const RunFlags& flags = {}) {
    const Setup s = make_setup(config);
    const auto o = detail::run_all(s, config, flags);
    RunOutput out;
    json solvers = json::object();
    std::vector<std::string> csv_names;
    for (std::size_t k = 0; k < o.runs.size(); ++k) {
        const auto& ch = o.chars[k];
        io::Table t{{"omega_norm", "S", "S1", "S2", "S2_db", "r", "psi_L", "psi_0", "kappa", "tau_fs", "in_band"}, {}};
        for (const auto& p : ch.points) {
            t.add({io::fmt(p.x), io::fmt(p.s), io::fmt(p.s1), io::fmt(p.s2), io::fmt(p.s2_db), io::fmt(p.r),
                   io::fmt(p.psi_l), io::fmt(p.psi_0), io::fmt(p.kappa), io::fmt(p.tau_fs), p.in_band ? "1" : "0"});
        }
        const std::string name = config.solvers[k];
        const fs::path path = dir / (detail::file_stem(config, name, "spectrum") + ".csv");
        io::write_text(path, t.str());
        json meta = detail::meta_json(config, s, o.runs[k], "spectrum", o.band);
        meta["angles_resolved"] = ch.angles_resolved;
        io::write_json(io::meta_path(path), meta);
        out.files.push_back(path);
        csv_names.push_back(path.filename().string());
        detail::write_coefficients(dir, config, s, o.runs[k], o.band, out.files);
        solvers[name] = {{"file", path.filename().string()},
                         {"max_unitarity_residual", o.runs[k].coeffs.max_unitarity_residual()},
                         {"failed_points", o.runs[k].failed_points},
                         {"angles_resolved", ch.angles_resolved}};
    }
    bool deflection = false;
    out.report = {{"kind", "spectrum"},
                  {"config_hash", config_hash(config)},
                  {"qpm_band", {o.qpm.lo, o.qpm.hi}},
                  {"band", {o.band.lo, o.band.hi}},
                  {"coupling", detail::coupling_json(s)},
                  {"solvers", solvers},
                  {"validity", detail::validity_json(s)}};
    out.report["comparisons"] = detail::comparisons_json(o, config, deflection);
    out.report["deflection"] = deflection;
    const fs::path report = dir / (config.output_prefix + "_spectrum_report.json");
    io::write_json(report, out.report);
    out.files.push_back(report);
    const fs::path script = dir / (config.output_prefix + "_plot_spectrum.py");
    io::write_text(script, plots::spectrum_script(csv_names, config.solvers, {o.band.lo, o.band.hi}));
    out.files.push_back(script);
    return out;
}

/// Unwrapped characteristic angles per solver with the configured zero references.
inline RunOutput run_angles(RunConfig config, const fs::path& dir, const RunFlags& flags = {}) {
    if (!config.grid.points_explicit) config.grid.points = 4096;
    const Setup s = make_setup(config);
    auto o = detail::run_all(s, config, flags);
    RunOutput out;
    json solvers = json::object();
    std::vector<std::string> csv_names;
    for (std::size_t k = 0; k < o.runs.size(); ++k) {
        auto ch = o.chars[k];
        const auto raw = o.chars[k];
        const auto [off_l, off_0] = normalize_angles(ch, config.angles.psi_l_reference, config.angles.psi_0_reference);
        io::Table t{{"omega_norm", "psi_L", "psi_0", "psi_L_raw", "psi_0_raw", "kappa", "tau_fs", "r", "in_band"}, {}};
        for (std::size_t i = 0; i < ch.points.size(); ++i) {
            const auto& p = ch.points[i];
            t.add({io::fmt(p.x), io::fmt(p.psi_l), io::fmt(p.psi_0), io::fmt(raw.points[i].psi_l),
                   io::fmt(raw.points[i].psi_0), io::fmt(p.kappa), io::fmt(p.tau_fs), io::fmt(p.r),
                   p.in_band ? "1" : "0"});
        }
        const std::string name = config.solvers[k];
        const fs::path path = dir / (detail::file_stem(config, name, "angles") + ".csv");
        io::write_text(path, t.str());
        json meta = detail::meta_json(config, s, o.runs[k], "angles", o.band);
        meta["angles_resolved"] = ch.angles_resolved;
        meta["psi_L_offset"] = off_l;
        meta["psi_0_offset"] = off_0;
        io::write_json(io::meta_path(path), meta);
        out.files.push_back(path);
        csv_names.push_back(path.filename().string());
        detail::write_coefficients(dir, config, s, o.runs[k], o.band, out.files);
        solvers[name] = {{"file", path.filename().string()},
                         {"angles_resolved", ch.angles_resolved},
                         {"psi_L_offset", off_l},
                         {"psi_0_offset", off_0},
                         {"max_unitarity_residual", o.runs[k].coeffs.max_unitarity_residual()},
                         {"failed_points", o.runs[k].failed_points}};
    }
    bool deflection = false;
    out.report = {{"kind", "angles"},
                  {"config_hash", config_hash(config)},
                  {"qpm_band", {o.qpm.lo, o.qpm.hi}},
                  {"band", {o.band.lo, o.band.hi}},
                  {"coupling", detail::coupling_json(s)},
                  {"solvers", solvers},
                  {"psi_L_reference", config.angles.psi_l_reference},
                  {"psi_0_reference", detail::optional_json(config.angles.psi_0_reference)}};
    out.report["comparisons"] = detail::comparisons_json(o, config, deflection);
    const fs::path report = dir / (config.output_prefix + "_angles_report.json");
    io::write_json(report, out.report);
    out.files.push_back(report);
    const fs::path script = dir / (config.output_prefix + "_plot_angles.py");
    io::write_text(script, plots::angles_script(csv_names, config.solvers, {o.band.lo, o.band.hi}));
    out.files.push_back(script);
    return out;
}

struct MuStudyRequest {
    double nu_min = 0.05;
    double nu_max = 2.0;
    std::size_t points = 40;
    std::vector<double> mu;  // extra family members besides 0 and 1
    std::string prefix = "mu";
};

/// Layer gain of the exact linearized layer against the cosh + mu sinh family.
inline RunOutput run_mu_study(const MuStudyRequest& req, const fs::path& dir) {
    if (!(req.nu_min > 0.0 && req.nu_min < req.nu_max && req.nu_max <= 3.0)) {
        throw ConfigError("nu", "need 0 < nu_min < nu_max <= 3");
    }
    if (req.points < 2) throw ConfigError("points", "need at least two points");
    std::vector<std::string> header{"nu", "exact", "mu_1", "mu_0"};
    for (double m : req.mu) header.push_back("mu_" + io::fmt(m));
    io::Table t{header, {}};
    std::size_t closer = 0, band_points = 0, band_closer = 0;
    double worst_mu1 = 0.0;
    for (std::size_t i = 0; i < req.points; ++i) {
        const double nu = req.nu_min + (req.nu_max - req.nu_min) * static_cast<double>(i) /
                                           static_cast<double>(req.points - 1);
        const double g = layer_gain_exact(nu);
        const double e = std::exp(units::pi * nu);
        const double ch = std::cosh(units::pi * nu);
        std::vector<std::string> row{io::fmt(nu), io::fmt(g), io::fmt(e), io::fmt(ch)};
        for (double m : req.mu) {
            try {
                row.push_back(io::fmt(layer_transform_family(nu, m).diagonal));
            } catch (const DomainError&) {
                row.push_back(io::fmt(std::numeric_limits<double>::quiet_NaN()));
            }
        }
        t.add(std::move(row));
        const bool better = std::abs(g - e) < std::abs(g - ch);
        closer += better;
        if (nu >= 0.5 && nu <= 2.0) {
            ++band_points;
            band_closer += better;
        }
        worst_mu1 = std::max(worst_mu1, std::abs(g - e) / g);
    }
    RunOutput out;
    const fs::path path = dir / (req.prefix + "_mu_study.csv");
    io::write_text(path, t.str());
    out.files.push_back(path);
    out.report = {{"kind", "mu-study"},
                  {"nu_min", req.nu_min},
                  {"nu_max", req.nu_max},
                  {"points", req.points},
                  {"mu", req.mu},
                  {"mu1_closer_points", closer},
                  {"points_in_0.5_2", band_points},
                  {"mu1_closer_in_0.5_2", band_closer},
                  {"max_rel_gap_mu1", worst_mu1},
                  {"exp_pi_nu_max", std::exp(units::pi * req.nu_max)}};
    const fs::path report = dir / (req.prefix + "_mu_study_report.json");
    io::write_json(report, out.report);
    out.files.push_back(report);
    const fs::path script = dir / (req.prefix + "_plot_mu_study.py");
    io::write_text(script, plots::mu_study_script(path.filename().string()));
    out.files.push_back(script);
    return out;
}

struct DesignRequest {
    std::optional<double> a_fs2;  // tau = a Omega + b, a in fs^2
    std::optional<double> b_fs;
    std::optional<double> x_entry;  // or the detunings matched at z = 0 and z = L
    std::optional<double> x_exit;
    std::size_t profile_samples = 1001;
    std::size_t curve_points = 201;
};

/// Profile realizing a linear relative-delay law, with diagnostics and the
/// first-order curves it predicts.
inline RunOutput run_design(const RunConfig& config, const DesignRequest& req, const fs::path& dir) {
    const DispersionModel disp = make_dispersion(config.dispersion);
    const double length = config.profile.length_mm;
    if (!(length > 0.0)) throw ConfigError("profile.L_mm", "must be positive");
    DelayDesign design = [&] {
        if (req.a_fs2 && req.b_fs) {
            return design_linear_delay_profile(*req.a_fs2 * 1e-30, *req.b_fs * 1e-15, length, disp);
        }
        if (req.x_entry && req.x_exit) return design_from_band_edges(*req.x_entry, *req.x_exit, length, disp);
        if (req.a_fs2 || req.b_fs || req.x_entry || req.x_exit) {
            throw ConfigError("design", "give both a and b, or both band edges");
        }
        const auto& e = config.profile.band_edges;
        if (e.size() != 2) throw ConfigError("profile.band_edges_normalized", "need two edges");
        const bool decreasing = config.profile.direction != "increasing";
        return design_from_band_edges(decreasing ? e[0] : e[1], decreasing ? e[1] : e[0], length, disp);
    }();
    const PolingProfile& prof = design.profile;

    PumpCoupling coupling = PumpCoupling::from_nu0(0.01, prof);
    if (config.coupling.nu0) coupling = PumpCoupling::from_nu0(*config.coupling.nu0, prof);
    if (config.coupling.gamma) coupling = PumpCoupling{*config.coupling.gamma, 0.0};
    if (config.coupling.nu) throw ConfigError("coupling.nu", "designed profiles are nonlinear; use nu0");
    const ApproxSolver probe(prof, disp, coupling, approx_options(config.solver));
    coupling.phi0 = config.coupling.phi0 ? *config.coupling.phi0
                                         : probe.reference_pump_phase(config.coupling.phi0_reference_x);
    const ApproxSolver approx(prof, disp, coupling, approx_options(config.solver));

    RunOutput out;
    io::Table pt{{"z_mm", "K_rad_per_mm", "period_um", "period_slope"}, {}};
    for (std::size_t i = 0; i < req.profile_samples; ++i) {
        const double z = length * static_cast<double>(i) / static_cast<double>(req.profile_samples - 1);
        const double k = prof.value(z);
        pt.add({io::fmt(z), io::fmt(k), io::fmt(units::two_pi / k * 1e3), io::fmt(prof.period_slope(z))});
    }
    const fs::path ppath = dir / (config.output_prefix + "_design_profile.csv");
    io::write_text(ppath, pt.str());
    out.files.push_back(ppath);

    const Band band = qpm_band(prof, disp).shrunk(config.metrics.band_shrink);
    io::Table ct{{"omega_norm", "psi_L", "psi_0", "tau_fs", "tau_group_fs", "tau_requested_fs"}, {}};
    std::vector<double> xs;
    double worst_fd = 0.0, worst_gv = 0.0, tau_scale = 0.0;
    const double omega0 = disp.omega0();
    for (std::size_t i = 0; i < req.curve_points; ++i) {
        const double x = band.lo + (band.hi - band.lo) * static_cast<double>(i) / static_cast<double>(req.curve_points - 1);
        const FirstOrderParams p = approx.params(x);
        const RelativeDelay d = approx.relative_delay(x);
        const double want = (design.a * x * omega0 + design.b) * units::femtoseconds_per_second;
        ct.add({io::fmt(x), io::fmt(p.psi_l), io::fmt(p.psi_0), io::fmt(d.from_angle_fs),
                io::fmt(d.from_group_velocity_fs), io::fmt(want)});
        worst_fd = std::max(worst_fd, std::abs(d.from_angle_fs - want));
        worst_gv = std::max(worst_gv, std::abs(d.from_group_velocity_fs - want));
        tau_scale = std::max(tau_scale, std::abs(want));
    }
    const fs::path cpath = dir / (config.output_prefix + "_design_curves.csv");
    io::write_text(cpath, ct.str());
    out.files.push_back(cpath);

    const ValidityMetrics vm =
        validity_metrics(prof, disp, coupling, FrequencyGrid::uniform(band.lo, band.hi, 2001));
    const double nu0 = coupling.nu0(prof);
    out.report = {{"kind", "design"},
                  {"a_fs2", design.a * 1e30},
                  {"b_fs", design.b * 1e15},
                  {"d_mm", design.d},
                  {"d_over_L", design.d / length},
                  {"x_entry", design.x_entry},
                  {"x_exit", design.x_exit},
                  {"direction", prof.decreasing() ? "decreasing" : "increasing"},
                  {"K_at_0", prof.value(0.0)},
                  {"K_at_L", prof.value(length)},
                  {"alpha_rad_per_mm", disp.alpha()},
                  {"beta_rad_per_mm", disp.beta()},
                  {"omega0_rad_per_s", omega0},
                  {"L_mm", length},
                  {"band", {band.lo, band.hi}},
                  {"nu0", nu0},
                  {"phi0", coupling.phi0},
                  {"max_epsilon", vm.max_epsilon},
                  {"max_epsilon_prime", vm.max_epsilon_prime},
                  {"epsilon_prime_over_sqrt_nu0", nu0 > 0.0 ? json(vm.max_epsilon_prime / std::sqrt(nu0)) : json(nullptr)},
                  {"max_period_slope", vm.max_period_slope},
                  {"tau_max_rel_error_angle", tau_scale > 0.0 ? worst_fd / tau_scale : 0.0},
                  {"tau_max_rel_error_group", tau_scale > 0.0 ? worst_gv / tau_scale : 0.0}};
    const fs::path report = dir / (config.output_prefix + "_design_report.json");
    io::write_json(report, out.report);
    out.files.push_back(report);
    const fs::path script = dir / (config.output_prefix + "_plot_design.py");
    io::write_text(script, plots::design_script(ppath.filename().string(), cpath.filename().string()));
    out.files.push_back(script);
    return out;
}

/// Profile diagnostics on the configured grid: phase-matching points, layer
/// borders and slow-variation measures. No solver runs.
inline RunOutput run_validate(const RunConfig& config, const fs::path& dir) {
    const Setup s = make_setup(config);
    io::Table t{{"omega_norm", "in_band", "z_pm", "nu", "z1", "z2", "truncated", "epsilon", "epsilon_prime"}, {}};
    const ValidityMetrics vm = validity_metrics(s.profile, s.dispersion, s.coupling, s.grid);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::size_t truncated = 0, in_band = 0;
    for (std::size_t i = 0; i < s.grid.size(); ++i) {
        const double x = s.grid[i];
        if (!vm.epsilon[i]) {
            t.add({io::fmt(x), "0", io::fmt(nan), io::fmt(nan), io::fmt(nan), io::fmt(nan), "0", io::fmt(nan),
                   io::fmt(nan)});
            continue;
        }
        ++in_band;
        const double zpm = phase_match_point(x, s.profile, s.dispersion);
        const TurningPoints tp = turning_points(x, s.profile, s.dispersion, s.coupling);
        truncated += tp.truncated();
        t.add({io::fmt(x), "1", io::fmt(zpm), io::fmt(local_nu(x, s.profile, s.dispersion, s.coupling)),
               io::fmt(tp.z1), io::fmt(tp.z2), tp.truncated() ? "1" : "0", io::fmt(vm.epsilon[i]),
               io::fmt(vm.epsilon_prime[i])});
    }
    RunOutput out;
    const fs::path path = dir / (config.output_prefix + "_validate.csv");
    io::write_text(path, t.str());
    out.files.push_back(path);
    const Band qpm = qpm_band(s.profile, s.dispersion);
    out.report = {{"kind", "validate"},
                  {"config_hash", config_hash(config)},
                  {"qpm_band", {qpm.lo, qpm.hi}},
                  {"K_at_0", s.profile.value(0.0)},
                  {"K_at_L", s.profile.value(s.profile.length())},
                  {"decreasing", s.profile.decreasing()},
                  {"coupling", detail::coupling_json(s)},
                  {"in_band_points", in_band},
                  {"truncated_points", truncated},
                  {"validity", detail::validity_json(s)}};
    const fs::path report = dir / (config.output_prefix + "_validate_report.json");
    io::write_json(report, out.report);
    out.files.push_back(report);
    return out;
}

/// Agreement between two coefficient files written by spectrum or angles.
inline RunOutput run_compare(const fs::path& file_a, const fs::path& file_b, const fs::path& dir,
                             const std::string& prefix, const RunFlags& flags = {}) {
    const json meta_a = io::read_json(io::meta_path(file_a));
    const json meta_b = io::read_json(io::meta_path(file_b));
    const std::string hash_a = meta_a.value("config_hash", ""), hash_b = meta_b.value("config_hash", "");
    if (hash_a != hash_b && !flags.force) {
        throw ConfigError("config_hash", "outputs come from different configurations (" + hash_a + " vs " + hash_b +
                                             "); pass --force to compare anyway");
    }
    const auto a = io::coefficients_from_table(io::read_csv(file_a), io::solver_from_string(meta_a.at("solver")));
    const auto b = io::coefficients_from_table(io::read_csv(file_b), io::solver_from_string(meta_b.at("solver")));
    const auto edges = meta_b.at("band").get<std::vector<double>>();
    CompareOptions opts;
    if (meta_b.contains("config")) {
        const json& m = meta_b.at("config").at("metrics");
        opts.deflection_threshold = m.value("deflection_threshold", opts.deflection_threshold);
    }
    const ComparisonReport r = compare(a, b, {edges.at(0), edges.at(1)}, opts);
    RunOutput out;
    out.report = detail::report_json(r);
    out.report["kind"] = "compare";
    out.report["file_a"] = file_a.filename().string();
    out.report["file_b"] = file_b.filename().string();
    out.report["config_hash_a"] = hash_a;
    out.report["config_hash_b"] = hash_b;
    const fs::path report = dir / (prefix + "_compare_report.json");
    io::write_json(report, out.report);
    out.files.push_back(report);
    return out;
}

}  // namespace chirpsq
