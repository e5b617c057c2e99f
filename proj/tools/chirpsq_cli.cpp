#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <chirpsq/run.hpp>

namespace {

using namespace chirpsq;

enum Exit { ok = 0, failure = 1, config_error = 2, accuracy_error = 3, infeasible = 4 };

struct Common {
    std::string config_path;
    std::string out = ".";
    std::string solvers;
    std::optional<double> nu, nu0, gamma;
    std::optional<std::size_t> grid;
    std::optional<unsigned> threads;
    bool best_effort = false;
};

void add_common(CLI::App* cmd, Common& c, bool with_solvers) {
    cmd->add_option("--config", c.config_path, "JSON run configuration");
    cmd->add_option("--out", c.out, "output directory");
    if (with_solvers) cmd->add_option("--solvers", c.solvers, "comma-separated subset of exact,approx,ode");
    auto* nu = cmd->add_option("--nu", c.nu, "Rosenbluth parameter (linear profile)");
    auto* nu0 = cmd->add_option("--nu0", c.nu0, "normalized pump intensity");
    auto* gamma = cmd->add_option("--gamma", c.gamma, "|gamma| in rad/mm");
    nu->excludes(nu0)->excludes(gamma);
    nu0->excludes(gamma);
    cmd->add_option("--grid", c.grid, "number of grid points");
    cmd->add_option("--threads", c.threads, "worker threads (0 = all cores)");
    if (with_solvers) cmd->add_flag("--best-effort", c.best_effort, "write NaN rows where a solver loses accuracy");
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

RunConfig build_config(const Common& c) {
    RunConfig cfg = c.config_path.empty() ? RunConfig{} : load_config(c.config_path);
    if (c.nu || c.nu0 || c.gamma) cfg.coupling.nu = cfg.coupling.nu0 = cfg.coupling.gamma = std::nullopt;
    if (c.nu) cfg.coupling.nu = *c.nu;
    if (c.nu0) cfg.coupling.nu0 = *c.nu0;
    if (c.gamma) cfg.coupling.gamma = *c.gamma;
    if (c.grid) {
        cfg.grid.points = *c.grid;
        cfg.grid.points_explicit = true;
    }
    if (c.threads) cfg.solver.threads = *c.threads;
    if (!c.solvers.empty()) cfg.solvers = split_list(c.solvers);
    return cfg;
}

void print(const RunOutput& out) {
    std::cout << out.report.dump(2) << '\n';
    for (const auto& f : out.files) std::cerr << "wrote " << f.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Squeezing and optical spectra of chirped quasi-phase-matched down-conversion"};
    app.require_subcommand(1);

    Common spec_opts, ang_opts, val_opts, des_opts;
    auto* spectrum = app.add_subcommand("spectrum", "optical and squeezing spectra per solver");
    add_common(spectrum, spec_opts, true);
    auto* angles = app.add_subcommand("angles", "characteristic angles per solver");
    add_common(angles, ang_opts, true);
    auto* validate_cmd = app.add_subcommand("validate", "profile diagnostics only");
    add_common(validate_cmd, val_opts, false);

    MuStudyRequest mu;
    std::string mu_out = ".";
    auto* mu_study = app.add_subcommand("mu-study", "layer gain against the cosh + mu sinh family");
    mu_study->add_option("--nu-min", mu.nu_min, "smallest nu")->capture_default_str();
    mu_study->add_option("--nu-max", mu.nu_max, "largest nu (<= 3)")->capture_default_str();
    mu_study->add_option("--points", mu.points, "number of nu samples")->capture_default_str();
    mu_study->add_option("--mu", mu.mu, "extra family members");
    mu_study->add_option("--prefix", mu.prefix, "output file prefix")->capture_default_str();
    mu_study->add_option("--out", mu_out, "output directory");

    DesignRequest design;
    std::optional<double> length;
    auto* design_cmd = app.add_subcommand("design", "profile for a linear relative-delay law");
    add_common(design_cmd, des_opts, false);
    auto* a_opt = design_cmd->add_option("--a", design.a_fs2, "delay slope a in fs^2");
    auto* b_opt = design_cmd->add_option("--b", design.b_fs, "delay offset b in fs");
    auto* entry = design_cmd->add_option("--entry", design.x_entry, "detuning matched at z = 0");
    auto* exit_opt = design_cmd->add_option("--exit", design.x_exit, "detuning matched at z = L");
    a_opt->needs(b_opt);
    b_opt->needs(a_opt);
    entry->needs(exit_opt);
    exit_opt->needs(entry);
    a_opt->excludes(entry);
    design_cmd->add_option("--length", length, "crystal length in mm");

    std::string file_a, file_b, cmp_out = ".", cmp_prefix = "cmp";
    bool force = false;
    auto* compare_cmd = app.add_subcommand("compare", "agreement of two coefficient files");
    compare_cmd->add_option("a", file_a, "coefficients CSV under test")->required();
    compare_cmd->add_option("b", file_b, "reference coefficients CSV")->required();
    compare_cmd->add_option("--out", cmp_out, "output directory");
    compare_cmd->add_option("--prefix", cmp_prefix, "output file prefix");
    compare_cmd->add_flag("--force", force, "compare outputs of different configurations");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return config_error;
    }

    try {
        if (spectrum->parsed()) {
            print(run_spectrum(build_config(spec_opts), spec_opts.out, {spec_opts.best_effort, false}));
        } else if (angles->parsed()) {
            print(run_angles(build_config(ang_opts), ang_opts.out, {ang_opts.best_effort, false}));
        } else if (validate_cmd->parsed()) {
            print(run_validate(build_config(val_opts), val_opts.out));
        } else if (mu_study->parsed()) {
            print(run_mu_study(mu, mu_out));
        } else if (design_cmd->parsed()) {
            RunConfig cfg = build_config(des_opts);
            if (length) cfg.profile.length_mm = *length;
            print(run_design(cfg, design, des_opts.out));
        } else if (compare_cmd->parsed()) {
            print(run_compare(file_a, file_b, cmp_out, cmp_prefix, {false, force}));
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const DesignInfeasibleError& e) {
        std::cerr << "design infeasible: " << e.what() << '\n';
        return infeasible;
    } catch (const AccuracyLossError& e) {
        std::cerr << "accuracy lost: " << e.what() << " (rerun with --best-effort to keep partial results)\n";
        return accuracy_error;
    } catch (const StiffnessError& e) {
        std::cerr << "integration failed: " << e.what() << '\n';
        return accuracy_error;
    } catch (const DomainError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return config_error;
    } catch (const OutOfBandError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return config_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return failure;
    }
    return ok;
}
