#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <chirpsq/io.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string cli = CHIRPSQ_CLI_PATH;
const std::string configs = CHIRPSQ_CONFIG_DIR;

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::path(::testing::TempDir()) / ("chirpsq_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Exit status of the CLI; stdout goes to `stdout_file` when given.
int run(const std::string& args, const fs::path& stdout_file = {}) {
    std::string cmd = cli + " " + args;
    cmd += stdout_file.empty() ? " >/dev/null" : " >" + stdout_file.string();
    cmd += " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<double> column(const fs::path& csv, const std::string& name) {
    const auto t = chirpsq::io::read_csv(csv);
    const std::size_t c = t.column(name);
    std::vector<double> out;
    for (const auto& row : t.rows) out.push_back(chirpsq::io::parse_double(row[c]));
    return out;
}

}  // namespace

TEST(Cli, SpectrumWritesFilesAndIsReproducible) {
    const fs::path a = scratch("repro_a"), b = scratch("repro_b");
    const std::string base = "spectrum --config " + configs + "/linear.json --grid 128 ";
    ASSERT_EQ(run(base + "--threads 1 --out " + a.string()), 0);
    ASSERT_EQ(run(base + "--threads 3 --out " + b.string()), 0);
    for (const char* f : {"linear_exact_spectrum.csv", "linear_approx_coeffs.csv", "linear_exact_coeffs.meta.json",
                          "linear_spectrum_report.json", "linear_plot_spectrum.py"}) {
        ASSERT_TRUE(fs::exists(a / f)) << f;
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
    const json rep = chirpsq::io::read_json(a / "linear_spectrum_report.json");
    EXPECT_LT(rep["solvers"]["exact"]["max_unitarity_residual"].get<double>(), 1e-8);
    EXPECT_EQ(rep["comparisons"].size(), 1u);
}

TEST(Cli, ZeroPumpGivesVacuumNoise) {
    const fs::path d = scratch("vacuum");
    ASSERT_EQ(run("spectrum --config " + configs + "/linear.json --nu 0 --grid 64 --out " + d.string()), 0);
    for (const char* solver : {"exact", "approx"}) {
        const auto s2 = column(d / (std::string("linear_") + solver + "_spectrum.csv"), "S2");
        ASSERT_EQ(s2.size(), 64u);
        for (double v : s2) EXPECT_NEAR(v, 1.0, 1e-12);
    }
}

TEST(Cli, StrongPumpOnDesignedProfileFlagsDeflection) {
    const fs::path d = scratch("deflection");
    const fs::path out = d / "report.json";
    ASSERT_EQ(run("spectrum --config " + configs + "/quadratic_hyperbolic.json --nu0 0.3 --grid 512 --out " +
                      d.string(),
                  out),
              0);
    const json rep = json::parse(slurp(out));
    EXPECT_TRUE(rep["deflection"].get<bool>());
    EXPECT_GT(rep["comparisons"][0]["band_average_rel_v2"].get<double>(), 0.05);
}

TEST(Cli, WeakPumpOnDesignedProfileDoesNotDeflect) {
    const fs::path d = scratch("no_deflection");
    const fs::path out = d / "report.json";
    ASSERT_EQ(run("spectrum --config " + configs + "/quadratic_hyperbolic.json --nu0 0.01 --grid 256 --out " +
                      d.string(),
                  out),
              0);
    EXPECT_FALSE(json::parse(slurp(out))["deflection"].get<bool>());
}

TEST(Cli, ExitCodes) {
    const fs::path d = scratch("codes");
    EXPECT_EQ(run("spectrum --out " + d.string()), 2);  // no coupling given
    EXPECT_EQ(run("spectrum --config " + configs + "/linear.json --nu 0.1 --nu0 0.1 --out " + d.string()), 2);
    EXPECT_EQ(run("spectrum --config " + configs + "/linear.json --grid 16 --out " + d.string()), 2);
    EXPECT_EQ(run("frobnicate"), 2);
    EXPECT_EQ(run("spectrum --config /nonexistent.json"), 2);
    EXPECT_EQ(run("design --entry 0.3 --exit 0.3 --out " + d.string()), 4);
    EXPECT_EQ(run("mu-study --nu-max 4 --out " + d.string()), 2);

    const fs::path cfg = d / "tight.json";
    std::ofstream(cfg) << R"({"coupling": {"nu": 0.1}, "solver": {"max_steps": 20},
                             "grid": {"points": 64}, "solvers": ["ode"]})";
    EXPECT_EQ(run("spectrum --config " + cfg.string() + " --out " + d.string()), 3);
    EXPECT_EQ(run("spectrum --best-effort --config " + cfg.string() + " --out " + d.string()), 0);
    const auto s2 = column(d / "run_ode_spectrum.csv", "S2");
    std::size_t nan_rows = 0;
    for (double v : s2) nan_rows += std::isnan(v) ? 1 : 0;
    EXPECT_GT(nan_rows, 0u);
}

TEST(Cli, ExactSolverRefusesDesignedProfile) {
    const fs::path d = scratch("exact_qh");
    EXPECT_EQ(run("spectrum --config " + configs + "/quadratic_hyperbolic.json --solvers exact --out " + d.string()),
              2);
}

TEST(Cli, MuStudyReport) {
    const fs::path d = scratch("mu");
    const fs::path out = d / "report.json";
    ASSERT_EQ(run("mu-study --points 12 --mu 0.5 --out " + d.string(), out), 0);
    const json rep = json::parse(slurp(out));
    EXPECT_EQ(rep["points"].get<int>(), 12);
    const auto t = chirpsq::io::read_csv(d / "mu_mu_study.csv");
    EXPECT_EQ(t.rows.size(), 12u);
    EXPECT_NO_THROW(t.column("mu_0.5"));
    // the exact layer gain lies above cosh(pi nu) everywhere
    const auto exact = column(d / "mu_mu_study.csv", "exact"), mu0 = column(d / "mu_mu_study.csv", "mu_0");
    for (std::size_t i = 0; i < exact.size(); ++i) EXPECT_GT(exact[i], mu0[i]);
}

TEST(Cli, DesignFromBandEdges) {
    const fs::path d = scratch("design");
    const fs::path out = d / "report.json";
    ASSERT_EQ(run("design --entry 0.25 --exit 0.5 --out " + d.string(), out), 0);
    const json rep = json::parse(slurp(out));
    EXPECT_NEAR(rep["d_over_L"].get<double>(), 1.0, 1e-9);
    EXPECT_LT(rep["tau_max_rel_error_group"].get<double>(), 1e-6);
    EXPECT_LT(rep["tau_max_rel_error_angle"].get<double>(), 1e-2);
    const auto z = column(d / "run_design_profile.csv", "z_mm");
    EXPECT_EQ(z.size(), 1001u);
    EXPECT_NEAR(z.back(), 4.5, 1e-12);
}

TEST(Cli, CompareChecksConfigurationHash) {
    const fs::path d = scratch("compare");
    const std::string base = "spectrum --config " + configs + "/linear.json --grid 128 --out " + d.string();
    ASSERT_EQ(run(base), 0);
    const std::string exact = (d / "linear_exact_coeffs.csv").string();
    const std::string approx = (d / "linear_approx_coeffs.csv").string();
    EXPECT_EQ(run("compare " + approx + " " + exact + " --out " + d.string()), 0);
    const json rep = chirpsq::io::read_json(d / "cmp_compare_report.json");
    EXPECT_EQ(rep["file_b"], "linear_exact_coeffs.csv");
    EXPECT_EQ(rep["config_hash_a"], rep["config_hash_b"]);

    const fs::path other = scratch("compare_other");
    ASSERT_EQ(run("spectrum --config " + configs + "/linear.json --nu 0.1 --grid 128 --out " + other.string()), 0);
    const std::string foreign = (other / "linear_exact_coeffs.csv").string();
    EXPECT_EQ(run("compare " + approx + " " + foreign + " --out " + d.string()), 2);
    EXPECT_EQ(run("compare " + approx + " " + foreign + " --force --out " + d.string()), 0);
}
