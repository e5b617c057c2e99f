#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <tuple>
#include <utility>
#include <vector>

#include <chirpsq/characterization.hpp>
#include <chirpsq/solver_approx.hpp>
#include <chirpsq/solver_exact.hpp>
#include <chirpsq/solver_ode.hpp>

using namespace chirpsq;

namespace {

const PolingProfile crystal = PolingProfile::linear(4.5, 894.0, 38.5);
const DispersionModel quad = DispersionModel::quadratic(735.0, 901.0);

// Coefficients on a symmetric grid from a closure returning (u, v).
template <typename F>
BogoliubovCoefficients synthetic(const FrequencyGrid& grid, F&& f) {
    BogoliubovCoefficients c{SolverTag::approx, grid, {}};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        BogoliubovPoint p;
        std::tie(p.u, p.v) = f(grid[i]);
        p.a = p.u;
        p.b = p.v;
        c.points.push_back(p);
    }
    return c;
}

}  // namespace

TEST(Spectra, VacuumInput) {
    const Spectra s = spectra(std::polar(1.0, 0.7), 0.0);
    EXPECT_EQ(s.s, 0.0);
    EXPECT_NEAR(s.s1, 1.0, 1e-15);
    EXPECT_NEAR(s.s2, 1.0, 1e-15);
    const auto a = characteristic_params(1.0, 0.0, 1.0, 0.0);
    EXPECT_FALSE(a.psi_l);
    EXPECT_FALSE(a.psi_0);
    EXPECT_EQ(a.r, 0.0);
}

TEST(Spectra, GainSqueezingIdentityAndForms) {
    for (double r : {0.01, 0.5, 2.0, 6.0}) {
        const complex u = std::polar(std::cosh(r), 0.3), v = std::polar(std::sinh(r), -1.1);
        const Spectra s = spectra(u, v);
        EXPECT_NEAR(s.s1 * s.s2, 1.0, 1e-12) << r;
        EXPECT_NEAR(s.s1, std::exp(2.0 * r), 1e-12 * s.s1);
        EXPECT_NEAR(s.s2, std::exp(-2.0 * r), 1e-9 * s.s2);
        EXPECT_NEAR(s.s, std::sinh(r) * std::sinh(r) / (2.0 * units::pi), 1e-12 * std::max(s.s, 1.0));
        EXPECT_NEAR(characteristic_params(u, v, u, v).r, r, 1e-12);
    }
    EXPECT_NEAR(to_db(0.5), -3.0103, 1e-4);
}

TEST(Angles, DefinitionsOnKnownPhases) {
    const complex u = std::polar(2.0, 0.4), v = std::polar(1.5, 1.0);
    const complex um = std::polar(2.0, -0.2), vm = std::polar(1.5, 0.6);
    const auto a = characteristic_params(u, v, um, vm);
    EXPECT_NEAR(*a.psi_l, 0.5, 1e-14);
    EXPECT_NEAR(*a.psi_0, 0.3, 1e-14);
    EXPECT_NEAR(a.kappa, 0.3, 1e-14);
    EXPECT_NEAR(wrap_half(2.0), 2.0 - units::pi, 1e-15);
    EXPECT_NEAR(wrap_half(-0.5 * units::pi), 0.5 * units::pi, 1e-15);
    EXPECT_NEAR(nearest_branch(0.1, 3.2, units::pi), 0.1 + units::pi, 1e-15);
}

TEST(Delay, QuadraticAngleGivesLinearDelay) {
    const auto grid = FrequencyGrid::symmetric(0.5, 4001);
    const double al = 735.0 * 4.5, w0 = quad.omega0();
    // psi_L = -(alpha L / 2) x^2, tau = 2 alpha L x / omega0
    const auto c = synthetic(grid, [&](double x) {
        return std::pair<complex, complex>{2.0, std::polar(std::sqrt(3.0), -al * x * x)};
    });
    const auto ch = characterize(c, w0);
    ASSERT_TRUE(ch.angles_resolved);
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
        const double want = 2.0 * al * grid[i] / w0 * units::femtoseconds_per_second;
        ASSERT_TRUE(ch.points[i].tau_fs);
        EXPECT_NEAR(*ch.points[i].tau_fs, want, 1e-9 * std::abs(want) + 1e-9);
    }
    const auto flat = characterize(synthetic(grid, [](double) {
        return std::pair<complex, complex>{2.0, std::sqrt(3.0)};
    }), w0);
    for (const auto& p : flat.points) EXPECT_EQ(*p.tau_fs, 0.0);
}

TEST(Delay, JumpRaisesUnwrapError) {
    EXPECT_THROW(delay_from_angle({0.1, 0.2, 0.3}, {0.0, 2.0, 2.1}, 1.0), UnwrapError);
    EXPECT_THROW(delay_from_angle({0.1}, {0.0}, 1.0), DomainError);
}

TEST(Delay, CoarseGridReportsUnresolvedAngles) {
    const auto grid = FrequencyGrid::symmetric(0.5, 65);
    const auto c = synthetic(grid, [](double x) {
        return std::pair<complex, complex>{2.0, std::polar(std::sqrt(3.0), 4000.0 * x * x)};
    });
    const auto ch = characterize(c, quad.omega0());
    EXPECT_FALSE(ch.angles_resolved);
    EXPECT_FALSE(ch.points[10].tau_fs);
}

TEST(Parity, SpectraEvenKappaOdd) {
    const auto grid = FrequencyGrid::symmetric(0.55, 256);
    const auto c = ExactSolver(crystal, quad, PumpCoupling::from_nu(0.25, crystal, 0.3)).solve(grid);
    const auto ch = characterize(c, quad.omega0());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& p = ch.points[i];
        const auto& m = ch.points[grid.mirror(i)];
        EXPECT_NEAR(p.s2, m.s2, 1e-7 * p.s2);
        EXPECT_NEAR(p.s, m.s, 1e-7 * std::max(p.s, 1e-12));
        EXPECT_LT(std::abs(std::remainder(p.kappa + m.kappa, units::pi)), 1e-7);
        if (p.psi_l && m.psi_l) {
            EXPECT_LT(std::abs(std::remainder(*p.psi_l - *m.psi_l, units::pi)), 1e-7);
        }
    }
}

TEST(Parity, KappaMatchesDispersion) {
    const auto grid = FrequencyGrid::symmetric(0.55, 128);
    const auto c = ExactSolver(crystal, quad, PumpCoupling::from_nu(0.1, crystal)).solve(grid);
    const auto ch = characterize(c, quad.omega0());
    for (const auto& p : ch.points) {
        EXPECT_LT(std::abs(std::remainder(p.kappa - quad.kappa_angle(p.x, 4.5), units::pi)), 1e-9) << p.x;
    }
}

TEST(Band, CrystalBandEdges) {
    const Band b = qpm_band(crystal, quad);
    EXPECT_NEAR(b.lo, std::sqrt((901.0 - 894.0) / 735.0), 1e-9);
    EXPECT_NEAR(b.hi, std::sqrt((901.0 - (894.0 - 38.5 * 4.5)) / 735.0), 1e-9);
    EXPECT_TRUE(b.contains(-0.3));
    EXPECT_FALSE(b.contains(0.05));
    const Band s = b.shrunk(0.02);
    EXPECT_NEAR(s.hi - s.lo, 0.96 * (b.hi - b.lo), 1e-14);
    EXPECT_THROW(qpm_band(PolingProfile::linear(1.0, 2000.0, 10.0), quad), OutOfBandError);
}

TEST(RippleAverage, RemovesFastOscillation) {
    std::vector<double> x, y;
    for (int i = 0; i < 2000; ++i) {
        x.push_back(0.1 + 0.4 * i / 1999.0);
        y.push_back(1.0 + 2.0 * x.back() + 0.3 * std::sin(600.0 * x.back()));
    }
    const auto r = ripple_average(x, y);
    for (std::size_t i = 200; i < 1800; ++i) EXPECT_NEAR(r[i], 1.0 + 2.0 * x[i], 0.01) << x[i];
    EXPECT_THROW(ripple_average({0.1, 0.2}, {1.0}), DomainError);
}

TEST(Compare, IdenticalSolutionsGiveZeroMetrics) {
    const auto grid = FrequencyGrid::symmetric(0.55, 256);
    const auto c = ApproxSolver(crystal, quad, PumpCoupling::from_nu(0.25, crystal)).solve(grid);
    const auto rep = compare(c, c, qpm_band(crystal, quad).shrunk(0.02));
    EXPECT_EQ(rep.mean_rel_v2, 0.0);
    EXPECT_EQ(rep.band_average_rel_s2, 0.0);
    EXPECT_EQ(rep.max_abs_s2, 0.0);
    EXPECT_NEAR(*rep.max_dpsi_l, 0.0, 1e-14);
    EXPECT_NEAR(*rep.max_dpsi_0, 0.0, 1e-14);
    EXPECT_FALSE(rep.deflection);
}

TEST(Compare, ExactAgainstOde) {
    const auto grid = FrequencyGrid::symmetric(0.55, 128);
    const auto c = PumpCoupling::from_nu(0.25, crystal, 0.2);
    const auto e = ExactSolver(crystal, quad, c).solve(grid);
    const auto o = OdeSolver(crystal, quad, c).solve(grid);
    const auto rep = compare(o, e, qpm_band(crystal, quad).shrunk(0.02));
    EXPECT_LT(rep.max_rel_v2, 1e-4);
    EXPECT_LT(*rep.max_dpsi_l, 1e-5);
    EXPECT_LT(*rep.max_dpsi_0, 1e-5);
}

TEST(Compare, DifferentGridsRejected) {
    const ApproxSolver s(crystal, quad, PumpCoupling::from_nu(0.1, crystal));
    EXPECT_THROW(compare(s.solve(FrequencyGrid::symmetric(0.55, 64)), s.solve(FrequencyGrid::symmetric(0.55, 66)),
                         {0.1, 0.5}),
                 DomainError);
}

// Pointwise the exact delay ripples around the group-velocity law (tens of
// percent where tau -> 0); the ripple-averaged curve follows it closely.
TEST(Delay, ExactWeakPumpFollowsGroupVelocityLaw) {
    const auto grid = FrequencyGrid::symmetric(0.55, 4096);
    const auto c = PumpCoupling::from_nu(0.01, crystal);
    const auto ch = characterize(ExactSolver(crystal, quad, c).solve(grid), quad.omega0());
    ASSERT_TRUE(ch.angles_resolved);
    const ApproxSolver approx(crystal, quad, c);
    const Band band = qpm_band(crystal, quad).shrunk(0.02);
    std::vector<double> xs, tau, want;
    for (const auto& p : ch.points) {
        if (p.x <= 0.0 || !band.contains(p.x) || !p.tau_fs) continue;
        xs.push_back(p.x);
        tau.push_back(*p.tau_fs);
        want.push_back(approx.relative_delay(p.x).from_group_velocity_fs);
    }
    ASSERT_GT(xs.size(), 1000u);
    const auto smooth = ripple_average(xs, tau);
    double sum = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) sum += std::abs(smooth[i] - want[i]) / std::abs(want[i]);
    EXPECT_LT(sum / static_cast<double>(xs.size()), 0.02);
}
