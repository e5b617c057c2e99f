#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include <chirpsq/characterization.hpp>
#include <chirpsq/solver_approx.hpp>

using namespace chirpsq;

namespace {

const PolingProfile crystal = PolingProfile::linear(4.5, 894.0, 38.5);
const DispersionModel quad = DispersionModel::quadratic(735.0, 901.0);
const DelayDesign down = design_from_band_edges(0.25, 0.5, 4.5, quad);
const DelayDesign up = design_from_band_edges(0.5, 0.25, 4.5, quad);

// distance between angles modulo pi
double mod_pi_gap(double a, double b) { return std::abs(std::remainder(a - b, units::pi)); }

}  // namespace

TEST(FirstOrder, GainAtNuPointOne) {
    const ApproxSolver s(crystal, quad, PumpCoupling::from_nu(0.1, crystal));
    const BogoliubovPoint p = s.at(0.3);
    EXPECT_NEAR(std::abs(p.u), std::exp(0.1 * units::pi), 1e-12);
    EXPECT_NEAR(std::abs(p.v), std::sqrt(std::expm1(0.2 * units::pi)), 1e-12);
    EXPECT_NEAR(std::abs(p.u), 1.3691, 5e-4);
    EXPECT_NEAR(std::abs(p.v), 0.9348, 5e-4);
    EXPECT_NEAR(s.params(0.3).r, 0.8347, 5e-4);
    EXPECT_NEAR(s.params(0.3).r, std::log(std::abs(p.u) + std::abs(p.v)), 1e-12);
    const Spectra sp = spectra(p.u, p.v);
    EXPECT_NEAR(sp.s2, std::pow(std::abs(p.u) - std::abs(p.v), 2), 1e-12);
    EXPECT_NEAR(sp.s2, 0.1886, 5e-4);
    EXPECT_NEAR(to_db(sp.s2), -7.24, 0.02);
}

TEST(FirstOrder, NoPumpPassesThrough) {
    const ApproxSolver s(crystal, quad, {0.0, 0.0});
    const BogoliubovPoint p = s.at(0.3);
    EXPECT_NEAR(std::abs(p.u), 1.0, 1e-15);
    EXPECT_EQ(p.v, complex(0.0));
}

TEST(FirstOrder, OutOfBandPassThrough) {
    const ApproxSolver s(crystal, quad, PumpCoupling::from_nu(0.25, crystal));
    for (double x : {0.0, 0.05, -0.52}) {
        const BogoliubovPoint p = s.at(x);
        EXPECT_FALSE(p.in_band);
        EXPECT_EQ(p.v, complex(0.0));
        const double drift = (quad.wavevector(x) - quad.central_wavevector()) * 4.5;
        EXPECT_LT(std::abs(p.u - std::polar(1.0, drift)), 1e-12);
        EXPECT_DOUBLE_EQ(spectra(p.u, p.v).s2, 1.0);
    }
    EXPECT_THROW(s.decompose(0.05), OutOfBandError);
}

TEST(FirstOrder, RosenbluthLimit) {
    const ApproxSolver s(crystal, quad, PumpCoupling::from_nu(3.0, crystal));
    const BogoliubovPoint p = s.at(0.3);
    EXPECT_LT(1.0 - std::abs(p.v) / std::abs(p.u), 1e-5);
}

TEST(FirstOrder, UnitaryEverywhere) {
    const auto grid = FrequencyGrid::symmetric(0.55, 512);
    for (double nu : {0.01, 0.1, 0.25, 1.0}) {
        EXPECT_LT(ApproxSolver(crystal, quad, PumpCoupling::from_nu(nu, crystal)).solve(grid).max_unitarity_residual(),
                  1e-8);
    }
}

TEST(LayerFamily, RosenbluthAndPhaseMatchedMembers) {
    for (double nu : {0.1, 0.7, 2.0}) {
        const auto one = layer_transform_family(nu, 1.0);
        EXPECT_NEAR(one.diagonal, std::exp(units::pi * nu), 1e-12 * one.diagonal);
        const auto zero = layer_transform_family(nu, 0.0);
        EXPECT_NEAR(zero.diagonal, std::cosh(units::pi * nu), 1e-12 * zero.diagonal);
        EXPECT_NEAR(zero.mu_tilde, 1.0, 1e-12);
        for (const auto& f : {one, zero, layer_transform_family(nu, complex(0.5, 0.3))}) {
            EXPECT_NEAR(f.diagonal * f.diagonal - f.off_diagonal * f.off_diagonal, 1.0, 1e-9 * f.diagonal * f.diagonal);
        }
    }
    EXPECT_NEAR(layer_transform_family(2.0, 1.0).diagonal, 535.4916555247646, 1e-9);
    EXPECT_NEAR(layer_transform_family(1e-8, 0.37).diagonal, 1.0, 1e-7);
    EXPECT_THROW(layer_transform_family(0.5, -1.0), DomainError);
    EXPECT_THROW(layer_transform_family(0.0, 1.0), DomainError);
}

TEST(LayerPhaseModel, QuadraticAndExact) {
    EXPECT_NEAR(layer_phase(0.01, LayerPhaseModel::quadratic_fit), -0.009975, 1e-15);
    EXPECT_NEAR(layer_phase(1.0, LayerPhaseModel::quadratic_fit), -0.75, 1e-15);
    EXPECT_NEAR(layer_phase(1.0, LayerPhaseModel::exact_layer), layer_phase_exact(1.0), 1e-15);
    EXPECT_EQ(layer_phase(0.0, LayerPhaseModel::exact_layer), 0.0);
}

TEST(Phases, EmptyIntegralsAtFaces) {
    EXPECT_EQ(pre_phase_at(850.0, 0.0, crystal), 0.0);
    EXPECT_NEAR(post_phase_at(850.0, 4.5, crystal), 0.0, 1e-12);
    const double delta = quad.phase_mismatch(0.3), zpm = crystal.locate(delta);
    // phi + theta covers the whole crystal
    EXPECT_NEAR(pre_phase_at(delta, zpm, crystal) + post_phase_at(delta, zpm, crystal),
                -0.5 * (delta * 4.5 - crystal.integral(4.5)), 1e-10);
    // linear profile: phi = (Delta - K0)^2 / (4 zeta)
    EXPECT_NEAR(pre_phase(0.3, crystal, quad), std::pow(delta - 894.0, 2) / (4.0 * 38.5), 1e-10);
}

TEST(Params, ClosedFormsMatchCharacteristicAngles) {
    // the coefficient angles carry an extra constant (k_p - 2 k0) L / 2
    const ApproxSolver s(crystal, quad, PumpCoupling::from_nu(0.1, crystal, 0.9));
    const double shift = 0.5 * (quad.pump_wavevector() - 2.0 * quad.central_wavevector()) * 4.5;
    for (double x : {0.12, 0.3, 0.44}) {
        const auto p = s.at(x), m = s.at(-x);
        const auto a = characteristic_params(p.u, p.v, m.u, m.v);
        const auto f = s.params(x);
        ASSERT_TRUE(a.psi_l && a.psi_0);
        EXPECT_LT(mod_pi_gap(*a.psi_l, f.psi_l + shift), 1e-10);
        EXPECT_LT(mod_pi_gap(*a.psi_0, f.psi_0), 1e-10);
        EXPECT_NEAR(a.r, f.r, 1e-12);
    }
}

TEST(Params, DesignedProfileAngleShapes) {
    const auto c = PumpCoupling::from_nu0(0.01, down.profile, 0.3);
    const ApproxSolver s(down.profile, quad, c);
    const double al = 735.0 * 4.5;
    std::optional<double> cl, c0;
    for (double x = 0.26; x < 0.495; x += 0.01) {
        const auto d = s.decompose(x);
        const auto f = s.params(x);
        const double rl = f.psi_l + 0.5 * al * (x - 0.5) * (x - 0.5) - 0.5 * d.phi_a;
        const double r0 = f.psi_0 + al * (x - 0.25) * (x - 0.25) - 0.5 * d.phi_a;
        if (!cl) cl = rl, c0 = r0;
        EXPECT_NEAR(rl, *cl, 1e-8) << x;
        EXPECT_NEAR(r0, *c0, 1e-8) << x;
    }
}

TEST(Params, IncreasingProfileFlipsLayerPhase) {
    const auto c = PumpCoupling::from_nu0(0.2, up.profile, 0.4);
    const ApproxSolver s(up.profile, quad, c);
    const auto d = s.decompose(0.35);
    EXPECT_NEAR(d.phi_a, 0.4 - layer_phase(d.nu, LayerPhaseModel::quadratic_fit), 1e-14);
}

TEST(Params, ReferencePumpPhaseZeroesPsiL) {
    const ApproxSolver probe(crystal, quad, PumpCoupling::from_nu(0.25, crystal));
    auto c = PumpCoupling::from_nu(0.25, crystal, probe.reference_pump_phase(0.3));
    EXPECT_LT(mod_pi_gap(ApproxSolver(crystal, quad, c).params(0.3).psi_l, 0.0), 1e-10);
    const ApproxSolver probe_qh(down.profile, quad, PumpCoupling::from_nu0(0.1, down.profile));
    c = PumpCoupling::from_nu0(0.1, down.profile, probe_qh.reference_pump_phase(0.5));
    EXPECT_LT(mod_pi_gap(ApproxSolver(down.profile, quad, c).params(0.5).psi_l, 0.0), 1e-9);
}

TEST(Delay, DesignedProfilesRealizeRequestedLaw) {
    for (const DelayDesign* d : {&down, &up}) {
        const ApproxSolver s(d->profile, quad, PumpCoupling::from_nu0(0.01, d->profile));
        for (double x = 0.26; x < 0.49; x += 0.01) {
            const RelativeDelay t = s.relative_delay(x);
            const double want = (d->a * x * quad.omega0() + d->b) * units::femtoseconds_per_second;
            EXPECT_NEAR(t.from_angle_fs, want, 0.01 * std::abs(want)) << x;
            EXPECT_NEAR(t.from_group_velocity_fs, want, 0.01 * std::abs(want)) << x;
        }
    }
}

TEST(Delay, VanishesWhereMatchingMovesToExitFace) {
    const ApproxSolver s(down.profile, quad, PumpCoupling::from_nu0(0.01, down.profile));
    const double near_exit = s.relative_delay(0.5 - 2e-5).from_group_velocity_fs;
    const double mid = s.relative_delay(0.375).from_group_velocity_fs;
    EXPECT_LT(std::abs(near_exit), 1e-3 * std::abs(mid));
    EXPECT_THROW(s.relative_delay(-0.3), DomainError);
}

TEST(FirstOrder, FlatProfilesNeverReachTheLayer) {
    // a vanishing K' would make the layer singular; such profiles are refused up front
    EXPECT_THROW(PolingProfile::custom({0.0, 1.0, 2.0, 3.0}, {900.0, 850.0, 850.0, 800.0}), DomainError);
    EXPECT_THROW(PolingProfile::linear(4.5, 894.0, 0.0), DomainError);
}

TEST(FirstOrder, EdgeTruncationFlag) {
    const ApproxSolver s(crystal, quad, PumpCoupling::from_nu(1.0, crystal));
    EXPECT_TRUE(s.at(0.1).edge_truncated);
    EXPECT_FALSE(s.at(0.3).edge_truncated);
}
