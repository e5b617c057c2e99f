#include <gtest/gtest.h>

#include <cmath>

#include <chirpsq/dispersion.hpp>

using namespace chirpsq;

namespace {

// Straight transcription of the temperature-dependent MgO:CLN law, used as an oracle.
double index_oracle(double lambda_um, double t) {
    const double f = (t - 24.5) * (t + 570.82);
    const double l2 = lambda_um * lambda_um;
    const double pole = 0.2020 + 6.113e-8 * f;
    return std::sqrt(5.756 + 2.860e-6 * f + (0.0983 + 4.700e-8 * f) / (l2 - pole * pole) +
                     (189.32 + 1.516e-4 * f) / (l2 - 12.52 * 12.52) - 1.32e-2 * l2);
}

}  // namespace

TEST(Sellmeier, MatchesOracleAndFrozenValues) {
    EXPECT_NEAR(refractive_index(532.0), 2.2244389865983383, 1e-13);
    EXPECT_NEAR(refractive_index(1064.0), 2.1481542422227045, 1e-13);
    EXPECT_NEAR(refractive_index(1550.0, 40.0), 2.1347835945243796, 1e-13);
    for (double l : {600.0, 900.0, 1300.0, 2500.0, 3900.0}) {
        for (double t : {20.0, 24.5, 60.0}) EXPECT_NEAR(refractive_index(l, t), index_oracle(l * 1e-3, t), 1e-14);
    }
}

TEST(Sellmeier, DeterministicCalls) { EXPECT_EQ(refractive_index(811.3), refractive_index(811.3)); }

TEST(Sellmeier, NormalDispersionBetween700And2100) {
    double prev = refractive_index(700.0);
    for (double l = 710.0; l <= 2100.0; l += 10.0) {
        const double n = refractive_index(l);
        EXPECT_LT(n, prev) << l;
        prev = n;
    }
}

TEST(Sellmeier, WindowViolationNamesTheWindow) {
    try {
        refractive_index(450.0);
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("500"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("4000"), std::string::npos);
    }
    EXPECT_THROW(refractive_index(4100.0), DomainError);
}

TEST(PhaseMismatch, SellmeierCrystalValues) {
    const auto d = DispersionModel::sellmeier();
    EXPECT_NEAR(d.phase_mismatch(0.0), 901.0, 1.0);
    EXPECT_NEAR(d.phase_mismatch(0.1), 894.0, 0.5);
    EXPECT_NEAR(d.phase_mismatch(0.0), 900.9608741032571, 1e-8);
    EXPECT_NEAR(d.phase_mismatch(0.5), 720.2024545857084, 1e-8);
}

TEST(PhaseMismatch, QuadraticModeIsExact) {
    const auto d = DispersionModel::quadratic(735.0, 901.0);
    EXPECT_DOUBLE_EQ(d.phase_mismatch(0.0), 901.0);
    EXPECT_NEAR(d.phase_mismatch(0.1), 893.65, 1e-12);
    for (double x : {0.05, 0.3, 0.77}) {
        EXPECT_NEAR(d.phase_mismatch(x), 901.0 - 735.0 * x * x, 1e-12);
        EXPECT_EQ(d.phase_mismatch(x), d.phase_mismatch(-x));
    }
}

TEST(PhaseMismatch, EvenInDetuning) {
    const auto d = DispersionModel::sellmeier();
    for (double x : {0.02, 0.2, 0.45}) EXPECT_NEAR(d.phase_mismatch(x), d.phase_mismatch(-x), 1e-11);
}

TEST(PhaseMismatch, DetuningBeyondCarrierRejected) {
    const auto d = DispersionModel::quadratic();
    EXPECT_THROW(d.phase_mismatch(1.0), DomainError);
    EXPECT_THROW(d.wavevector(-1.2), DomainError);
}

TEST(QuadraticFit, RecoversCrystalCoefficients) {
    const auto fit = DispersionModel::sellmeier().quadratic_fit();
    EXPECT_NEAR(fit.alpha, 735.0, 0.01 * 735.0);
    EXPECT_NEAR(fit.beta, 901.0, 0.01 * 901.0);
    EXPECT_NEAR(fit.alpha, 734.7490845859284, 0.05);
    const auto q = DispersionModel::quadratic(735.0, 901.0).quadratic_fit();
    EXPECT_NEAR(q.alpha, 735.0, 1e-6);
    EXPECT_NEAR(q.beta, 901.0, 1e-12);
}

TEST(QuadraticFit, InverseLaw) {
    const auto d = DispersionModel::quadratic();
    EXPECT_NEAR(d.quadratic_detuning_for(d.phase_mismatch(0.37)), 0.37, 1e-14);
    EXPECT_THROW(d.quadratic_detuning_for(950.0), DomainError);
    EXPECT_THROW(DispersionModel::sellmeier().quadratic_detuning_for(800.0), DomainError);
    EXPECT_THROW(DispersionModel::quadratic(-1.0, 901.0), DomainError);
}

TEST(GroupVelocity, MatchesFiniteDifferenceOfWavevector) {
    for (auto d : {DispersionModel::sellmeier(), DispersionModel::quadratic()}) {
        for (double x : {-0.4, 0.0, 0.25}) {
            const double h = 1e-5;
            const double fd = (d.wavevector(x + h) - d.wavevector(x - h)) / (2.0 * h * d.omega0());
            EXPECT_NEAR(d.inverse_group_velocity(x), fd, 1e-8 * std::abs(fd)) << x;
        }
    }
}

TEST(GroupVelocity, MismatchSlopeConsistent) {
    for (auto d : {DispersionModel::sellmeier(), DispersionModel::quadratic()}) {
        const double h = 1e-5, x = 0.3;
        const double fd = (d.phase_mismatch(x + h) - d.phase_mismatch(x - h)) / (2.0 * h * d.omega0());
        EXPECT_NEAR(d.phase_mismatch_slope(x), fd, 1e-7 * std::abs(fd));
    }
}

TEST(Kappa, OddAndZeroAtCentre) {
    const auto d = DispersionModel::quadratic();
    EXPECT_EQ(d.kappa_angle(0.0, 4.5), 0.0);
    for (double x : {0.1, 0.33}) EXPECT_NEAR(d.kappa_angle(x, 4.5), -d.kappa_angle(-x, 4.5), 1e-9);
    const double x = 0.2;
    EXPECT_NEAR(d.kappa_angle(x, 4.5), 0.5 * (d.wavevector(x) - d.wavevector(-x)) * 4.5, 1e-9);
}

TEST(FrequencyGrid, SymmetricGridMirrorsExactly) {
    for (std::size_t n : {64u, 65u, 1024u}) {
        const auto g = FrequencyGrid::symmetric(0.55, n);
        ASSERT_TRUE(g.is_symmetric());
        for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(g[i], -g[g.mirror(i)]);
        EXPECT_DOUBLE_EQ(g[0], -0.55);
        EXPECT_DOUBLE_EQ(g[n - 1], 0.55);
    }
}

TEST(FrequencyGrid, Validation) {
    EXPECT_THROW(FrequencyGrid({0.1}), DomainError);
    EXPECT_THROW(FrequencyGrid({0.1, 0.1}), DomainError);
    EXPECT_THROW(FrequencyGrid({0.1, 1.0}), DomainError);
    const auto g = FrequencyGrid::uniform(0.1, 0.4, 10);
    EXPECT_FALSE(g.is_symmetric());
    EXPECT_THROW(g.mirror(0), DomainError);
}
