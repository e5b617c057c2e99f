#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>

#include "bogoliubov.hpp"
#include "dispersion.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "poling.hpp"

namespace chirpsq {

/// Tolerances are global targets: the step controller runs at
/// local_tolerance_factor times them, since DP5 drift grows about linearly with
/// the number of steps across the oscillating phase.
struct OdeOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    std::size_t max_steps = 2'000'000;
    double local_tolerance_factor = 1e-2;
};

struct IntegrationStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
};

namespace detail {

// Dormand-Prince 5(4) tableau.
struct DormandPrince {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
};

}  // namespace detail

/// Adaptive Dormand-Prince 5(4) integration of y' = f(t, y) from t0 to t1 for a
/// fixed-size complex state. Error norm is the max over components of
/// |err| / (f (abs_tol + rel_tol max(|y|, |y_new|))), f the local tolerance factor.
template <std::size_t N, typename Rhs>
std::array<complex, N> integrate_dopri5(Rhs&& rhs, double t0, double t1, std::array<complex, N> y,
                                        const OdeOptions& options, double initial_step,
                                        IntegrationStats* stats = nullptr) {
    using State = std::array<complex, N>;
    using T = detail::DormandPrince;
    auto combine = [](const State& base, double h, std::initializer_list<std::pair<double, const State*>> terms) {
        State out = base;
        for (const auto& [w, k] : terms) {
            if (w == 0.0) continue;
            for (std::size_t i = 0; i < N; ++i) out[i] += (h * w) * (*k)[i];
        }
        return out;
    };

    const double span = t1 - t0;
    const double direction = span >= 0.0 ? 1.0 : -1.0;
    double t = t0;
    double h = direction * std::min(std::abs(initial_step), std::abs(span));
    State k1 = rhs(t, y);
    std::size_t steps = 0;
    IntegrationStats local;
    while (direction * (t1 - t) > 0.0) {
        if (++steps > options.max_steps) throw StiffnessError("maximum number of integration steps exceeded");
        if (direction * (t + h - t1) > 0.0) h = t1 - t;
        if (std::abs(h) < 1e-14 * std::max(std::abs(span), 1e-300)) {
            throw StiffnessError("integration step size underflow");
        }
        const State k2 = rhs(t + T::c2 * h, combine(y, h, {{T::a21, &k1}}));
        const State k3 = rhs(t + T::c3 * h, combine(y, h, {{T::a31, &k1}, {T::a32, &k2}}));
        const State k4 = rhs(t + T::c4 * h, combine(y, h, {{T::a41, &k1}, {T::a42, &k2}, {T::a43, &k3}}));
        const State k5 =
            rhs(t + T::c5 * h, combine(y, h, {{T::a51, &k1}, {T::a52, &k2}, {T::a53, &k3}, {T::a54, &k4}}));
        const State k6 = rhs(t + h, combine(y, h, {{T::a61, &k1}, {T::a62, &k2}, {T::a63, &k3}, {T::a64, &k4},
                                                   {T::a65, &k5}}));
        const State y_new =
            combine(y, h, {{T::b1, &k1}, {T::b3, &k3}, {T::b4, &k4}, {T::b5, &k5}, {T::b6, &k6}});
        const State k7 = rhs(t + h, y_new);

        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const complex e = h * (T::e1 * k1[i] + T::e3 * k3[i] + T::e4 * k4[i] + T::e5 * k5[i] +
                                   T::e6 * k6[i] + T::e7 * k7[i]);
            const double scale = options.local_tolerance_factor *
                                 (options.abs_tol + options.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i])));
            err = std::max(err, std::abs(e) / scale);
        }
        if (err <= 1.0) {
            t += h;
            y = y_new;
            k1 = k7;
            ++local.accepted;
            const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
            h *= factor;
        } else {
            ++local.rejected;
            h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
        }
    }
    if (stats) *stats = local;
    return y;
}

/// Direct numerical integration of the coupled slowly varying amplitudes
///   b~'  = -(i/2)(Delta - K(z)) b~  + |gamma| b~+
///   b~+' = +(i/2)(Delta - K(z)) b~+ + |gamma| b~
/// for any monotonic profile, both fundamental columns in one pass.
class OdeSolver {
public:
    OdeSolver(PolingProfile profile, DispersionModel dispersion, PumpCoupling coupling, OdeOptions options = {})
        : profile_(std::move(profile)), dispersion_(std::move(dispersion)), coupling_(coupling), options_(options) {
        if (!(options_.rel_tol > 0.0) || !(options_.abs_tol >= 0.0) || !(options_.local_tolerance_factor > 0.0)) {
            throw DomainError("ODE tolerances must be positive");
        }
    }

    const OdeOptions& options() const noexcept { return options_; }

    /// Full fundamental matrix at z = L.
    LayerMatrix propagator(double x, IntegrationStats* stats = nullptr) const {
        const double delta = dispersion_.phase_mismatch(x);
        const double gamma = coupling_.gamma;
        const PolingProfile& profile = profile_;
        const complex half_i(0.0, 0.5);
        auto rhs = [&](double z, const std::array<complex, 4>& y) {
            const complex rot = half_i * (delta - profile.value(z));
            return std::array<complex, 4>{-rot * y[0] + gamma * y[1], rot * y[1] + gamma * y[0],
                                          -rot * y[2] + gamma * y[3], rot * y[3] + gamma * y[2]};
        };
        const double rate = 0.5 * std::max(std::abs(delta - profile.start_value()), std::abs(delta - profile.end_value())) +
                            gamma + 1.0;
        const auto y = integrate_dopri5<4>(rhs, 0.0, profile.length(), {1.0, 0.0, 0.0, 1.0}, options_,
                                           0.01 / rate, stats);
        // column 1 starts from b~ = 1, column 2 from b~+ = 1
        LayerMatrix m{y[0], y[2], y[3], y[1]};
        const double drift = std::abs(std::norm(m.a) - std::norm(m.b) - 1.0);
        if (drift > 100.0 * options_.rel_tol * std::max(1.0, std::norm(m.a))) {
            throw AccuracyLossError("unitarity drift in ODE integration at detuning " + std::to_string(x), drift);
        }
        return m;
    }

    BogoliubovPoint at(double x) const {
        const LayerMatrix m = propagator(x);
        BogoliubovPoint p = assemble_sideband(m.a, m.b, x, profile_, dispersion_, coupling_);
        try {
            phase_match_point(x, profile_, dispersion_);
        } catch (const OutOfBandError&) {
            p.in_band = false;
        }
        return p;
    }

    BogoliubovCoefficients solve(const FrequencyGrid& grid, unsigned threads = 0) const {
        BogoliubovCoefficients out{SolverTag::ode, grid, std::vector<BogoliubovPoint>(grid.size())};
        parallel_for(grid.size(), [&](std::size_t i) { out.points[i] = at(grid[i]); }, threads);
        return out;
    }

private:
    PolingProfile profile_;
    DispersionModel dispersion_;
    PumpCoupling coupling_;
    OdeOptions options_;
};

inline LayerMatrix integrate_AB(double x, const PolingProfile& profile, const DispersionModel& dispersion,
                                const PumpCoupling& coupling, OdeOptions options = {}) {
    return OdeSolver(profile, dispersion, coupling, options).propagator(x);
}

inline BogoliubovPoint integrate_UV(double x, const PolingProfile& profile, const DispersionModel& dispersion,
                                    const PumpCoupling& coupling, OdeOptions options = {}) {
    return OdeSolver(profile, dispersion, coupling, options).at(x);
}

}  // namespace chirpsq
