#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dispersion.hpp"
#include "errors.hpp"
#include "units.hpp"

namespace chirpsq {

/// Local grating spatial frequency K(z) on [0, L], strictly monotonic and positive.
class PolingProfile {
public:
    enum class Kind { linear, quadratic_hyperbolic, custom };

    /// K(z) = K0 - chirp z.
    static PolingProfile linear(double length_mm, double k0, double chirp) {
        if (chirp == 0.0) throw DomainError("linear profile needs a non-zero chirp rate");
        PolingProfile p(Kind::linear, length_mm);
        p.k0_ = k0;
        p.chirp_ = chirp;
        p.finish();
        return p;
    }

    /// K(z) = beta - alpha x_pm(z)^2 with x_pm(z) = c / (L + d - z), c = -d (b/a) / omega0.
    static PolingProfile quadratic_hyperbolic(double length_mm, double alpha, double beta, double d,
                                              double b_over_a, double omega0) {
        PolingProfile p(Kind::quadratic_hyperbolic, length_mm);
        if (d >= -length_mm && d <= 0.0) {
            throw DomainError("quadratic-hyperbolic profile needs d > 0 or d < -L");
        }
        p.alpha_ = alpha;
        p.beta_ = beta;
        p.d_ = d;
        p.b_over_a_ = b_over_a;
        p.omega0_ = omega0;
        p.c_ = -d * b_over_a / omega0;
        p.finish();
        return p;
    }

    /// Tabulated (z, K) pairs, monotone piecewise-cubic (Fritsch-Carlson) interpolant.
    static PolingProfile custom(std::vector<double> z, std::vector<double> k) {
        if (z.size() != k.size() || z.size() < 2) {
            throw DomainError("custom profile needs at least two (z, K) pairs of equal length");
        }
        if (z.front() != 0.0) throw DomainError("custom profile table must start at z = 0");
        for (std::size_t i = 1; i < z.size(); ++i) {
            if (!(z[i] > z[i - 1])) throw DomainError("custom profile z must be strictly increasing");
        }
        PolingProfile p(Kind::custom, z.back());
        p.table_z_ = std::move(z);
        p.table_k_ = std::move(k);
        p.build_interpolant();
        p.finish();
        return p;
    }

    Kind kind() const noexcept { return kind_; }
    double length() const noexcept { return length_; }
    bool decreasing() const noexcept { return decreasing_; }

    // linear parameters
    double k0() const noexcept { return k0_; }
    double chirp() const noexcept { return chirp_; }
    // quadratic-hyperbolic parameters
    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }
    double d() const noexcept { return d_; }
    double b_over_a() const noexcept { return b_over_a_; }
    const std::vector<double>& table_z() const noexcept { return table_z_; }
    const std::vector<double>& table_k() const noexcept { return table_k_; }

    double start_value() const { return value(0.0); }
    double end_value() const { return value(length_); }
    double min_value() const { return std::min(start_value(), end_value()); }
    double max_value() const { return std::max(start_value(), end_value()); }

    double value(double z) const {
        switch (kind_) {
        case Kind::linear: return k0_ - chirp_ * z;
        case Kind::quadratic_hyperbolic: {
            const double xpm = c_ / (length_ + d_ - z);
            return beta_ - alpha_ * xpm * xpm;
        }
        case Kind::custom: return hermite(z, 0);
        }
        return 0.0;
    }

    double slope(double z) const {
        switch (kind_) {
        case Kind::linear: return -chirp_;
        case Kind::quadratic_hyperbolic: {
            const double u = length_ + d_ - z;
            return -2.0 * alpha_ * c_ * c_ / (u * u * u);
        }
        case Kind::custom: return hermite(z, 1);
        }
        return 0.0;
    }

    double curvature(double z) const {
        switch (kind_) {
        case Kind::linear: return 0.0;
        case Kind::quadratic_hyperbolic: {
            const double u = length_ + d_ - z;
            return -6.0 * alpha_ * c_ * c_ / (u * u * u * u);
        }
        case Kind::custom: return hermite(z, 2);
        }
        return 0.0;
    }

    /// Integral of K from 0 to z, closed form for every kind.
    double integral(double z) const {
        switch (kind_) {
        case Kind::linear: return k0_ * z - 0.5 * chirp_ * z * z;
        case Kind::quadratic_hyperbolic:
            return beta_ * z - alpha_ * c_ * c_ * (1.0 / (length_ + d_ - z) - 1.0 / (length_ + d_));
        case Kind::custom: return custom_integral(z);
        }
        return 0.0;
    }

    /// Local grating period derivative, Lambda'(z) = -2 pi K'(z) / K(z)^2.
    double period_slope(double z) const {
        const double k = value(z);
        return -units::two_pi * slope(z) / (k * k);
    }

    /// Normalized detuning phase-matched at z (quadratic-hyperbolic kind only).
    double designed_detuning_at(double z) const {
        if (kind_ != Kind::quadratic_hyperbolic) {
            throw DomainError("designed detuning is defined for quadratic-hyperbolic profiles");
        }
        return c_ / (length_ + d_ - z);
    }

    /// Unique z in [0, L] with K(z) = target: bisection to a bracket, then Newton.
    /// Throws OutOfBandError when target is outside the profile range.
    double locate(double target) const {
        const double k_start = start_value();
        const double k_end = end_value();
        const double lo = std::min(k_start, k_end);
        const double hi = std::max(k_start, k_end);
        const double slack = 1e-12 * std::max(std::abs(lo), std::abs(hi));
        if (target < lo - slack || target > hi + slack) {
            std::ostringstream os;
            os << "spatial frequency " << target << " rad/mm outside profile range [" << lo << ", "
               << hi << "]";
            throw OutOfBandError(os.str());
        }
        if (target <= lo) return decreasing_ ? length_ : 0.0;
        if (target >= hi) return decreasing_ ? 0.0 : length_;
        // f(z) = sign * (K(z) - target) is increasing in z
        const double sign = decreasing_ ? -1.0 : 1.0;
        double a = 0.0;
        double b = length_;
        while (b - a > 1e-6 * length_) {
            const double m = 0.5 * (a + b);
            if (sign * (value(m) - target) < 0.0) a = m; else b = m;
        }
        double z = 0.5 * (a + b);
        for (int it = 0; it < 50; ++it) {
            const double f = value(z) - target;
            const double fp = slope(z);
            if (fp == 0.0) break;
            double next = z - f / fp;
            if (next < a || next > b) next = 0.5 * (a + b);
            if (sign * (value(next) - target) < 0.0) a = next; else b = next;
            const double step = std::abs(next - z);
            z = next;
            if (step <= 1e-15 * length_) break;
        }
        return z;
    }

private:
    PolingProfile(Kind kind, double length) : kind_(kind), length_(length) {
        if (!(length > 0.0)) throw DomainError("crystal length must be positive");
    }

    void finish() {
        constexpr int samples = 10000;
        if (end_value() == start_value()) throw DomainError("poling profile must not be constant on [0, L]");
        const double s0 = slope(0.0);
        decreasing_ = s0 < 0.0 || (s0 == 0.0 && end_value() < start_value());
        for (int i = 0; i <= samples; ++i) {
            const double z = length_ * i / samples;
            const double s = slope(z);
            if (!std::isfinite(s) || (decreasing_ ? s > 0.0 : s < 0.0)) {
                throw DomainError("poling profile must be strictly monotonic on [0, L]");
            }
            if (!(value(z) > 0.0)) throw DomainError("poling profile must stay positive on [0, L]");
        }
        if (start_value() == end_value()) throw DomainError("poling profile is constant");
    }

    void build_interpolant() {
        const std::size_t n = table_z_.size();
        std::vector<double> h(n - 1), delta(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            h[i] = table_z_[i + 1] - table_z_[i];
            delta[i] = (table_k_[i + 1] - table_k_[i]) / h[i];
            if (delta[i] == 0.0 || (i > 0 && delta[i] * delta[i - 1] < 0.0)) {
                throw DomainError("custom profile table must be strictly monotonic");
            }
        }
        table_slope_.assign(n, 0.0);
        table_slope_.front() = delta.front();
        table_slope_.back() = delta.back();
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double w1 = 2.0 * h[i] + h[i - 1];
            const double w2 = h[i] + 2.0 * h[i - 1];
            table_slope_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
        cumulative_.assign(n, 0.0);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            cumulative_[i + 1] = cumulative_[i] + 0.5 * h[i] * (table_k_[i] + table_k_[i + 1]) +
                                 h[i] * h[i] * (table_slope_[i] - table_slope_[i + 1]) / 12.0;
        }
    }

    std::size_t segment(double z) const {
        auto it = std::upper_bound(table_z_.begin(), table_z_.end(), z);
        std::size_t i = it == table_z_.begin() ? 0 : static_cast<std::size_t>(it - table_z_.begin()) - 1;
        return std::min(i, table_z_.size() - 2);
    }

    double hermite(double z, int derivative) const {
        const std::size_t i = segment(z);
        const double h = table_z_[i + 1] - table_z_[i];
        const double t = (z - table_z_[i]) / h;
        const double y0 = table_k_[i], y1 = table_k_[i + 1];
        const double m0 = table_slope_[i] * h, m1 = table_slope_[i + 1] * h;
        switch (derivative) {
        case 0:
            return (2 * t * t * t - 3 * t * t + 1) * y0 + (t * t * t - 2 * t * t + t) * m0 +
                   (-2 * t * t * t + 3 * t * t) * y1 + (t * t * t - t * t) * m1;
        case 1:
            return ((6 * t * t - 6 * t) * y0 + (3 * t * t - 4 * t + 1) * m0 + (-6 * t * t + 6 * t) * y1 +
                    (3 * t * t - 2 * t) * m1) / h;
        default:
            return ((12 * t - 6) * y0 + (6 * t - 4) * m0 + (-12 * t + 6) * y1 + (6 * t - 2) * m1) / (h * h);
        }
    }

    double custom_integral(double z) const {
        const std::size_t i = segment(z);
        const double h = table_z_[i + 1] - table_z_[i];
        const double t = (z - table_z_[i]) / h;
        const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
        const double y0 = table_k_[i], y1 = table_k_[i + 1];
        const double m0 = table_slope_[i] * h, m1 = table_slope_[i + 1] * h;
        const double part = (t4 / 2 - t3 + t) * y0 + (t4 / 4 - 2 * t3 / 3 + t2 / 2) * m0 +
                            (-t4 / 2 + t3) * y1 + (t4 / 4 - t3 / 3) * m1;
        return cumulative_[i] + h * part;
    }

    Kind kind_;
    double length_;
    bool decreasing_ = true;
    double k0_ = 0.0, chirp_ = 0.0;
    double alpha_ = 0.0, beta_ = 0.0, d_ = 0.0, b_over_a_ = 0.0, omega0_ = 0.0, c_ = 0.0;
    std::vector<double> table_z_, table_k_, table_slope_, cumulative_;
};

/// Undepleted-pump coupling |gamma| (rad/mm) and phi0 = arg(i gamma).
struct PumpCoupling {
    double gamma = 0.0;
    double phi0 = 0.0;

    /// Rosenbluth parameter nu for a linear profile: |gamma| = sqrt(nu * chirp).
    static PumpCoupling from_nu(double nu, const PolingProfile& profile, double phi0 = 0.0) {
        if (nu < 0.0) throw DomainError("nu must be non-negative");
        if (profile.kind() != PolingProfile::Kind::linear) {
            throw DomainError("nu parameterizes linear profiles; use nu0 for nonlinear ones");
        }
        return {std::sqrt(nu * std::abs(profile.chirp())), phi0};
    }

    /// Normalized pump intensity nu0 = |gamma|^2 L / |K(0) - K(L)|.
    static PumpCoupling from_nu0(double nu0, const PolingProfile& profile, double phi0 = 0.0) {
        if (nu0 < 0.0) throw DomainError("nu0 must be non-negative");
        const double span = std::abs(profile.start_value() - profile.end_value());
        return {std::sqrt(nu0 * span / profile.length()), phi0};
    }

    double nu0(const PolingProfile& profile) const {
        return gamma * gamma * profile.length() / std::abs(profile.start_value() - profile.end_value());
    }
};

/// z_pm with K(z_pm) = Delta(Omega).
inline double phase_match_point(double x, const PolingProfile& profile, const DispersionModel& dispersion) {
    return profile.locate(dispersion.phase_mismatch(x));
}

/// Local Rosenbluth parameter nu(Omega) = |gamma^2 / K'(z_pm)|.
inline double local_nu(double x, const PolingProfile& profile, const DispersionModel& dispersion,
                       const PumpCoupling& coupling) {
    const double zpm = phase_match_point(x, profile, dispersion);
    const double s = profile.slope(zpm);
    if (s == 0.0) throw SingularProfileError("K'(z_pm) = 0 at detuning " + std::to_string(x));
    return coupling.gamma * coupling.gamma / std::abs(s);
}

struct TurningPoints {
    double z1;  // K(z1) = Delta + 2|gamma|
    double z2;  // K(z2) = Delta - 2|gamma|
    bool z1_truncated = false;
    bool z2_truncated = false;
    bool truncated() const noexcept { return z1_truncated || z2_truncated; }
};

/// Borders of the amplification layer, clamped to [0, L] with truncation flags.
inline TurningPoints turning_points(double x, const PolingProfile& profile, const DispersionModel& dispersion,
                                    const PumpCoupling& coupling) {
    const double delta = dispersion.phase_mismatch(x);
    profile.locate(delta);  // in-band check
    auto clamped = [&](double target, bool& truncated) {
        if (target > profile.max_value()) {
            truncated = true;
            return profile.decreasing() ? 0.0 : profile.length();
        }
        if (target < profile.min_value()) {
            truncated = true;
            return profile.decreasing() ? profile.length() : 0.0;
        }
        return profile.locate(target);
    };
    TurningPoints tp{};
    tp.z1 = clamped(delta + 2.0 * coupling.gamma, tp.z1_truncated);
    tp.z2 = clamped(delta - 2.0 * coupling.gamma, tp.z2_truncated);
    return tp;
}

struct ValidityMetrics {
    std::vector<std::optional<double>> epsilon;        // per grid point, empty out of band
    std::vector<std::optional<double>> epsilon_prime;  // per grid point, empty out of band
    double max_epsilon = 0.0;
    double max_epsilon_prime = 0.0;
    double max_period_slope = 0.0;  // max_z |Lambda'(z)|
};

/// Slow-variation diagnostics of the first-order layer approximation.
inline ValidityMetrics validity_metrics(const PolingProfile& profile, const DispersionModel& dispersion,
                                        const PumpCoupling& coupling, const FrequencyGrid& grid) {
    ValidityMetrics m;
    m.epsilon.resize(grid.size());
    m.epsilon_prime.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double zpm = 0.0;
        try {
            zpm = phase_match_point(grid[i], profile, dispersion);
        } catch (const OutOfBandError&) {
            continue;
        }
        const double k1 = profile.slope(zpm);
        if (k1 == 0.0) throw SingularProfileError("K'(z_pm) = 0 at detuning " + std::to_string(grid[i]));
        const double k2 = profile.curvature(zpm);
        const auto tp = turning_points(grid[i], profile, dispersion, coupling);
        const double far = std::max(std::abs(tp.z1 - zpm), std::abs(tp.z2 - zpm));
        const double eps = 0.5 * std::abs(k2 * far) / std::abs(k1);
        const double eps_prime = std::abs(coupling.gamma * k2) / (k1 * k1);
        m.epsilon[i] = eps;
        m.epsilon_prime[i] = eps_prime;
        m.max_epsilon = std::max(m.max_epsilon, eps);
        m.max_epsilon_prime = std::max(m.max_epsilon_prime, eps_prime);
    }
    constexpr int samples = 10000;
    for (int j = 0; j <= samples; ++j) {
        const double z = profile.length() * j / samples;
        m.max_period_slope = std::max(m.max_period_slope, std::abs(profile.period_slope(z)));
    }
    return m;
}

/// Profile realizing the first-order delay law tau(Omega) = a Omega + b.
struct DelayDesign {
    PolingProfile profile;
    double a;        // s^2 (s per rad/s)
    double b;        // s
    double d;        // mm
    double x_entry;  // Omega_pm(0) / omega0
    double x_exit;   // Omega_pm(L) / omega0
};

inline DelayDesign design_linear_delay_profile(double a, double b, double length_mm,
                                               const DispersionModel& dispersion) {
    if (dispersion.mode() != DispersionModel::Mode::quadratic) {
        throw DesignInfeasibleError("delay-law design requires the quadratic dispersion mode");
    }
    if (a == 0.0) throw DesignInfeasibleError("a = 0 gives no finite profile (d = 0)");
    const double omega0 = dispersion.omega0();
    const double d = a * omega0 * omega0 / (2.0 * dispersion.alpha());
    if (d >= -length_mm && d <= 0.0) {
        throw DesignInfeasibleError("L + d - z vanishes inside the crystal: need d > 0 or d < -L");
    }
    const double x_exit = -(b / a) / omega0;
    const double x_entry = x_exit * d / (length_mm + d);
    if (!(x_exit > 0.0)) {
        throw DesignInfeasibleError("Omega_pm(L) = -b/a must be positive");
    }
    if (!(x_entry > 0.0)) {
        throw DesignInfeasibleError("Omega_pm(0) = -(b/a) d/(L+d) must be positive");
    }
    if (!(x_entry < 1.0 && x_exit < 1.0)) {
        throw DesignInfeasibleError("phase-matched detunings must stay below omega0");
    }
    const double k_min = dispersion.phase_mismatch(std::max(x_entry, x_exit));
    if (!(k_min > 0.0)) throw DesignInfeasibleError("profile spatial frequency must stay positive");
    auto profile = PolingProfile::quadratic_hyperbolic(length_mm, dispersion.alpha(), dispersion.beta(), d,
                                                       b / a, omega0);
    return {std::move(profile), a, b, d, x_entry, x_exit};
}

/// Same design specified by the phase-matched detunings at the crystal faces.
inline DelayDesign design_from_band_edges(double x_entry, double x_exit, double length_mm,
                                          const DispersionModel& dispersion) {
    if (!(x_entry > 0.0 && x_exit > 0.0)) {
        throw DesignInfeasibleError("band edges must be positive detunings");
    }
    if (x_entry == x_exit) throw DesignInfeasibleError("band edges must differ");
    if (dispersion.mode() != DispersionModel::Mode::quadratic) {
        throw DesignInfeasibleError("delay-law design requires the quadratic dispersion mode");
    }
    const double omega0 = dispersion.omega0();
    const double d = x_entry * length_mm / (x_exit - x_entry);
    const double a = 2.0 * dispersion.alpha() * d / (omega0 * omega0);
    const double b = -x_exit * omega0 * a;
    return design_linear_delay_profile(a, b, length_mm, dispersion);
}

}  // namespace chirpsq
