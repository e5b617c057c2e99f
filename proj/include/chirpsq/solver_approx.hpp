#pragma once

#include <cmath>
#include <complex>
#include <string>

#include "bogoliubov.hpp"
#include "dispersion.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "poling.hpp"
#include "solver_exact.hpp"
#include "units.hpp"

namespace chirpsq {

/// Source of the phase phi1 added inside the amplification layer.
enum class LayerPhaseModel {
    quadratic_fit,  // -nu + nu^2/4
    exact_layer,    // arg B(x2, x1) of the linearized layer
};

struct ApproxOptions {
    LayerPhaseModel layer_phase = LayerPhaseModel::quadratic_fit;
};

/// Amplification-layer phase phi1(nu) for a decreasing profile.
inline double layer_phase(double nu, LayerPhaseModel model) {
    if (nu == 0.0) return 0.0;
    if (model == LayerPhaseModel::exact_layer) return layer_phase_exact(nu);
    return -nu + 0.25 * nu * nu;
}

struct LayerFamilyGain {
    double diagonal;      // cosh(pi nu) + mu sinh(pi nu)
    double off_diagonal;  // |mu~| sinh(pi nu)
    double mu_tilde;      // |mu~|
};

/// Layer transformation with diagonal cosh(pi nu) + mu sinh(pi nu); unitarity fixes |mu~|.
inline LayerFamilyGain layer_transform_family(double nu, complex mu) {
    if (!(nu > 0.0)) throw DomainError("layer family needs nu > 0");
    const double c = std::cosh(units::pi * nu);
    const double s = std::sinh(units::pi * nu);
    const complex diag = c + mu * s;
    const double excess = std::norm(diag) - 1.0;
    if (excess < -1e-14) {
        throw DomainError("|cosh(pi nu) + mu sinh(pi nu)| < 1 cannot be completed to a unitary layer");
    }
    const double off = std::sqrt(std::max(excess, 0.0));
    if (std::abs(diag.imag()) > 1e-14 * std::abs(diag)) {
        // report the modulus for complex mu
        return {std::abs(diag), off, off / s};
    }
    return {diag.real(), off, off / s};
}

/// Pre-layer phase phi = -(1/2) Int_0^{z_pm} (Delta - K) dz.
inline double pre_phase_at(double delta, double zpm, const PolingProfile& profile) {
    return -0.5 * (delta * zpm - profile.integral(zpm));
}

/// Post-layer phase theta = -(1/2) Int_{z_pm}^L (Delta - K) dz.
inline double post_phase_at(double delta, double zpm, const PolingProfile& profile) {
    const double length = profile.length();
    return -0.5 * (delta * (length - zpm) - (profile.integral(length) - profile.integral(zpm)));
}

inline double pre_phase(double x, const PolingProfile& profile, const DispersionModel& dispersion) {
    const double delta = dispersion.phase_mismatch(x);
    return pre_phase_at(delta, profile.locate(delta), profile);
}

inline double post_phase(double x, const PolingProfile& profile, const DispersionModel& dispersion) {
    const double delta = dispersion.phase_mismatch(x);
    return post_phase_at(delta, profile.locate(delta), profile);
}

/// Per-detuning layer bookkeeping of the first-order solution.
struct LayerDecomposition {
    double z_pm;
    TurningPoints turning;
    double nu;
    double pre_phase;   // phi
    double post_phase;  // theta
    double phi_a;       // phi0 + phi1
};

struct FirstOrderParams {
    double r;
    double psi_l;
    double psi_0;
};

struct RelativeDelay {
    double from_angle_fs;           // -2 dpsi_L / dOmega, central differences
    double from_group_velocity_fs;  // (L - z_pm)(k'(-Omega) - k'(Omega))
};

/// First-order (layer) approximation for slowly varying monotonic profiles.
class ApproxSolver {
public:
    ApproxSolver(PolingProfile profile, DispersionModel dispersion, PumpCoupling coupling, ApproxOptions options = {})
        : profile_(std::move(profile)), dispersion_(std::move(dispersion)), coupling_(coupling), options_(options) {}

    const PolingProfile& profile() const noexcept { return profile_; }
    const DispersionModel& dispersion() const noexcept { return dispersion_; }
    const PumpCoupling& coupling() const noexcept { return coupling_; }

    /// Throws OutOfBandError when Delta(Omega) is not phase matched inside the crystal.
    LayerDecomposition decompose(double x) const {
        const double delta = dispersion_.phase_mismatch(x);
        LayerDecomposition d{};
        d.z_pm = profile_.locate(delta);
        d.turning = turning_points(x, profile_, dispersion_, coupling_);
        d.nu = nu_at(d.z_pm, x);
        d.pre_phase = pre_phase_at(delta, d.z_pm, profile_);
        d.post_phase = post_phase_at(delta, d.z_pm, profile_);
        d.phi_a = coupling_.phi0 + oriented_layer_phase(d.nu);
        return d;
    }

    BogoliubovPoint at(double x) const {
        const double drift = (dispersion_.wavevector(x) - dispersion_.central_wavevector()) * profile_.length();
        BogoliubovPoint p;
        try {
            const LayerDecomposition d = decompose(x);
            const double gain = std::exp(units::pi * d.nu);
            const double conv = std::sqrt(std::expm1(2.0 * units::pi * d.nu));
            p.u = std::polar(gain, drift);
            p.v = d.nu == 0.0 ? complex{} : std::polar(conv, -2.0 * d.pre_phase + drift + d.phi_a);
            p.edge_truncated = d.turning.truncated();
        } catch (const OutOfBandError&) {
            p.u = std::polar(1.0, drift);
            p.v = 0.0;
            p.in_band = false;
        }
        const double phase = sideband_phase(x, profile_, dispersion_);
        p.a = p.u * std::polar(1.0, -phase);
        p.b = p.v * std::polar(1.0, -phase - coupling_.phi0);
        return p;
    }

    BogoliubovCoefficients solve(const FrequencyGrid& grid, unsigned threads = 0) const {
        BogoliubovCoefficients out{SolverTag::approx, grid, std::vector<BogoliubovPoint>(grid.size())};
        parallel_for(grid.size(), [&](std::size_t i) { out.points[i] = at(grid[i]); }, threads);
        return out;
    }

    /// r = ln(e^{pi nu} + sqrt(e^{2 pi nu} - 1)), psi_L = -phi - Delta L/2 + phi_A/2, psi_0 = -phi + phi_A/2.
    FirstOrderParams params(double x) const {
        const LayerDecomposition d = decompose(x);
        const double r = std::log(std::exp(units::pi * d.nu) + std::sqrt(std::expm1(2.0 * units::pi * d.nu)));
        const double delta = dispersion_.phase_mismatch(x);
        return {r, -d.pre_phase - 0.5 * delta * profile_.length() + 0.5 * d.phi_a, -d.pre_phase + 0.5 * d.phi_a};
    }

    RelativeDelay relative_delay(double x, double step = 1e-5) const {
        if (!(x > 0.0)) throw DomainError("relative delay is defined for positive detuning");
        const double omega0 = dispersion_.omega0();
        const double dpsi = (params(x + step).psi_l - params(x - step).psi_l) / (2.0 * step * omega0);
        const double zpm = phase_match_point(x, profile_, dispersion_);
        const double tau_g = (profile_.length() - zpm) *
                             (dispersion_.inverse_group_velocity(-x) - dispersion_.inverse_group_velocity(x));
        return {-2.0 * dpsi * units::femtoseconds_per_second, tau_g * units::femtoseconds_per_second};
    }

    /// phi0 such that the closed-form psi_L vanishes at x_ref; z_pm is clamped to the
    /// crystal when x_ref lies just outside the band.
    double reference_pump_phase(double x_ref = 0.5) const {
        const double delta = dispersion_.phase_mismatch(x_ref);
        const double zpm = clamped_phase_match(delta);
        const double nu = nu_at(zpm, x_ref);
        const double phi = pre_phase_at(delta, zpm, profile_);
        const double phi0 = 2.0 * (phi + 0.5 * delta * profile_.length()) - oriented_layer_phase(nu);
        return std::remainder(phi0, units::two_pi);
    }

private:
    double clamped_phase_match(double delta) const {
        if (delta >= profile_.max_value()) return profile_.decreasing() ? 0.0 : profile_.length();
        if (delta <= profile_.min_value()) return profile_.decreasing() ? profile_.length() : 0.0;
        return profile_.locate(delta);
    }

    double nu_at(double zpm, double x) const {
        const double s = profile_.slope(zpm);
        if (s == 0.0) throw SingularProfileError("K'(z_pm) = 0 at detuning " + std::to_string(x));
        return coupling_.gamma * coupling_.gamma / std::abs(s);
    }

    // An increasing profile traverses the layer in the conjugate direction.
    double oriented_layer_phase(double nu) const {
        const double phi1 = layer_phase(nu, options_.layer_phase);
        return profile_.decreasing() ? phi1 : -phi1;
    }

    PolingProfile profile_;
    DispersionModel dispersion_;
    PumpCoupling coupling_;
    ApproxOptions options_;
};

inline BogoliubovPoint approx_UV(double x, const PolingProfile& profile, const DispersionModel& dispersion,
                                 const PumpCoupling& coupling, ApproxOptions options = {}) {
    return ApproxSolver(profile, dispersion, coupling, options).at(x);
}

inline FirstOrderParams first_order_params(double x, const PolingProfile& profile, const DispersionModel& dispersion,
                                           const PumpCoupling& coupling, ApproxOptions options = {}) {
    return ApproxSolver(profile, dispersion, coupling, options).params(x);
}

inline RelativeDelay relative_delay(double x, const PolingProfile& profile, const DispersionModel& dispersion,
                                    const PumpCoupling& coupling, ApproxOptions options = {}) {
    return ApproxSolver(profile, dispersion, coupling, options).relative_delay(x);
}

}  // namespace chirpsq
