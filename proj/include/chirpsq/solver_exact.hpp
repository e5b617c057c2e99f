#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "bogoliubov.hpp"
#include "complex_gamma.hpp"
#include "dispersion.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "poling.hpp"
#include "units.hpp"

namespace chirpsq {

/// Values of phi1(x) = D_{i nu}(x e^{i pi/4}), phi2(x) = D_{-1-i nu}(-x e^{-i pi/4}) and
/// their reciprocal functions phi~ = (1/sigma)(d/dx + i x/2) phi, sigma = sqrt(nu).
struct BasisPair {
    double nu = 0.0;
    double x = 0.0;
    std::array<complex, 2> phi{};
    std::array<complex, 2> dphi{};
    /// sigma * phi~_i = phi_i' + (i x / 2) phi_i; finite also at nu = 0.
    std::array<complex, 2> scaled_reciprocal{};
    /// phi~_i and their derivatives; NaN when nu = 0.
    std::array<complex, 2> reciprocal{};
    std::array<complex, 2> dreciprocal{};
    complex wronskian;           // phi1 phi2' - phi1' phi2, evaluated at x
    double wronskian_residual = 0.0;  // |W_num - W| / |W|
};

/// Parabolic-cylinder basis of b'' + (x^2/4 - nu + i/2) b = 0 for fixed nu.
///
/// Initial data at x = 0 come from the closed forms of D_p(0) and D_p'(0); the basis
/// is then continued by an adaptive Taylor-series method (the equation has polynomial
/// coefficients, so Taylor coefficients follow from a three-term recurrence). States
/// at every integer x are cached; each query continues from the nearest one. The
/// constant Wronskian W = e^{-i pi/4} e^{pi nu/2} certifies every returned value.
class ParabolicCylinderBasis {
public:
    explicit ParabolicCylinderBasis(double nu, double x_max = 40.0, double wronskian_tolerance = 1e-8)
        : nu_(nu), x_max_(x_max), tolerance_(wronskian_tolerance) {
        if (!(nu >= 0.0)) throw DomainError("basis order nu must be >= 0");
        if (!(x_max > 0.0)) throw DomainError("x_max must be positive");
        sigma_ = std::sqrt(nu);
        wronskian_ = std::polar(std::exp(0.5 * units::pi * nu), -0.25 * units::pi);
        shift_ = complex(-nu, 0.5);

        checkpoints_pos_.push_back(initial_state());
        checkpoints_neg_.push_back(checkpoints_pos_.front());
        const int count = static_cast<int>(std::ceil(x_max_));
        for (int k = 1; k <= count; ++k) {
            checkpoints_pos_.push_back(advance(checkpoints_pos_.back(), k - 1.0, static_cast<double>(k)));
            checkpoints_neg_.push_back(advance(checkpoints_neg_.back(), 1.0 - k, -static_cast<double>(k)));
        }
    }

    double nu() const noexcept { return nu_; }
    double x_max() const noexcept { return x_max_; }
    complex wronskian() const noexcept { return wronskian_; }

    /// D_p(0) = 2^{p/2} sqrt(pi) / Gamma((1-p)/2).
    static complex pcf_at_zero(complex p) {
        return std::exp(0.5 * p * std::log(2.0)) * std::sqrt(units::pi) * reciprocal_gamma(0.5 * (1.0 - p));
    }

    /// D_p'(0) = -2^{(p+1)/2} sqrt(pi) / Gamma(-p/2).
    static complex pcf_derivative_at_zero(complex p) {
        return -std::exp(0.5 * (p + 1.0) * std::log(2.0)) * std::sqrt(units::pi) * reciprocal_gamma(-0.5 * p);
    }

    BasisPair at(double x) const {
        if (!(std::abs(x) <= x_max_)) {
            throw DomainError("basis argument |x| = " + std::to_string(std::abs(x)) + " exceeds x_max = " +
                              std::to_string(x_max_));
        }
        const auto& cache = x >= 0.0 ? checkpoints_pos_ : checkpoints_neg_;
        const auto k = static_cast<std::size_t>(std::floor(std::abs(x)));
        const double from = x >= 0.0 ? static_cast<double>(k) : -static_cast<double>(k);
        const State s = advance(cache[k], from, x);

        BasisPair out;
        out.nu = nu_;
        out.x = x;
        out.phi = {s[0], s[2]};
        out.dphi = {s[1], s[3]};
        const complex half_ix(0.0, 0.5 * x);
        for (int i = 0; i < 2; ++i) {
            out.scaled_reciprocal[i] = out.dphi[i] + half_ix * out.phi[i];
            if (sigma_ > 0.0) {
                out.reciprocal[i] = out.scaled_reciprocal[i] / sigma_;
                out.dreciprocal[i] = sigma_ * out.phi[i] + half_ix * out.reciprocal[i];
            } else {
                const double nan = std::numeric_limits<double>::quiet_NaN();
                out.reciprocal[i] = out.dreciprocal[i] = complex(nan, nan);
            }
        }
        out.wronskian = out.phi[0] * out.dphi[1] - out.dphi[0] * out.phi[1];
        out.wronskian_residual = std::abs(out.wronskian - wronskian_) / std::abs(wronskian_);
        if (!(out.wronskian_residual < tolerance_)) {
            throw AccuracyLossError("parabolic-cylinder basis Wronskian drift at x = " + std::to_string(x),
                                    out.wronskian_residual);
        }
        return out;
    }

private:
    // phi1, phi1', phi2, phi2'
    using State = std::array<complex, 4>;

    State initial_state() const {
        const complex p1(0.0, nu_);
        const complex p2(-1.0, -nu_);
        const complex e_plus = std::polar(1.0, 0.25 * units::pi);
        const complex e_minus = std::polar(1.0, -0.25 * units::pi);
        return {pcf_at_zero(p1), e_plus * pcf_derivative_at_zero(p1), pcf_at_zero(p2),
                -e_minus * pcf_derivative_at_zero(p2)};
    }

    State advance(State s, double from, double to) const {
        double x = from;
        while (x != to) {
            double h = std::min(1.0, 4.0 / (std::abs(x) + 2.0));
            if (to < x) h = -h;
            if (std::abs(to - x) <= std::abs(h)) h = to - x;
            State next;
            while (!taylor_step(s, x, h, next)) h *= 0.5;
            s = next;
            x = (std::abs(to - (x + h)) < 1e-15) ? to : x + h;
        }
        return s;
    }

    // Taylor expansion about xc of b'' = -(q0 + q1 t + q2 t^2) b, t = x - xc.
    bool taylor_step(const State& s, double xc, double h, State& out) const {
        constexpr int max_order = 90;
        const complex q0 = 0.25 * xc * xc + shift_;
        const double q1 = 0.5 * xc;
        constexpr double q2 = 0.25;
        for (int f = 0; f < 2; ++f) {
            complex c_nm2 = 0.0;
            complex c_nm1 = 0.0;
            complex c_n = s[2 * f];
            complex c_np1 = s[2 * f + 1];
            complex value = c_n + c_np1 * h;
            complex deriv = c_np1;
            double hp = h;  // h^(n+1) for n = 0
            bool converged = false;
            double scale = std::abs(value) + std::abs(deriv) * std::abs(h);
            for (int n = 0; n < max_order; ++n) {
                // c_{n+2}
                const complex c_np2 = -(q0 * c_n + q1 * c_nm1 + q2 * c_nm2) / ((n + 2.0) * (n + 1.0));
                const double hp_next = hp * h;  // h^(n+2)
                const complex term = c_np2 * hp_next;
                value += term;
                deriv += (n + 2.0) * c_np2 * hp;
                scale = std::max(scale, std::abs(value));
                c_nm2 = c_nm1;
                c_nm1 = c_n;
                c_n = c_np1;
                c_np1 = c_np2;
                hp = hp_next;
                if (n > 8 && std::abs(term) < 1e-18 * scale &&
                    std::abs(c_n * hp / h) < 1e-18 * scale) {
                    converged = true;
                    break;
                }
            }
            if (!converged) return false;
            out[2 * f] = value;
            out[2 * f + 1] = deriv;
        }
        return true;
    }

    double nu_;
    double x_max_;
    double tolerance_;
    double sigma_ = 0.0;
    complex wronskian_;
    complex shift_;
    std::vector<State> checkpoints_pos_;
    std::vector<State> checkpoints_neg_;
};

/// Free-function form of ParabolicCylinderBasis::at.
inline BasisPair basis_at(double nu, double x, double x_max = 40.0) {
    return ParabolicCylinderBasis(nu, std::max(x_max, std::ceil(std::abs(x)))).at(x);
}

/// Propagator of b~' + (i x/2) b~ = sigma b~+, b~+' - (i x/2) b~+ = sigma b~ from x0 to x.
inline LayerMatrix exact_propagator(const ParabolicCylinderBasis& basis, double x, double x0) {
    const double nu = basis.nu();
    if (nu == 0.0) {
        const complex a = std::polar(1.0, -0.25 * (x * x - x0 * x0));
        return {a, 0.0, std::conj(a), 0.0};
    }
    const double sigma = std::sqrt(nu);
    const BasisPair p = basis.at(x);
    const BasisPair q = basis.at(x0);
    const complex inv_w = 1.0 / basis.wronskian();
    LayerMatrix m;
    m.a = inv_w * (p.phi[0] * q.scaled_reciprocal[1] - p.phi[1] * q.scaled_reciprocal[0]);
    m.b = -sigma * inv_w * (p.phi[0] * q.phi[1] - p.phi[1] * q.phi[0]);
    m.a_tilde = -inv_w * (p.scaled_reciprocal[0] * q.phi[1] - p.scaled_reciprocal[1] * q.phi[0]);
    m.b_tilde = inv_w / sigma *
                (p.scaled_reciprocal[0] * q.scaled_reciprocal[1] - p.scaled_reciprocal[1] * q.scaled_reciprocal[0]);
    return m;
}

struct ExactOptions {
    double x_max = 40.0;
    double wronskian_tolerance = 1e-8;
};

/// Closed-form transformation for the linear profile K(z) = K0 - zeta z.
class ExactSolver {
public:
    ExactSolver(PolingProfile profile, DispersionModel dispersion, PumpCoupling coupling, ExactOptions options = {})
        : profile_(std::move(profile)), dispersion_(std::move(dispersion)), coupling_(coupling), options_(options),
          basis_(check_linear(profile_, coupling_), options.x_max, options.wronskian_tolerance) {}

    double nu() const noexcept { return basis_.nu(); }

    /// (A, B) at detuning x = Omega / omega0.
    LayerMatrix propagator(double x) const {
        const double root = std::sqrt(profile_.chirp());
        const double x0 = (dispersion_.phase_mismatch(x) - profile_.k0()) / root;
        const double x_end = root * profile_.length() + x0;
        return exact_propagator(basis_, x_end, x0);
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
        BogoliubovCoefficients out{SolverTag::exact, grid, std::vector<BogoliubovPoint>(grid.size())};
        parallel_for(grid.size(), [&](std::size_t i) { out.points[i] = at(grid[i]); }, threads);
        return out;
    }

private:
    static double check_linear(const PolingProfile& profile, const PumpCoupling& coupling) {
        if (profile.kind() != PolingProfile::Kind::linear || !(profile.chirp() > 0.0)) {
            throw DomainError("the exact solver needs a linear profile K0 - zeta z with zeta > 0");
        }
        return coupling.gamma * coupling.gamma / profile.chirp();
    }

    PolingProfile profile_;
    DispersionModel dispersion_;
    PumpCoupling coupling_;
    ExactOptions options_;
    ParabolicCylinderBasis basis_;
};

inline LayerMatrix exact_AB(double x, const PolingProfile& profile, const DispersionModel& dispersion,
                            const PumpCoupling& coupling, ExactOptions options = {}) {
    return ExactSolver(profile, dispersion, coupling, options).propagator(x);
}

inline BogoliubovPoint exact_UV(double x, const PolingProfile& profile, const DispersionModel& dispersion,
                                const PumpCoupling& coupling, ExactOptions options = {}) {
    return ExactSolver(profile, dispersion, coupling, options).at(x);
}

/// Layer propagator across the amplification layer of a linearized profile,
/// turning point x1 = -2 sqrt(nu) to x2 = +2 sqrt(nu).
inline LayerMatrix layer_propagator(double nu) {
    if (!(nu > 0.0)) throw DomainError("layer gain needs nu > 0");
    const double edge = 2.0 * std::sqrt(nu);
    ParabolicCylinderBasis basis(nu, std::max(40.0, std::ceil(edge)));
    return exact_propagator(basis, edge, -edge);
}

/// Real amplitude gain A(x2, x1) across the amplification layer.
inline double layer_gain_exact(double nu) {
    const LayerMatrix m = layer_propagator(nu);
    const double rel_imag = std::abs(m.a.imag()) / std::abs(m.a);
    if (!(rel_imag < 1e-8)) throw AccuracyLossError("layer gain is not real", rel_imag);
    return m.a.real();
}

/// e^{-pi nu/2} (|D_{i nu}(2 sqrt(nu) e^{i pi/4})|^2 + nu |D_{i nu - 1}(-2 sqrt(nu) e^{i pi/4})|^2).
inline double layer_gain_closed_form(double nu) {
    if (!(nu > 0.0)) throw DomainError("layer gain needs nu > 0");
    const double edge = 2.0 * std::sqrt(nu);
    ParabolicCylinderBasis basis(nu, std::max(40.0, std::ceil(edge)));
    // phi~1 = sqrt(nu) e^{3 i pi/4} D_{i nu - 1}(x e^{i pi/4})
    return std::exp(-0.5 * units::pi * nu) * (std::norm(basis.at(edge).phi[0]) + std::norm(basis.at(-edge).reciprocal[0]));
}

/// arg B(x2, x1): phase added inside the amplification layer.
inline double layer_phase_exact(double nu) { return std::arg(layer_propagator(nu).b); }

}  // namespace chirpsq
