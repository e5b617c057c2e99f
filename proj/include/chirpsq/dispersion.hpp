#pragma once

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "units.hpp"

namespace chirpsq {

// Temperature-dependent extraordinary index of 5% MgO-doped congruent LiNbO3,
// O. Gayer, Z. Sacks, E. Galun, A. Arie, Appl. Phys. B 91, 343 (2008).
// n_e^2 = a1 + b1 f + (a2 + b2 f)/(l^2 - (a3 + b3 f)^2) + (a4 + b4 f)/(l^2 - a5^2) - a6 l^2,
// f = (T - 24.5)(T + 570.82), l in micrometres, T in Celsius.
namespace sellmeier_mgo_cln {

inline constexpr double a1 = 5.756;
inline constexpr double a2 = 0.0983;
inline constexpr double a3 = 0.2020;
inline constexpr double a4 = 189.32;
inline constexpr double a5 = 12.52;
inline constexpr double a6 = 1.32e-2;
inline constexpr double b1 = 2.860e-6;
inline constexpr double b2 = 4.700e-8;
inline constexpr double b3 = 6.113e-8;
inline constexpr double b4 = 1.516e-4;

inline constexpr double reference_temperature_c = 24.5;
inline constexpr double min_wavelength_nm = 500.0;
inline constexpr double max_wavelength_nm = 4000.0;

struct IndexSample {
    double n;              // refractive index
    double dn_dlambda_um;  // dn/dlambda, 1/um
};

inline IndexSample evaluate(double wavelength_nm, double temperature_c) {
    if (!(wavelength_nm >= min_wavelength_nm && wavelength_nm <= max_wavelength_nm)) {
        std::ostringstream os;
        os << "wavelength " << wavelength_nm << " nm outside the Sellmeier validity window ["
           << min_wavelength_nm << ", " << max_wavelength_nm << "] nm";
        throw DomainError(os.str());
    }
    const double l = wavelength_nm * 1e-3;
    const double l2 = l * l;
    const double f = (temperature_c - 24.5) * (temperature_c + 570.82);
    const double pole1 = a3 + b3 * f;
    const double d1 = l2 - pole1 * pole1;
    const double d2 = l2 - a5 * a5;
    const double num1 = a2 + b2 * f;
    const double num2 = a4 + b4 * f;
    const double n2 = a1 + b1 * f + num1 / d1 + num2 / d2 - a6 * l2;
    const double dn2 = -2.0 * l * num1 / (d1 * d1) - 2.0 * l * num2 / (d2 * d2) - 2.0 * a6 * l;
    const double n = std::sqrt(n2);
    return {n, dn2 / (2.0 * n)};
}

}  // namespace sellmeier_mgo_cln

/// Extraordinary refractive index of 5% MgO:CLN.
inline double refractive_index(double wavelength_nm,
                               double temperature_c = sellmeier_mgo_cln::reference_temperature_c) {
    return sellmeier_mgo_cln::evaluate(wavelength_nm, temperature_c).n;
}

struct QuadraticFit {
    double alpha;  // rad/mm
    double beta;   // rad/mm
};

/// Material dispersion of the down-converted band around omega0 = omega_p / 2.
///
/// All detuning arguments are normalized, x = Omega / omega0, |x| < 1.
/// In quadratic mode the phase mismatch is Delta_q = -alpha x^2 + beta exactly;
/// the odd (group-delay) part of k is still taken from the Sellmeier law so that
/// U/V phases, kappa and group delays remain defined.
class DispersionModel {
public:
    enum class Mode { sellmeier, quadratic };

    static DispersionModel sellmeier(double pump_wavelength_nm = 532.0,
                                     double temperature_c = sellmeier_mgo_cln::reference_temperature_c) {
        return DispersionModel(Mode::sellmeier, pump_wavelength_nm, temperature_c, 0.0, 0.0);
    }

    static DispersionModel quadratic(double alpha = 735.0, double beta = 901.0,
                                     double pump_wavelength_nm = 532.0,
                                     double temperature_c = sellmeier_mgo_cln::reference_temperature_c) {
        if (!(alpha > 0.0) || !(beta > 0.0)) {
            throw DomainError("quadratic dispersion needs alpha > 0 and beta > 0");
        }
        return DispersionModel(Mode::quadratic, pump_wavelength_nm, temperature_c, alpha, beta);
    }

    Mode mode() const noexcept { return mode_; }
    double pump_wavelength_nm() const noexcept { return pump_nm_; }
    double temperature_c() const noexcept { return temperature_c_; }
    double omega0() const noexcept { return omega0_; }
    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }

    /// k_p, rad/mm.
    double pump_wavevector() const noexcept { return k_pump_; }

    /// k(Omega) at omega0 + Omega, rad/mm.
    double wavevector(double x) const {
        check_detuning(x);
        if (mode_ == Mode::sellmeier) return sellmeier_k(x);
        return 0.5 * (sellmeier_k(x) - sellmeier_k(-x)) + 0.5 * (k_pump_ - quadratic_mismatch(x));
    }

    /// k(0), rad/mm.
    double central_wavevector() const { return wavevector(0.0); }

    /// dk/dOmega at omega0 + Omega, s/mm (inverse group velocity).
    double inverse_group_velocity(double x) const {
        check_detuning(x);
        if (mode_ == Mode::sellmeier) return sellmeier_k1(x);
        return 0.5 * (sellmeier_k1(x) + sellmeier_k1(-x)) + alpha_ * x / omega0_;
    }

    /// Delta(Omega) = k_p - k(Omega) - k(-Omega), rad/mm.
    double phase_mismatch(double x) const {
        check_detuning(x);
        if (mode_ == Mode::quadratic) return quadratic_mismatch(x);
        return k_pump_ - sellmeier_k(x) - sellmeier_k(-x);
    }

    /// dDelta/dOmega, (rad/mm) per (rad/s).
    double phase_mismatch_slope(double x) const {
        check_detuning(x);
        if (mode_ == Mode::quadratic) return -2.0 * alpha_ * x / omega0_;
        return -sellmeier_k1(x) + sellmeier_k1(-x);
    }

    /// kappa(Omega) = (k(Omega) - k(-Omega)) L / 2, rad.
    double kappa_angle(double x, double length_mm) const {
        check_detuning(x);
        return 0.5 * (sellmeier_k(x) - sellmeier_k(-x)) * length_mm;
    }

    /// tau_g = k'(0) L, s.
    double group_delay(double length_mm) const { return inverse_group_velocity(0.0) * length_mm; }

    /// beta = Delta(0), alpha = -Delta''(0) omega0^2 / 2 from central differences
    /// in x with one Richardson refinement.
    QuadraticFit quadratic_fit(double step = 1e-3) const {
        const double beta = phase_mismatch(0.0);
        auto second = [&](double h) {
            return (phase_mismatch(h) - 2.0 * beta + phase_mismatch(-h)) / (h * h);
        };
        const double coarse = second(step);
        const double fine = second(0.5 * step);
        const double d2 = (4.0 * fine - coarse) / 3.0;
        return {-0.5 * d2, beta};
    }

    /// Inverse of the quadratic law: positive x with Delta_q(x) = target.
    double quadratic_detuning_for(double mismatch) const {
        if (mode_ != Mode::quadratic) throw DomainError("closed-form inversion needs quadratic mode");
        const double s = (beta_ - mismatch) / alpha_;
        if (s < 0.0) throw DomainError("mismatch above beta has no real detuning");
        return std::sqrt(s);
    }

private:
    DispersionModel(Mode mode, double pump_nm, double temperature_c, double alpha, double beta)
        : mode_(mode), pump_nm_(pump_nm), temperature_c_(temperature_c), alpha_(alpha), beta_(beta) {
        if (!(pump_nm > 0.0)) throw DomainError("pump wavelength must be positive");
        const double omega_p = units::angular_frequency_from_nm(pump_nm);
        omega0_ = 0.5 * omega_p;
        k_pump_ = refractive_index(pump_nm, temperature_c) * omega_p / units::speed_of_light;
    }

    static void check_detuning(double x) {
        if (!(std::abs(x) < 1.0)) {
            throw DomainError("detuning |Omega/omega0| must be < 1, got " + std::to_string(x));
        }
    }

    double quadratic_mismatch(double x) const { return -alpha_ * x * x + beta_; }

    double sellmeier_k(double x) const {
        const double omega = omega0_ * (1.0 + x);
        return refractive_index(units::wavelength_nm_from_angular(omega), temperature_c_) * omega /
               units::speed_of_light;
    }

    // dk/domega = (n - lambda dn/dlambda) / c
    double sellmeier_k1(double x) const {
        const double omega = omega0_ * (1.0 + x);
        const double lambda_nm = units::wavelength_nm_from_angular(omega);
        const auto s = sellmeier_mgo_cln::evaluate(lambda_nm, temperature_c_);
        return (s.n - lambda_nm * 1e-3 * s.dn_dlambda_um) / units::speed_of_light;
    }

    Mode mode_;
    double pump_nm_;
    double temperature_c_;
    double alpha_;
    double beta_;
    double omega0_ = 0.0;
    double k_pump_ = 0.0;
};

/// Strictly increasing set of normalized detunings x_i = Omega_i / omega0.
class FrequencyGrid {
public:
    explicit FrequencyGrid(std::vector<double> x) : x_(std::move(x)) {
        if (x_.size() < 2) throw DomainError("frequency grid needs at least two points");
        for (std::size_t i = 0; i < x_.size(); ++i) {
            if (!(std::abs(x_[i]) < 1.0)) throw DomainError("grid detuning outside (-1, 1)");
            if (i > 0 && !(x_[i] > x_[i - 1])) throw DomainError("grid must be strictly increasing");
        }
        symmetric_ = true;
        for (std::size_t i = 0; i < x_.size(); ++i) {
            if (x_[i] != -x_[x_.size() - 1 - i]) {
                symmetric_ = false;
                break;
            }
        }
    }

    /// n uniform points on [-half_width, half_width]; exactly mirror-symmetric.
    static FrequencyGrid symmetric(double half_width, std::size_t n) {
        std::vector<double> x(n);
        const double m = static_cast<double>(n - 1);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = half_width * (2.0 * static_cast<double>(i) - m) / m;
        }
        return FrequencyGrid(std::move(x));
    }

    static FrequencyGrid uniform(double lo, double hi, std::size_t n) {
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        }
        return FrequencyGrid(std::move(x));
    }

    std::size_t size() const noexcept { return x_.size(); }
    double operator[](std::size_t i) const { return x_[i]; }
    const std::vector<double>& values() const noexcept { return x_; }
    bool is_symmetric() const noexcept { return symmetric_; }

    /// Index of -x_i; only meaningful on symmetric grids.
    std::size_t mirror(std::size_t i) const {
        if (!symmetric_) throw DomainError("mirror index requested on a non-symmetric grid");
        return x_.size() - 1 - i;
    }

    bool operator==(const FrequencyGrid& other) const { return x_ == other.x_; }

private:
    std::vector<double> x_;
    bool symmetric_ = false;
};

}  // namespace chirpsq
