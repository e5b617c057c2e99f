#pragma once

#include <array>
#include <cmath>
#include <complex>

#include "units.hpp"

namespace chirpsq {

namespace detail {

// B_{2k} / (2k (2k-1)), k = 1..8
inline constexpr std::array<double, 8> stirling_coefficients = {
    1.0 / 12.0,     -1.0 / 360.0,     1.0 / 1260.0, -1.0 / 1680.0,
    1.0 / 1188.0,   -691.0 / 360360.0, 1.0 / 156.0,  -3617.0 / 122400.0};

inline std::complex<double> log_gamma_stirling(std::complex<double> z) {
    const std::complex<double> inv = 1.0 / z;
    const std::complex<double> inv2 = inv * inv;
    std::complex<double> series = 0.0;
    std::complex<double> power = inv;
    for (double c : stirling_coefficients) {
        series += c * power;
        power *= inv2;
    }
    return (z - 0.5) * std::log(z) - z + 0.5 * std::log(units::two_pi) + series;
}

}  // namespace detail

/// Complex log-gamma, defined up to multiples of 2*pi*i in the imaginary part
/// (only exp(log_gamma) is branch-free). Relative accuracy ~1e-14 away from poles.
inline std::complex<double> log_gamma(std::complex<double> z) {
    if (z.real() < 0.5) {
        // reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
        return std::log(units::pi) - std::log(std::sin(units::pi * z)) - log_gamma(1.0 - z);
    }
    constexpr double shift_to = 15.0;
    std::complex<double> product = 1.0;
    std::complex<double> log_product = 0.0;
    while (z.real() < shift_to) {
        product *= z;
        if (std::abs(product) > 1e150) {
            log_product += std::log(product);
            product = 1.0;
        }
        z += 1.0;
    }
    return detail::log_gamma_stirling(z) - log_product - std::log(product);
}

/// 1/Gamma(z); entire, so exactly zero at the non-positive integers.
inline std::complex<double> reciprocal_gamma(std::complex<double> z) {
    if (z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::nearbyint(z.real())) {
        return 0.0;
    }
    return std::exp(-log_gamma(z));
}

inline std::complex<double> gamma(std::complex<double> z) { return std::exp(log_gamma(z)); }

}  // namespace chirpsq
