#pragma once

#include <numbers>

// Repo-wide units: lengths in mm, spatial frequencies in rad/mm, angular
// frequencies in rad/s, detunings stored normalized as x = Omega / omega0.
namespace chirpsq::units {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Speed of light in vacuum, mm/s.
inline constexpr double speed_of_light = 299792458.0e3;

inline constexpr double femtoseconds_per_second = 1e15;

/// Angular frequency (rad/s) of light with vacuum wavelength in nm.
constexpr double angular_frequency_from_nm(double wavelength_nm) {
    return two_pi * speed_of_light / (wavelength_nm * 1e-6);
}

/// Vacuum wavelength (nm) for an angular frequency in rad/s.
constexpr double wavelength_nm_from_angular(double omega) {
    return two_pi * speed_of_light / omega * 1e6;
}

}  // namespace chirpsq::units
