#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string_view>
#include <vector>

#include "dispersion.hpp"
#include "poling.hpp"

namespace chirpsq {

using complex = std::complex<double>;

enum class SolverTag { exact, approx, ode };

inline std::string_view to_string(SolverTag tag) {
    switch (tag) {
    case SolverTag::exact: return "exact";
    case SolverTag::approx: return "approx";
    case SolverTag::ode: return "ode";
    }
    return "?";
}

/// Field-transformation coefficients at one detuning.
/// b~(L) = A b~(0) + B b~+(0) in the slowly varying frame; a(L) = U a(0) + V a+(-Omega, 0).
struct BogoliubovPoint {
    complex u;
    complex v;
    complex a;
    complex b;
    bool in_band = true;
    bool edge_truncated = false;

    double unitarity_residual() const { return std::norm(u) - std::norm(v) - 1.0; }
};

/// Transfer coefficients of the slowly varying pair: b~(L) = a b~(0) + b b~+(0),
/// b~+(L) = b_tilde b~(0) + a_tilde b~+(0).
struct LayerMatrix {
    complex a;
    complex b;
    complex a_tilde;
    complex b_tilde;
};

struct BogoliubovCoefficients {
    SolverTag solver;
    FrequencyGrid grid;
    std::vector<BogoliubovPoint> points;

    double max_unitarity_residual() const {
        double worst = 0.0;
        for (const auto& p : points) worst = std::max(worst, std::abs(p.unitarity_residual()));
        return worst;
    }
};

/// Common phase [k(Omega) - k0 + Delta(Omega)/2] L - (1/2) Int_0^L K dz relating (A, B) to (U, V).
inline double sideband_phase(double x, const PolingProfile& profile, const DispersionModel& dispersion) {
    const double length = profile.length();
    return (dispersion.wavevector(x) - dispersion.central_wavevector() + 0.5 * dispersion.phase_mismatch(x)) *
               length -
           0.5 * profile.integral(length);
}

/// U = A e^{iP}, V = B e^{iP + i phi0}.
inline BogoliubovPoint assemble_sideband(complex a, complex b, double x, const PolingProfile& profile,
                                         const DispersionModel& dispersion, const PumpCoupling& coupling) {
    const double phase = sideband_phase(x, profile, dispersion);
    BogoliubovPoint p;
    p.a = a;
    p.b = b;
    p.u = a * std::polar(1.0, phase);
    p.v = b * std::polar(1.0, phase + coupling.phi0);
    return p;
}

}  // namespace chirpsq
