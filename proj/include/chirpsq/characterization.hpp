#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bogoliubov.hpp"
#include "dispersion.hpp"
#include "errors.hpp"
#include "poling.hpp"
#include "units.hpp"

namespace chirpsq {

struct Spectra {
    double s;   // optical spectrum |V|^2 / 2 pi
    double s1;  // antisqueezed quadrature variance ratio
    double s2;  // squeezed quadrature variance ratio
};

/// S2 is evaluated as ((|U|^2 - |V|^2) / (|U| + |V|))^2, the cancellation-free
/// form of (|U| - |V|)^2.
inline Spectra spectra(complex u, complex v) {
    const double au = std::abs(u);
    const double av = std::abs(v);
    const double sum = au + av;
    const double diff = (std::norm(u) - std::norm(v)) / sum;
    return {std::norm(v) / units::two_pi, sum * sum, diff * diff};
}

inline double to_db(double ratio) { return 10.0 * std::log10(ratio); }

/// Principal value of an angle in (-pi/2, pi/2].
inline double wrap_half(double a) {
    double w = std::remainder(a, units::pi);
    if (w <= -0.5 * units::pi) w += units::pi;
    return w;
}

/// Branch of `a` (mod period) nearest to `reference`.
inline double nearest_branch(double a, double reference, double period) {
    return a + period * std::round((reference - a) / period);
}

struct CharacteristicAngles {
    double r;
    std::optional<double> psi_l;  // empty: no squeezing at this pair
    std::optional<double> psi_0;
    double kappa;
};

/// r = ln(|U|+|V|), psi_L = arg(U(W) V(-W))/2, psi_0 = arg(V(W)/U(W))/2,
/// kappa = arg(U(W)/U(-W))/2; principal branches in (-pi/2, pi/2].
inline CharacteristicAngles characteristic_params(complex u, complex v, complex u_mirror, complex v_mirror) {
    CharacteristicAngles c{std::log(std::abs(u) + std::abs(v)), std::nullopt, std::nullopt,
                           wrap_half(0.5 * std::arg(u / u_mirror))};
    if (v != 0.0 && v_mirror != 0.0) {
        c.psi_l = wrap_half(0.5 * std::arg(u * v_mirror));
        c.psi_0 = wrap_half(0.5 * std::arg(v / u));
    }
    return c;
}

/// Detuning band |x| in [lo, hi].
struct Band {
    double lo;
    double hi;

    bool contains(double x) const { return std::abs(x) >= lo && std::abs(x) <= hi; }

    /// Band narrowed by `fraction` of its width at each edge.
    Band shrunk(double fraction) const {
        const double w = hi - lo;
        return {lo + fraction * w, hi - fraction * w};
    }
};

/// Positive detunings whose mismatch is matched somewhere in the crystal.
inline Band qpm_band(const PolingProfile& profile, const DispersionModel& dispersion, double x_cap = 0.99) {
    auto in_band = [&](double x) {
        const double delta = dispersion.phase_mismatch(x);
        return delta >= profile.min_value() && delta <= profile.max_value();
    };
    constexpr int samples = 4000;
    double first = -1.0, last = -1.0;
    for (int i = 0; i <= samples; ++i) {
        const double x = x_cap * i / samples;
        bool ok = false;
        try {
            ok = in_band(x);
        } catch (const DomainError&) {
            break;
        }
        if (ok) {
            if (first < 0.0) first = x;
            last = x;
        }
    }
    if (first < 0.0) throw OutOfBandError("no detuning is phase matched by this profile");
    const double step = x_cap / samples;
    auto edge = [&](double inside, double outside) {
        for (int k = 0; k < 60; ++k) {
            const double mid = 0.5 * (inside + outside);
            bool ok = false;
            try {
                ok = in_band(mid);
            } catch (const DomainError&) {
            }
            (ok ? inside : outside) = mid;
        }
        return inside;
    };
    const double lo = first > 0.0 ? edge(first, first - step) : 0.0;
    const double hi = last + step <= x_cap ? edge(last, last + step) : last;
    return {lo, hi};
}

struct SqueezingPoint {
    double x;
    double s;
    double s1;
    double s2;
    double s2_db;
    double r;
    std::optional<double> psi_l;  // unwrapped
    std::optional<double> psi_0;  // unwrapped
    double kappa;                 // principal branch; NaN on asymmetric grids
    std::optional<double> tau_fs;
    bool in_band;
};

struct SqueezingCharacterization {
    SolverTag solver;
    FrequencyGrid grid;
    std::vector<SqueezingPoint> points;
    bool angles_resolved = false;  // every unwrap step below pi/4
};

namespace detail {

// Nearest-branch continuation (period pi) outward from the grid centre.
// Returns false when some accepted step exceeds pi/4.
inline bool unwrap_from_centre(std::vector<std::optional<double>>& psi) {
    const std::size_t n = psi.size();
    bool resolved = true;
    auto walk = [&](std::size_t start, int dir) {
        std::optional<double> prev;
        for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(start); i >= 0 && i < static_cast<std::ptrdiff_t>(n);
             i += dir) {
            auto& v = psi[static_cast<std::size_t>(i)];
            if (!v) continue;
            if (prev) {
                *v = nearest_branch(*v, *prev, units::pi);
                if (std::abs(*v - *prev) > 0.25 * units::pi) resolved = false;
            }
            prev = *v;
        }
    };
    walk(n / 2, +1);
    walk(n % 2 == 1 ? n / 2 : n / 2 - 1, -1);
    return resolved;
}

}  // namespace detail

/// tau = -2 dpsi_L/dOmega by central differences (one-sided at the ends), fs.
inline std::vector<double> delay_from_angle(const std::vector<double>& x, const std::vector<double>& psi_l,
                                            double omega0) {
    if (x.size() != psi_l.size() || x.size() < 2) throw DomainError("delay needs matching arrays of >= 2 points");
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (std::abs(psi_l[i] - psi_l[i - 1]) > 0.5 * units::pi) {
            throw UnwrapError("psi_L jumps by more than pi/2 between x = " + std::to_string(x[i - 1]) + " and " +
                              std::to_string(x[i]));
        }
    }
    std::vector<double> tau(x.size());
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a = i == 0 ? 0 : i - 1;
        const std::size_t b = i + 1 == n ? n - 1 : i + 1;
        const double slope = (psi_l[b] - psi_l[a]) / ((x[b] - x[a]) * omega0);
        tau[i] = -2.0 * slope * units::femtoseconds_per_second;
    }
    return tau;
}

/// Observables on the coefficient grid. Angles and kappa need a symmetric grid;
/// the band only sets the in_band flag.
inline SqueezingCharacterization characterize(const BogoliubovCoefficients& c, double omega0,
                                              std::optional<Band> band = std::nullopt) {
    const FrequencyGrid& grid = c.grid;
    const std::size_t n = grid.size();
    SqueezingCharacterization out{c.solver, grid, std::vector<SqueezingPoint>(n), false};
    std::vector<std::optional<double>> psi_l(n), psi_0(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = c.points[i];
        const Spectra s = spectra(p.u, p.v);
        SqueezingPoint& q = out.points[i];
        q.x = grid[i];
        q.s = s.s;
        q.s1 = s.s1;
        q.s2 = s.s2;
        q.s2_db = to_db(s.s2);
        q.r = std::log(std::abs(p.u) + std::abs(p.v));
        q.kappa = std::numeric_limits<double>::quiet_NaN();
        q.in_band = band ? band->contains(grid[i]) : p.in_band;
        if (grid.is_symmetric()) {
            const auto& m = c.points[grid.mirror(i)];
            const CharacteristicAngles a = characteristic_params(p.u, p.v, m.u, m.v);
            q.kappa = a.kappa;
            psi_l[i] = a.psi_l;
            psi_0[i] = a.psi_0;
        }
    }
    if (!grid.is_symmetric()) return out;
    const bool resolved_l = detail::unwrap_from_centre(psi_l);
    const bool resolved_0 = detail::unwrap_from_centre(psi_0);
    out.angles_resolved = resolved_l && resolved_0;
    for (std::size_t i = 0; i < n; ++i) {
        out.points[i].psi_l = psi_l[i];
        out.points[i].psi_0 = psi_0[i];
    }
    if (resolved_l) {
        // differentiate each contiguous run of defined psi_L
        std::size_t i = 0;
        while (i < n) {
            if (!psi_l[i]) {
                ++i;
                continue;
            }
            std::size_t j = i;
            std::vector<double> xs, ps;
            while (j < n && psi_l[j]) {
                xs.push_back(grid[j]);
                ps.push_back(*psi_l[j]);
                ++j;
            }
            if (xs.size() >= 2) {
                const auto tau = delay_from_angle(xs, ps, omega0);
                for (std::size_t k = 0; k < tau.size(); ++k) out.points[i + k].tau_fs = tau[k];
            }
            i = j;
        }
    }
    return out;
}

/// Value of a partially defined curve at x_ref: linear interpolation inside the
/// defined range, nearest defined value outside it.
inline double angle_offset(const std::vector<double>& x, const std::vector<std::optional<double>>& psi, double x_ref) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!psi[i]) continue;
        if (i + 1 < x.size() && psi[i + 1] && x[i] <= x_ref && x_ref <= x[i + 1]) {
            const double t = (x_ref - x[i]) / (x[i + 1] - x[i]);
            return *psi[i] + t * (*psi[i + 1] - *psi[i]);
        }
        if (!best || std::abs(x[i] - x_ref) < std::abs(x[*best] - x_ref)) best = i;
    }
    if (!best) throw DomainError("angle curve has no defined points");
    return *psi[*best];
}

/// Boxcar average whose width is the local ripple period, estimated from the
/// zero crossings of y minus a running mean. Falls back to the running mean
/// when fewer than two crossings exist.
inline std::vector<double> ripple_average(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n != y.size()) throw DomainError("ripple_average needs matching arrays");
    if (n < 3) return y;
    const std::size_t half = std::max<std::size_t>(2, n / 40);
    std::vector<double> mean(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a = i > half ? i - half : 0;
        const std::size_t b = std::min(n - 1, i + half);
        double sum = 0.0;
        for (std::size_t k = a; k <= b; ++k) sum += y[k];
        mean[i] = sum / static_cast<double>(b - a + 1);
    }
    std::vector<double> crossings;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double r0 = y[i] - mean[i];
        const double r1 = y[i + 1] - mean[i + 1];
        if ((r0 < 0.0 && r1 >= 0.0) || (r0 >= 0.0 && r1 < 0.0)) {
            crossings.push_back(x[i] + (x[i + 1] - x[i]) * r0 / (r0 - r1));
        }
    }
    if (crossings.size() < 2) return mean;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        // consecutive crossings bracketing x_i (nearest pair at the ends)
        auto it = std::upper_bound(crossings.begin(), crossings.end(), x[i]);
        std::size_t j = static_cast<std::size_t>(it - crossings.begin());
        j = std::clamp<std::size_t>(j, 1, crossings.size() - 1);
        const double period = 2.0 * (crossings[j] - crossings[j - 1]);
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t k = 0; k < n; ++k) {
            if (std::abs(x[k] - x[i]) <= 0.5 * period) {
                sum += y[k];
                ++count;
            }
        }
        out[i] = sum / static_cast<double>(count);
    }
    return out;
}

struct ComparisonReport {
    std::string solver_a;
    std::string solver_b;
    Band band;
    std::size_t points = 0;
    double mean_rel_v2 = 0.0;               // mean |Va^2 - Vb^2| / Vb^2
    double max_rel_v2 = 0.0;
    double band_average_rel_v2 = 0.0;       // |<Va^2> - <Vb^2>| / <Vb^2>
    double ripple_averaged_rel_v2 = 0.0;    // band mean of |ra(Va^2) - ra(Vb^2)| / ra(Vb^2)
    double ripple_averaged_rel_s2 = 0.0;    // same for S2
    double band_average_rel_s2 = 0.0;       // |<S2a> - <S2b>| / <S2b>
    double max_abs_s2 = 0.0;
    std::optional<double> max_dpsi_l;       // after the best common constant offset
    std::optional<double> max_dpsi_0;
    double psi_offset = 0.0;                // that offset (psi_a - psi_b), rad
    bool deflection = false;                // band_average_rel_v2 above the threshold
};

namespace detail {

// Sub-ranges of consecutive grid indices accepted by `keep`.
template <typename Keep>
std::vector<std::vector<std::size_t>> band_runs(const FrequencyGrid& grid, Keep&& keep) {
    std::vector<std::vector<std::size_t>> runs;
    std::vector<std::size_t> cur;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (keep(i)) {
            cur.push_back(i);
        } else if (!cur.empty()) {
            runs.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) runs.push_back(std::move(cur));
    return runs;
}

}  // namespace detail

struct CompareOptions {
    double deflection_threshold = 0.05;
    // drop detunings whose amplification layer is cut by a crystal face in either solution
    bool exclude_truncated = false;
};

/// Band-restricted agreement metrics between two solutions on the same grid.
/// Angle gaps are the continued differences psi_a - psi_b, minus the single
/// constant (a free pump phase) that minimizes the worst gap of both angles.
inline ComparisonReport compare(const BogoliubovCoefficients& a, const BogoliubovCoefficients& b, const Band& band,
                                CompareOptions options = {}) {
    if (!(a.grid == b.grid)) throw DomainError("cannot compare solutions on different frequency grids");
    const FrequencyGrid& grid = a.grid;
    ComparisonReport rep;
    rep.solver_a = std::string(to_string(a.solver));
    rep.solver_b = std::string(to_string(b.solver));
    rep.band = band;
    auto keep = [&](std::size_t i) {
        if (!band.contains(grid[i])) return false;
        if (!options.exclude_truncated) return true;
        const auto truncated = [&](std::size_t k) {
            return a.points[k].edge_truncated || b.points[k].edge_truncated;
        };
        return !truncated(i) && !(grid.is_symmetric() && truncated(grid.mirror(i)));
    };
    const auto runs = detail::band_runs(grid, keep);
    double sum_a = 0.0, sum_b = 0.0, sum_sa = 0.0, sum_sb = 0.0, sum_rel = 0.0, sum_rip_v = 0.0, sum_rip_s = 0.0;
    for (const auto& run : runs) {
        std::vector<double> xs, va, vb, sa, sb;
        for (std::size_t i : run) {
            xs.push_back(grid[i]);
            va.push_back(std::norm(a.points[i].v));
            vb.push_back(std::norm(b.points[i].v));
            sa.push_back(spectra(a.points[i].u, a.points[i].v).s2);
            sb.push_back(spectra(b.points[i].u, b.points[i].v).s2);
        }
        const auto rva = ripple_average(xs, va), rvb = ripple_average(xs, vb);
        const auto rsa = ripple_average(xs, sa), rsb = ripple_average(xs, sb);
        for (std::size_t k = 0; k < xs.size(); ++k) {
            const double rel = vb[k] > 0.0 ? std::abs(va[k] - vb[k]) / vb[k] : (va[k] > 0.0 ? 1.0 : 0.0);
            sum_rel += rel;
            rep.max_rel_v2 = std::max(rep.max_rel_v2, rel);
            sum_a += va[k];
            sum_b += vb[k];
            sum_sa += sa[k];
            sum_sb += sb[k];
            sum_rip_v += rvb[k] > 0.0 ? std::abs(rva[k] - rvb[k]) / rvb[k] : 0.0;
            sum_rip_s += std::abs(rsa[k] - rsb[k]) / rsb[k];
            rep.max_abs_s2 = std::max(rep.max_abs_s2, std::abs(sa[k] - sb[k]));
        }
        rep.points += xs.size();
    }
    if (rep.points == 0) throw DomainError("comparison band contains no grid points");
    const double count = static_cast<double>(rep.points);
    rep.mean_rel_v2 = sum_rel / count;
    rep.band_average_rel_v2 = sum_b > 0.0 ? std::abs(sum_a - sum_b) / sum_b : (sum_a > 0.0 ? 1.0 : 0.0);
    rep.ripple_averaged_rel_v2 = sum_rip_v / count;
    rep.ripple_averaged_rel_s2 = sum_rip_s / count;
    rep.band_average_rel_s2 = std::abs(sum_sa - sum_sb) / sum_sb;
    rep.deflection = rep.band_average_rel_v2 > options.deflection_threshold;

    if (!grid.is_symmetric()) return rep;
    std::vector<double> dl, d0;
    std::optional<double> prev_l, prev_0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!keep(i)) continue;
        const std::size_t m = grid.mirror(i);
        const auto& pa = a.points[i];
        const auto& pb = b.points[i];
        const complex la = pa.u * a.points[m].v, lb = pb.u * b.points[m].v;
        const complex qa = pa.v / pa.u, qb = pb.v / pb.u;
        if (la == 0.0 || lb == 0.0 || qa == 0.0 || qb == 0.0) continue;
        double gl = 0.5 * std::arg(la / lb);
        double g0 = 0.5 * std::arg(qa / qb);
        gl = prev_l ? nearest_branch(gl, *prev_l, units::pi) : gl;
        g0 = nearest_branch(g0, prev_0 ? *prev_0 : gl, units::pi);
        prev_l = gl;
        prev_0 = g0;
        dl.push_back(gl);
        d0.push_back(g0);
    }
    if (dl.empty()) return rep;
    const auto [lmin, lmax] = std::minmax_element(dl.begin(), dl.end());
    const auto [omin, omax] = std::minmax_element(d0.begin(), d0.end());
    // each angle is only defined mod pi: pick the branch of psi_0 that lets one
    // offset fit both curves best
    const double guess = std::round((*lmin + *lmax - *omin - *omax) / (2.0 * units::pi));
    double best_span = std::numeric_limits<double>::infinity(), shift = 0.0;
    for (double k = guess - 2.0; k <= guess + 2.0; k += 1.0) {
        const double lo = std::min(*lmin, *omin + k * units::pi), hi = std::max(*lmax, *omax + k * units::pi);
        if (hi - lo < best_span) {
            best_span = hi - lo;
            shift = k * units::pi;
            rep.psi_offset = 0.5 * (lo + hi);
        }
    }
    for (double& v : d0) v += shift;
    double worst_l = 0.0, worst_0 = 0.0;
    for (double v : dl) worst_l = std::max(worst_l, std::abs(v - rep.psi_offset));
    for (double v : d0) worst_0 = std::max(worst_0, std::abs(v - rep.psi_offset));
    rep.max_dpsi_l = worst_l;
    rep.max_dpsi_0 = worst_0;
    return rep;
}

}  // namespace chirpsq
