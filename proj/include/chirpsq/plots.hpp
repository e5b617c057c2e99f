#pragma once

#include <sstream>
#include <string>
#include <utility>
#include <vector>

// Standalone matplotlib scripts that sit next to the CSVs they read.
namespace chirpsq::plots {

namespace detail {

inline std::string py_list(const std::vector<std::string>& items) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < items.size(); ++i) os << (i ? ", " : "") << '"' << items[i] << '"';
    os << ']';
    return os.str();
}

inline const char* prelude() {
    return R"PY(import csv
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))


def load(name):
    with open(os.path.join(HERE, name), newline="") as f:
        rows = list(csv.DictReader(f))
    return {k: [float(r[k]) for r in rows] for k in rows[0]}


def save(fig, stem):
    out = os.path.join(HERE, stem + ".png")
    fig.savefig(out, dpi=150, bbox_inches="tight")
    print(out)

)PY";
}

}  // namespace detail

inline std::string spectrum_script(const std::vector<std::string>& csvs, const std::vector<std::string>& labels,
                                   std::pair<double, double> band) {
    std::ostringstream os;
    os << detail::prelude();
    os << "FILES = " << detail::py_list(csvs) << "\nLABELS = " << detail::py_list(labels) << "\n";
    os << "BAND = (" << band.first << ", " << band.second << ")\n";
    os << R"PY(
fig, (ax_s, ax_q) = plt.subplots(2, 1, figsize=(7, 7), sharex=True)
for name, label in zip(FILES, LABELS):
    d = load(name)
    ax_s.plot(d["omega_norm"], d["S"], lw=0.8, label=label)
    ax_q.plot(d["omega_norm"], d["S2_db"], lw=0.8, label=label)
for ax in (ax_s, ax_q):
    for s in (-1, 1):
        ax.axvspan(s * BAND[0], s * BAND[1], color="0.92", zorder=0)
ax_s.set_ylabel("S(Omega)")
ax_q.set_ylabel("S2 [dB]")
ax_q.set_xlabel("Omega / omega0")
ax_s.legend()
save(fig, os.path.splitext(os.path.basename(sys.argv[0]))[0])
)PY";
    return os.str();
}

inline std::string angles_script(const std::vector<std::string>& csvs, const std::vector<std::string>& labels,
                                 std::pair<double, double> band) {
    std::ostringstream os;
    os << detail::prelude();
    os << "FILES = " << detail::py_list(csvs) << "\nLABELS = " << detail::py_list(labels) << "\n";
    os << "BAND = (" << band.first << ", " << band.second << ")\n";
    os << R"PY(
fig, (ax_l, ax_0) = plt.subplots(2, 1, figsize=(7, 7), sharex=True)
for name, label in zip(FILES, LABELS):
    d = load(name)
    keep = [i for i, x in enumerate(d["omega_norm"]) if BAND[0] <= abs(x) <= BAND[1]]
    x = [d["omega_norm"][i] for i in keep]
    ax_l.plot(x, [d["psi_L"][i] for i in keep], ".", ms=1, label=label)
    ax_0.plot(x, [d["psi_0"][i] for i in keep], ".", ms=1, label=label)
ax_l.set_ylabel("psi_L [rad]")
ax_0.set_ylabel("psi_0 [rad]")
ax_0.set_xlabel("Omega / omega0")
ax_l.legend(markerscale=8)
save(fig, os.path.splitext(os.path.basename(sys.argv[0]))[0])
)PY";
    return os.str();
}

inline std::string mu_study_script(const std::string& csv) {
    std::ostringstream os;
    os << detail::prelude();
    os << "FILE = \"" << csv << "\"\n";
    os << R"PY(
d = load(FILE)
fig, ax = plt.subplots(figsize=(6, 4.5))
ax.semilogy(d["nu"], d["exact"], "k-", lw=2, label="exact layer")
for key in d:
    if key.startswith("mu_"):
        ax.semilogy(d["nu"], d[key], "--", lw=1, label="mu = " + key[3:])
ax.set_xlabel("nu")
ax.set_ylabel("amplitude gain")
ax.legend()
save(fig, os.path.splitext(os.path.basename(sys.argv[0]))[0])
)PY";
    return os.str();
}

inline std::string design_script(const std::string& profile_csv, const std::string& curves_csv) {
    std::ostringstream os;
    os << detail::prelude();
    os << "PROFILE = \"" << profile_csv << "\"\nCURVES = \"" << curves_csv << "\"\n";
    os << R"PY(
p = load(PROFILE)
c = load(CURVES)
fig, (ax_k, ax_t) = plt.subplots(1, 2, figsize=(10, 4))
ax_k.plot(p["z_mm"], p["K_rad_per_mm"])
ax_k.set_xlabel("z [mm]")
ax_k.set_ylabel("K [rad/mm]")
ax_t.plot(c["omega_norm"], c["tau_requested_fs"], "k-", lw=2, label="requested")
ax_t.plot(c["omega_norm"], c["tau_fs"], "--", label="from psi_L")
ax_t.set_xlabel("Omega / omega0")
ax_t.set_ylabel("tau [fs]")
ax_t.legend()
save(fig, os.path.splitext(os.path.basename(sys.argv[0]))[0])
)PY";
    return os.str();
}

}  // namespace chirpsq::plots
