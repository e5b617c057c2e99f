#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bogoliubov.hpp"
#include "errors.hpp"

namespace chirpsq::io {

namespace fs = std::filesystem;

/// Shortest round-trip decimal form; "nan" for missing values.
inline std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string fmt(const std::optional<double>& v) {
    return v ? fmt(*v) : fmt(std::numeric_limits<double>::quiet_NaN());
}

inline double parse_double(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const char* end = s.data() + s.size();
    auto res = std::from_chars(s.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) throw ConfigError("csv", "not a number: '" + s + "'");
    return v;
}

/// Column-oriented table written as comma-separated text.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) {
        if (row.size() != header.size()) throw DomainError("row width does not match header");
        rows.push_back(std::move(row));
    }

    std::string str() const {
        std::ostringstream os;
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
            os << '\n';
        };
        line(header);
        for (const auto& r : rows) line(r);
        return os.str();
    }

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        throw ConfigError("csv", "missing column " + name);
    }
};

inline Table read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("csv", "cannot open " + path.string());
    Table t;
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ss(s);
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        return cells;
    };
    if (!std::getline(in, line)) throw ConfigError("csv", "empty file " + path.string());
    t.header = split(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != t.header.size()) throw ConfigError("csv", "ragged row in " + path.string());
        t.rows.push_back(std::move(cells));
    }
    return t;
}

inline void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

inline void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

inline nlohmann::json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("json", "cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("json", e.what());
    }
}

/// Sidecar path for a data file: foo.csv -> foo.meta.json.
inline fs::path meta_path(const fs::path& data) {
    fs::path p = data;
    p.replace_extension(".meta.json");
    return p;
}

inline Table coefficient_table(const BogoliubovCoefficients& c) {
    Table t{{"omega_norm", "U_re", "U_im", "V_re", "V_im", "in_band"}, {}};
    for (std::size_t i = 0; i < c.points.size(); ++i) {
        const auto& p = c.points[i];
        t.add({fmt(c.grid[i]), fmt(p.u.real()), fmt(p.u.imag()), fmt(p.v.real()), fmt(p.v.imag()),
               p.in_band ? "1" : "0"});
    }
    return t;
}

inline BogoliubovCoefficients coefficients_from_table(const Table& t, SolverTag tag) {
    const std::size_t cx = t.column("omega_norm"), cur = t.column("U_re"), cui = t.column("U_im"),
                      cvr = t.column("V_re"), cvi = t.column("V_im"), cb = t.column("in_band");
    std::vector<double> x;
    std::vector<BogoliubovPoint> pts;
    for (const auto& r : t.rows) {
        x.push_back(parse_double(r[cx]));
        BogoliubovPoint p;
        p.u = {parse_double(r[cur]), parse_double(r[cui])};
        p.v = {parse_double(r[cvr]), parse_double(r[cvi])};
        p.in_band = r[cb] == "1";
        pts.push_back(p);
    }
    return {tag, FrequencyGrid(std::move(x)), std::move(pts)};
}

inline SolverTag solver_from_string(const std::string& s) {
    if (s == "exact") return SolverTag::exact;
    if (s == "approx") return SolverTag::approx;
    if (s == "ode") return SolverTag::ode;
    throw ConfigError("solver", "unknown solver " + s);
}

}  // namespace chirpsq::io
