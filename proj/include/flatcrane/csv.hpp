#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "flatcrane/errors.hpp"
#include "flatcrane/planner.hpp"

namespace flatcrane {

/// Fixed 17-significant-digit formatting; identical inputs give identical
/// bytes, and doubles round-trip exactly.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open output file " + path.string());
    }
    return out;
}

} // namespace detail

/// reference.csv: columns k,y1,y2. y2 runs out five samples before y1; its
/// cell is left empty on the trailing rows.
inline void write_reference_csv(const std::filesystem::path& path, const FlatReference& ref) {
    std::ofstream out = detail::open_output(path);
    out << "k,y1,y2\n";
    for (std::size_t k = 0; k < ref.y1.size(); ++k) {
        out << k << ',' << format_double(ref.y1[k]) << ',';
        if (k < ref.y2.size()) {
            out << format_double(ref.y2[k]);
        }
        out << '\n';
    }
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

/// trajectory.csv: columns k,t,x1..x6,u1,u2,ubar1,ubar2 with one row per step
/// 0..N. The row at k = N carries the steady hold input of the goal rest.
inline void write_trajectory_csv(const std::filesystem::path& path, const FeedforwardResult& ff,
                                 double T_s) {
    std::ofstream out = detail::open_output(path);
    out << "k,t,x1,x2,x3,x4,x5,x6,u1,u2,ubar1,ubar2\n";
    for (std::size_t k = 0; k < ff.x_d.size(); ++k) {
        out << k << ',' << format_double(static_cast<double>(k) * T_s);
        for (int i = 0; i < 6; ++i) {
            out << ',' << format_double(ff.x_d[k][i]);
        }
        out << ',' << format_double(ff.u_d[k][0]) << ',' << format_double(ff.u_d[k][1]);
        out << ',' << format_double(ff.ubar_d[k][0]) << ',' << format_double(ff.ubar_d[k][1]);
        out << '\n';
    }
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

/// States-only CSV (simulate output): columns k,t,x1..x6.
inline void write_states_csv(const std::filesystem::path& path,
                             const std::vector<CraneState>& states, double T_s) {
    std::ofstream out = detail::open_output(path);
    out << "k,t,x1,x2,x3,x4,x5,x6\n";
    for (std::size_t k = 0; k < states.size(); ++k) {
        out << k << ',' << format_double(static_cast<double>(k) * T_s);
        for (int i = 0; i < 6; ++i) {
            out << ',' << format_double(states[k][i]);
        }
        out << '\n';
    }
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

/// Tidy long-format CSV for plotting: columns k,t,series,value.
inline void write_plot_csv(const std::filesystem::path& path, const FlatReference& ref,
                           const FeedforwardResult& ff, double T_s) {
    std::ofstream out = detail::open_output(path);
    out << "k,t,series,value\n";
    auto row = [&](std::size_t k, const char* series, double value) {
        out << k << ',' << format_double(static_cast<double>(k) * T_s) << ',' << series << ','
            << format_double(value) << '\n';
    };
    static const char* state_names[6] = {"x1", "x2", "x3", "x4", "x5", "x6"};
    for (std::size_t k = 0; k < ff.x_d.size(); ++k) {
        row(k, "y1", ref.y1[k]);
        if (k < ref.y2.size()) {
            row(k, "y2", ref.y2[k]);
        }
        for (int i = 0; i < 6; ++i) {
            row(k, state_names[i], ff.x_d[k][i]);
        }
        row(k, "u1", ff.u_d[k][0]);
        row(k, "u2", ff.u_d[k][1]);
        row(k, "ubar1", ff.ubar_d[k][0]);
        row(k, "ubar2", ff.ubar_d[k][1]);
    }
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

/// Parsed trajectory.csv content, as needed to replay a plan.
struct TrajectoryCsv {
    std::vector<CraneState> states;
    std::vector<ForceInput> inputs;
};

inline TrajectoryCsv read_trajectory_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open trajectory file " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError("empty trajectory file " + path.string());
    }
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            header.push_back(cell);
        }
    }
    auto column = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return static_cast<long>(i);
        }
        throw IoError("trajectory file " + path.string() + " is missing column " + name);
    };
    long xcol[6];
    for (int i = 0; i < 6; ++i) {
        xcol[i] = column("x" + std::to_string(i + 1));
    }
    const long ucol[2] = {column("u1"), column("u2")};

    TrajectoryCsv result;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell.empty() ? std::numeric_limits<double>::quiet_NaN()
                                         : std::stod(cell));
        }
        CraneState x;
        for (int i = 0; i < 6; ++i) {
            x[i] = cells.at(static_cast<std::size_t>(xcol[i]));
        }
        result.states.push_back(x);
        result.inputs.emplace_back(cells.at(static_cast<std::size_t>(ucol[0])),
                                   cells.at(static_cast<std::size_t>(ucol[1])));
    }
    if (result.states.empty()) {
        throw IoError("trajectory file " + path.string() + " has no data rows");
    }
    return result;
}

} // namespace flatcrane
