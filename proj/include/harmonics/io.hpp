#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "harmonics/env.hpp"
#include "harmonics/errors.hpp"

namespace harmonics {

// All CSV floats carry 17 significant digits so rereads are bit-exact.
inline std::string format_full(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i)
        out << (i ? "," : "") << fields[i];
    out << "\n";
}

// ASCII render of a per-free-cell field. Signed magnitude buckets
// relative to the largest |entry|:
//   '#' > 0.5   '+' > 0.05   '.' within +/-0.05   '-' < -0.05   '=' < -0.5
// Obstacle cells render as '@'.
inline std::string render_ascii(const Eigen::VectorXd& v, const Environment& env) {
    if (v.size() != env.size())
        throw ShapeMismatchError("render: vector length does not match environment");
    const double scale = std::max(v.lpNorm<Eigen::Infinity>(), 1e-300);
    std::ostringstream out;
    for (int r = 0; r < env.rows(); ++r) {
        for (int c = 0; c < env.cols(); ++c) {
            const int i = env.index_at(r, c);
            if (i < 0) {
                out << '@';
                continue;
            }
            const double x = v(i) / scale;
            out << (x > 0.5 ? '#' : x > 0.05 ? '+' : x >= -0.05 ? '.' : x >= -0.5 ? '-' : '=');
        }
        out << "\n";
    }
    return out.str();
}

// 16-bit ASCII PGM (P2). Free cells map linearly from [min, max] onto
// [1, 65535]; obstacles are 0. A constant field renders mid-gray. The
// sidecar string records the mapping.
struct PgmRender {
    std::string pgm;
    std::string sidecar;
};

inline PgmRender render_pgm(const Eigen::VectorXd& v, const Environment& env) {
    if (v.size() != env.size())
        throw ShapeMismatchError("render: vector length does not match environment");
    const double lo = v.minCoeff();
    const double hi = v.maxCoeff();
    std::ostringstream out;
    out << "P2\n" << env.cols() << " " << env.rows() << "\n65535\n";
    for (int r = 0; r < env.rows(); ++r) {
        for (int c = 0; c < env.cols(); ++c) {
            const int i = env.index_at(r, c);
            int g = 0;
            if (i >= 0) {
                g = (hi > lo) ? 1 + static_cast<int>((v(i) - lo) / (hi - lo) * 65534.0 + 0.5)
                              : 32768;
            }
            out << g << (c + 1 < env.cols() ? " " : "\n");
        }
    }
    PgmRender render;
    render.pgm = out.str();
    std::ostringstream side;
    side << "min=" << format_full(lo) << "\nmax=" << format_full(hi)
         << "\ngray: obstacles=0, min->1, max->65535, constant field->32768\n";
    render.sidecar = side.str();
    return render;
}

// Occupied-cell overlay in the same format as shape input files.
inline std::string render_overlay(const std::vector<bool>& occupied, const Environment& env) {
    if (static_cast<int>(occupied.size()) != env.size())
        throw ShapeMismatchError("render: occupancy length does not match environment");
    std::ostringstream out;
    out << (env.kind() == EnvKind::Line1D ? "line " : "grid ");
    if (env.kind() == EnvKind::Line1D)
        out << env.cols() << "\n";
    else
        out << env.rows() << " " << env.cols() << "\n";
    for (int r = 0; r < env.rows(); ++r) {
        for (int c = 0; c < env.cols(); ++c) {
            const int i = env.index_at(r, c);
            out << (i < 0 ? '#' : occupied[static_cast<size_t>(i)] ? 'X' : '.');
        }
        out << "\n";
    }
    return out.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ValidationError("cannot open output file: " + path);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ValidationError("cannot open input file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace harmonics
