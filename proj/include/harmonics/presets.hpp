#pragma once

#include <cmath>
#include <string>

namespace harmonics::presets {

// 12x10 grid with 25 obstacle cells (95 free) and an arrow-shaped target.
inline const char* kArrowEnv =
    "grid 12 10\n"
    "..........\n"
    "..........\n"
    "..###.....\n"
    "..###.....\n"
    "..###.....\n"
    "..........\n"
    "..........\n"
    "......###.\n"
    "####..###.\n"
    "......###.\n"
    "......###.\n"
    "..........\n";

inline const char* kArrowShape =
    "grid 12 10\n"
    "..........\n"
    "..........\n"
    "..###.....\n"
    "..###X....\n"
    "..###.X...\n"
    "XXXXXXXX..\n"
    "......X...\n"
    ".....X###.\n"
    "####..###.\n"
    "......###.\n"
    "......###.\n"
    "..........\n";

// Obstacle-free 12x10 grid (120 cells) with an annular target.
inline const char* kAnnulusEnv =
    "grid 12 10\n"
    "..........\n"
    "..........\n"
    "..........\n"
    "..........\n"
    "..........\n"
    "..........\n"
    "..........\n"
    "..........\n"
    "..........\n"
    "..........\n"
    "..........\n"
    "..........\n";

inline std::string annulus_shape() {
    std::string s = "grid 12 10\n";
    for (int r = 0; r < 12; ++r) {
        for (int c = 0; c < 10; ++c) {
            const double dr = r - 5.5, dc = c - 4.5;
            const double d = std::sqrt(dr * dr + dc * dc);
            s += (d >= 2.3 && d <= 4.0) ? 'X' : '.';
        }
        s += '\n';
    }
    return s;
}

} // namespace harmonics::presets
