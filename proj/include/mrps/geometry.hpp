#pragma once
#include <cstdint>
#include <compare>
#include <string>

namespace mrps {

struct Coord {
    int r = 0;
    int c = 0;
    auto operator<=>(const Coord&) const = default;
};

inline std::string to_string(Coord p) {
    return "(" + std::to_string(p.r) + "," + std::to_string(p.c) + ")";
}

enum class Dir : uint8_t { N = 0, S = 1, E = 2, W = 3 };

constexpr uint8_t dir_bit(Dir d) { return uint8_t(1u << uint8_t(d)); }

inline Coord step(Coord p, Dir d) {
    switch (d) {
        case Dir::N: return {p.r - 1, p.c};
        case Dir::S: return {p.r + 1, p.c};
        case Dir::E: return {p.r, p.c + 1};
        default:     return {p.r, p.c - 1};
    }
}

constexpr Dir opposite(Dir d) {
    switch (d) {
        case Dir::N: return Dir::S;
        case Dir::S: return Dir::N;
        case Dir::E: return Dir::W;
        default:     return Dir::E;
    }
}

constexpr Dir kDirs[4] = {Dir::N, Dir::S, Dir::E, Dir::W};

// sentinel for "no path"
constexpr int kUnreachable = -1;

} // namespace mrps
