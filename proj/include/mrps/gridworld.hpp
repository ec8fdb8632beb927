#pragma once
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mrps/geometry.hpp"
#include "mrps/rng.hpp"

namespace mrps {

enum class CellKind : uint8_t { Free = 0, Bin = 1, Station = 2 };

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    int line, col;
    ParseError(int line_, int col_, const std::string& what_)
        : std::runtime_error("parse error at line " + std::to_string(line_) + ", col " +
                             std::to_string(col_) + ": " + what_),
          line(line_), col(col_) {}
};

class WarehouseMap {
public:
    int rows = 0;
    int cols = 0;
    std::vector<CellKind> cells;   // row-major
    std::vector<Coord> bins;       // row-major order
    std::vector<Coord> stations;   // row-major order (canonical; station k = distribution row k)

    int index(int r, int c) const { return r * cols + c; }
    int index(Coord p) const { return p.r * cols + p.c; }
    bool in_bounds(Coord p) const { return p.r >= 0 && p.r < rows && p.c >= 0 && p.c < cols; }
    CellKind at(Coord p) const { return cells[index(p)]; }
    bool is_bin(Coord p) const { return at(p) == CellKind::Bin; }
    bool traversable(Coord p) const { return in_bounds(p) && at(p) != CellKind::Bin; }
    int cell_count() const { return rows * cols; }
    int free_cell_count() const { return rows * cols - int(bins.size()); }

    // true when the map is the 3x3-block construction: rows=3a+2, cols=3b+2,
    // bins exactly at r%3==2 && c%3==2
    bool block_structured() const;

    // undirected shortest distance from station k to bin i (1 + best access neighbor)
    int station_bin_distance(int k, int i) const { return station_bin_dist_[size_t(k) * bins.size() + size_t(i)]; }

    // BFS field over cells from station k (bins unreachable = -1)
    const std::vector<int32_t>& station_field(int k) const { return station_fields_[size_t(k)]; }

    // throws ConfigError describing the first violated invariant, if any
    void validate() const;

    // called by generate_map/load_map once members are set
    void build_caches();

private:
    std::vector<std::vector<int32_t>> station_fields_;
    std::vector<int32_t> station_bin_dist_; // n_p x n_b
};

// station placement: either a count (evenly spaced along the border, corners skipped)
// or explicit border coordinates
using StationSpec = std::variant<int, std::vector<Coord>>;

WarehouseMap generate_map(int block_rows, int block_cols, const StationSpec& station_spec);

// shortest 4-connected path length over non-Bin cells; a Bin endpoint costs
// 1 + the best of its orthogonal non-Bin neighbors; kUnreachable if no path
int undirected_distance(const WarehouseMap& map, Coord from, Coord to);

// one full BFS field from `from` (which may be a bin); field[cell]=dist, bins get
// 1 + best access neighbor, unreachable = -1
std::vector<int32_t> undirected_field(const WarehouseMap& map, Coord from);

WarehouseMap load_map(const std::string& text);
std::string save_map(const WarehouseMap& map);

struct TypeDistribution {
    int n_p = 0;
    int n_c = 0;
    std::vector<double> m; // n_p x n_c, rows sum to 1

    double at(int k, int j) const { return m[size_t(k) * n_c + size_t(j)]; }
    void validate() const;
};

// symmetric Dirichlet(1) rows: uniform on the probability simplex
TypeDistribution random_distribution(int n_p, int n_c, Rng& rng);

TypeDistribution load_distribution(const std::string& text);
std::string save_distribution(const TypeDistribution& dist);

} // namespace mrps
