#include "mrps/gridworld.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <sstream>

namespace mrps {

bool WarehouseMap::block_structured() const {
    if (rows < 5 || cols < 5 || rows % 3 != 2 || cols % 3 != 2) return false;
    for (int r = 0; r < rows; r++)
        for (int c = 0; c < cols; c++) {
            bool want_bin = (r % 3 == 2) && (c % 3 == 2);
            if ((at({r, c}) == CellKind::Bin) != want_bin) return false;
        }
    return true;
}

namespace {

bool on_border(const WarehouseMap& m, Coord p) {
    return p.r == 0 || p.c == 0 || p.r == m.rows - 1 || p.c == m.cols - 1;
}

// connectivity + bridge check on the non-Bin subgraph (iterative lowlink DFS)
void check_two_edge_connected(const WarehouseMap& m) {
    int n = m.rows * m.cols;
    std::vector<int32_t> disc(n, -1), low(n, 0);
    int start = -1;
    for (int i = 0; i < n && start < 0; i++)
        if (m.cells[i] != CellKind::Bin) start = i;
    if (start < 0) throw ConfigError("map has no traversable cells");

    struct Frame { int v; int parent; int diri; };
    std::vector<Frame> stack;
    stack.push_back({start, -1, 0});
    int timer = 0;
    disc[start] = low[start] = timer++;
    int seen = 1;
    while (!stack.empty()) {
        Frame& f = stack.back();
        Coord p{f.v / m.cols, f.v % m.cols};
        if (f.diri < 4) {
            Coord q = step(p, kDirs[f.diri]);
            f.diri++;
            if (!m.traversable(q)) continue;
            int w = m.index(q);
            if (w == f.parent) continue;
            if (disc[w] < 0) {
                disc[w] = low[w] = timer++;
                seen++;
                stack.push_back({w, f.v, 0});
            } else {
                low[f.v] = std::min(low[f.v], disc[w]);
            }
        } else {
            int v = f.v, par = f.parent;
            stack.pop_back();
            if (par >= 0) {
                low[par] = std::min(low[par], low[v]);
                if (low[v] > disc[par])
                    throw ConfigError("non-bin subgraph is not 2-edge-connected (bridge at cell " +
                                      to_string({v / m.cols, v % m.cols}) + ")");
            }
        }
    }
    for (int i = 0; i < n; i++)
        if (m.cells[i] != CellKind::Bin && disc[i] < 0)
            throw ConfigError("non-bin subgraph is disconnected");
    (void)seen;
}

std::vector<int32_t> bfs_field(const WarehouseMap& m, const std::vector<std::pair<Coord, int>>& sources) {
    std::vector<int32_t> dist(size_t(m.rows) * m.cols, -1);
    std::deque<Coord> q;
    for (auto& [p, d0] : sources) {
        if (dist[m.index(p)] >= 0) continue;
        dist[m.index(p)] = d0;
        q.push_back(p);
    }
    // sources all share one depth here, so plain FIFO BFS is exact
    while (!q.empty()) {
        Coord p = q.front();
        q.pop_front();
        int d = dist[m.index(p)];
        for (Dir dir : kDirs) {
            Coord s = step(p, dir);
            if (!m.traversable(s)) continue;
            int32_t& cell = dist[m.index(s)];
            if (cell < 0) {
                cell = d + 1;
                q.push_back(s);
            }
        }
    }
    return dist;
}

} // namespace

void WarehouseMap::validate() const {
    if (rows <= 0 || cols <= 0) throw ConfigError("empty map");
    if (cells.size() != size_t(rows) * cols) throw ConfigError("cell grid size mismatch");
    std::vector<Coord> found_bins, found_stations;
    for (int r = 0; r < rows; r++)
        for (int c = 0; c < cols; c++) {
            Coord p{r, c};
            if (at(p) == CellKind::Bin) {
                if (on_border(*this, p))
                    throw ConfigError("bin on border at " + to_string(p));
                found_bins.push_back(p);
            } else if (at(p) == CellKind::Station) {
                if (!on_border(*this, p))
                    throw ConfigError("station off border at " + to_string(p));
                found_stations.push_back(p);
            }
        }
    if (found_bins != bins) throw ConfigError("bin list does not match grid (row-major order expected)");
    {
        auto sorted = stations;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw ConfigError("duplicate station coordinates");
        std::sort(sorted.begin(), sorted.end());
        auto found_sorted = found_stations;
        std::sort(found_sorted.begin(), found_sorted.end());
        if (found_sorted != sorted) throw ConfigError("station list does not match grid");
    }
    check_two_edge_connected(*this);
}

void WarehouseMap::build_caches() {
    station_fields_.clear();
    station_fields_.reserve(stations.size());
    for (Coord s : stations)
        station_fields_.push_back(bfs_field(*this, {{s, 0}}));
    station_bin_dist_.assign(stations.size() * bins.size(), -1);
    for (size_t k = 0; k < stations.size(); k++) {
        const auto& field = station_fields_[k];
        for (size_t i = 0; i < bins.size(); i++) {
            int32_t best = -1;
            for (Dir d : kDirs) {
                Coord a = step(bins[i], d);
                if (!traversable(a)) continue;
                int32_t v = field[index(a)];
                if (v >= 0 && (best < 0 || v < best)) best = v;
            }
            station_bin_dist_[k * bins.size() + i] = best < 0 ? -1 : best + 1;
        }
    }
}

WarehouseMap generate_map(int block_rows, int block_cols, const StationSpec& station_spec) {
    if (block_rows < 1 || block_cols < 1)
        throw ConfigError("block counts must be at least 1");
    WarehouseMap m;
    m.rows = 3 * block_rows + 2;
    m.cols = 3 * block_cols + 2;
    m.cells.assign(size_t(m.rows) * m.cols, CellKind::Free);
    for (int r = 2; r < m.rows; r += 3)
        for (int c = 2; c < m.cols; c += 3) {
            m.cells[m.index({r, c})] = CellKind::Bin;
            m.bins.push_back({r, c});
        }

    // border ring, clockwise from (0,1), corners excluded
    std::vector<Coord> ring;
    for (int c = 1; c < m.cols - 1; c++) ring.push_back({0, c});
    for (int r = 1; r < m.rows - 1; r++) ring.push_back({r, m.cols - 1});
    for (int c = m.cols - 2; c >= 1; c--) ring.push_back({m.rows - 1, c});
    for (int r = m.rows - 2; r >= 1; r--) ring.push_back({r, 0});

    if (std::holds_alternative<int>(station_spec)) {
        int count = std::get<int>(station_spec);
        if (count < 1 || count > int(ring.size()))
            throw ConfigError("station count out of range for border length " + std::to_string(ring.size()));
        for (int k = 0; k < count; k++) {
            Coord p = ring[size_t(k) * ring.size() / size_t(count)];
            m.stations.push_back(p);
            m.cells[m.index(p)] = CellKind::Station;
        }
    } else {
        for (Coord p : std::get<std::vector<Coord>>(station_spec)) {
            if (!m.in_bounds(p) || !on_border(m, p))
                throw ConfigError("station position off border: " + to_string(p));
            if (m.at(p) == CellKind::Station)
                throw ConfigError("duplicate station position: " + to_string(p));
            bool corner = (p.r == 0 || p.r == m.rows - 1) && (p.c == 0 || p.c == m.cols - 1);
            if (corner) throw ConfigError("station on corner: " + to_string(p));
            m.stations.push_back(p);
            m.cells[m.index(p)] = CellKind::Station;
        }
        if (m.stations.empty()) throw ConfigError("no stations given");
    }
    // canonical order: row-major scan, same as the text format yields
    std::sort(m.stations.begin(), m.stations.end());
    m.validate();
    m.build_caches();
    return m;
}

std::vector<int32_t> undirected_field(const WarehouseMap& map, Coord from) {
    std::vector<std::pair<Coord, int>> sources;
    if (map.is_bin(from)) {
        for (Dir d : kDirs) {
            Coord a = step(from, d);
            if (map.traversable(a)) sources.push_back({a, 1});
        }
    } else {
        sources.push_back({from, 0});
    }
    auto field = bfs_field(map, sources);
    // fill bin cells with their access-distance values
    for (Coord b : map.bins) {
        int32_t best = -1;
        for (Dir d : kDirs) {
            Coord a = step(b, d);
            if (!map.traversable(a)) continue;
            int32_t v = field[map.index(a)];
            if (v >= 0 && (best < 0 || v < best)) best = v;
        }
        field[map.index(b)] = best < 0 ? -1 : best + 1;
    }
    return field;
}

int undirected_distance(const WarehouseMap& map, Coord from, Coord to) {
    if (!map.in_bounds(from) || !map.in_bounds(to))
        throw ConfigError("coordinate off the map");
    if (from == to) return 0;
    auto field = undirected_field(map, from);
    return field[map.index(to)];
}

WarehouseMap load_map(const std::string& text) {
    std::istringstream in(text);
    std::string header;
    if (!std::getline(in, header)) throw ParseError(1, 1, "missing header line");
    int rows = 0, cols = 0;
    {
        std::istringstream hs(header);
        if (!(hs >> rows >> cols) || rows <= 0 || cols <= 0)
            throw ParseError(1, 1, "header must be 'rows cols' with positive integers");
        std::string extra;
        if (hs >> extra) throw ParseError(1, 1, "unexpected trailing content in header");
    }
    WarehouseMap m;
    m.rows = rows;
    m.cols = cols;
    m.cells.assign(size_t(rows) * cols, CellKind::Free);
    for (int r = 0; r < rows; r++) {
        std::string line;
        if (!std::getline(in, line)) throw ParseError(r + 2, 1, "missing map row");
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (int(line.size()) != cols)
            throw ParseError(r + 2, int(line.size()) + 1,
                             "row has " + std::to_string(line.size()) + " cells, expected " + std::to_string(cols));
        for (int c = 0; c < cols; c++) {
            switch (line[size_t(c)]) {
                case '.': break;
                case 'B': m.cells[m.index({r, c})] = CellKind::Bin; m.bins.push_back({r, c}); break;
                case 'S': m.cells[m.index({r, c})] = CellKind::Station; m.stations.push_back({r, c}); break;
                default: throw ParseError(r + 2, c + 1, std::string("unknown cell character '") + line[size_t(c)] + "'");
            }
        }
    }
    try {
        m.validate();
    } catch (const ConfigError& e) {
        throw ParseError(1, 1, e.what());
    }
    m.build_caches();
    return m;
}

std::string save_map(const WarehouseMap& map) {
    std::string out = std::to_string(map.rows) + " " + std::to_string(map.cols) + "\n";
    for (int r = 0; r < map.rows; r++) {
        for (int c = 0; c < map.cols; c++) {
            switch (map.at({r, c})) {
                case CellKind::Free: out += '.'; break;
                case CellKind::Bin: out += 'B'; break;
                case CellKind::Station: out += 'S'; break;
            }
        }
        out += '\n';
    }
    return out;
}

void TypeDistribution::validate() const {
    if (n_p <= 0 || n_c <= 0) throw ConfigError("distribution dimensions must be positive");
    if (m.size() != size_t(n_p) * n_c) throw ConfigError("distribution size mismatch");
    for (int k = 0; k < n_p; k++) {
        double sum = 0;
        for (int j = 0; j < n_c; j++) {
            double v = at(k, j);
            if (!(v >= 0.0 && v <= 1.0))
                throw ConfigError("probability out of [0,1] at station " + std::to_string(k) +
                                  ", type " + std::to_string(j + 1));
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw ConfigError("station " + std::to_string(k) + " row sums to " + std::to_string(sum));
    }
}

TypeDistribution random_distribution(int n_p, int n_c, Rng& rng) {
    TypeDistribution d;
    d.n_p = n_p;
    d.n_c = n_c;
    d.m.resize(size_t(n_p) * n_c);
    for (int k = 0; k < n_p; k++) {
        double sum = 0;
        for (int j = 0; j < n_c; j++) {
            double e = -std::log(1.0 - rng.uniform01()); // Exp(1) draws normalize to Dirichlet(1)
            d.m[size_t(k) * n_c + j] = e;
            sum += e;
        }
        for (int j = 0; j < n_c; j++) d.m[size_t(k) * n_c + j] /= sum;
        // force the row to sum to exactly what validate() accepts despite fp rounding
        double check = 0;
        for (int j = 0; j < n_c; j++) check += d.m[size_t(k) * n_c + j];
        d.m[size_t(k) * n_c + (n_c - 1)] += 1.0 - check;
    }
    d.validate();
    return d;
}

TypeDistribution load_distribution(const std::string& text) {
    std::istringstream in(text);
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        std::istringstream ls(line);
        std::vector<double> row;
        double v;
        while (ls >> v) row.push_back(v);
        if (row.empty()) continue; // blank line
        if (!rows.empty() && row.size() != rows[0].size())
            throw ParseError(lineno, 1, "ragged distribution row");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(1, 1, "empty distribution file");
    TypeDistribution d;
    d.n_p = int(rows.size());
    d.n_c = int(rows[0].size());
    for (auto& r : rows) d.m.insert(d.m.end(), r.begin(), r.end());
    try {
        d.validate();
    } catch (const ConfigError& e) {
        throw ParseError(1, 1, e.what());
    }
    return d;
}

std::string save_distribution(const TypeDistribution& dist) {
    std::string out;
    char buf[64];
    for (int k = 0; k < dist.n_p; k++) {
        for (int j = 0; j < dist.n_c; j++) {
            snprintf(buf, sizeof buf, "%.17g", dist.at(k, j));
            out += buf;
            out += (j + 1 == dist.n_c) ? '\n' : ' ';
        }
    }
    return out;
}

} // namespace mrps
