#include "mrps/roadnet.hpp"

#include <algorithm>
#include <deque>

namespace mrps {

namespace {

// street index: counts non-bin rows (or cols) below x, i.e. skips every third line
int street_index(int x) { return x - (x + 1) / 3; }

struct EdgeRef { Coord a, b; bool horizontal; };

void set_edge(std::vector<uint8_t>& mask, const WarehouseMap& m, Coord from, Coord to) {
    Dir d;
    if (to.r == from.r - 1) d = Dir::N;
    else if (to.r == from.r + 1) d = Dir::S;
    else if (to.c == from.c + 1) d = Dir::E;
    else d = Dir::W;
    mask[m.index(from)] |= dir_bit(d);
}

} // namespace

RoadNetwork orient(std::shared_ptr<const WarehouseMap> map) {
    if (!map) throw ConfigError("null map");
    const WarehouseMap& m = *map;
    RoadNetwork net;
    net.map = std::move(map);
    net.out_mask_.assign(size_t(m.rows) * m.cols, 0);

    if (m.block_structured()) {
        net.detour_bounded = true;
        for (int r = 0; r < m.rows; r++)
            for (int c = 0; c < m.cols; c++) {
                Coord p{r, c};
                if (m.is_bin(p)) continue;
                Coord e{r, c + 1};
                if (m.traversable(e)) {
                    bool east;
                    if (r % 3 != 2) east = street_index(r) % 2 == 0; // streets alternate by index
                    else east = true;                               // links between bins
                    set_edge(net.out_mask_, m, east ? p : e, east ? e : p);
                }
                Coord s{r + 1, c};
                if (m.traversable(s)) {
                    bool south;
                    if (c % 3 != 2) south = street_index(c) % 2 != 0;
                    else south = true;
                    set_edge(net.out_mask_, m, south ? p : s, south ? s : p);
                }
            }
    } else {
        // loaded map outside the block family: orient by DFS — tree edges point
        // away from the root, every other edge points from the later-discovered
        // endpoint back toward the earlier one; strong for 2-edge-connected graphs
        net.detour_bounded = false;
        int n = m.rows * m.cols;
        std::vector<int32_t> disc(n, -1);
        int root = -1;
        for (int i = 0; i < n && root < 0; i++)
            if (m.cells[i] != CellKind::Bin) root = i;
        if (root < 0) throw ConfigError("map has no traversable cells");
        struct Frame { int v; int parent; int diri; };
        std::vector<Frame> stack{{root, -1, 0}};
        int timer = 0;
        disc[root] = timer++;
        while (!stack.empty()) {
            Frame& f = stack.back();
            Coord p{f.v / m.cols, f.v % m.cols};
            if (f.diri == 4) { stack.pop_back(); continue; }
            Coord q = step(p, kDirs[f.diri]);
            f.diri++;
            if (!m.traversable(q)) continue;
            int w = m.index(q);
            if (w == f.parent) continue;
            if (disc[w] < 0) {
                disc[w] = timer++;
                set_edge(net.out_mask_, m, p, q);
                stack.push_back({w, f.v, 0});
            } else if (disc[w] < disc[f.v]) {
                // first visit of this non-tree edge happens from the deeper end
                set_edge(net.out_mask_, m, p, q);
            }
        }
    }

    net.check_strong_connectivity();
    net.build_fields();
    return net;
}

void RoadNetwork::check_strong_connectivity() const {
    const WarehouseMap& m = *map;
    int n = m.rows * m.cols;
    int start = -1, free_cells = 0;
    for (int i = 0; i < n; i++)
        if (m.cells[i] != CellKind::Bin) {
            if (start < 0) start = i;
            free_cells++;
        }
    auto bfs = [&](bool forward) {
        std::vector<char> seen(size_t(n), 0);
        std::deque<int> q{start};
        seen[size_t(start)] = 1;
        int count = 1;
        while (!q.empty()) {
            int v = q.front();
            q.pop_front();
            Coord p{v / m.cols, v % m.cols};
            for (Dir d : kDirs) {
                Coord t = step(p, d);
                if (!m.traversable(t)) continue;
                bool edge = forward ? allowed(p, d)
                                    : (out_mask_[m.index(t)] & dir_bit([&] {
                                          switch (d) {
                                              case Dir::N: return Dir::S;
                                              case Dir::S: return Dir::N;
                                              case Dir::E: return Dir::W;
                                              default: return Dir::E;
                                          }
                                      }())) != 0;
                if (!edge) continue;
                int w = m.index(t);
                if (!seen[size_t(w)]) {
                    seen[size_t(w)] = 1;
                    count++;
                    q.push_back(w);
                }
            }
        }
        return count;
    };
    if (bfs(true) != free_cells || bfs(false) != free_cells)
        throw ConfigError("orientation is not strongly connected; map outside the supported family");
}

std::vector<Coord> RoadNetwork::access_cells(Coord bin) const {
    std::vector<Coord> out;
    for (Dir d : kDirs) {
        Coord a = step(bin, d);
        if (map->traversable(a)) out.push_back(a);
    }
    std::sort(out.begin(), out.end());
    return out;
}

void RoadNetwork::build_fields() {
    const WarehouseMap& m = *map;
    field_slot_.assign(size_t(m.rows) * m.cols, -1);

    std::vector<Coord> goals = m.stations;
    for (Coord b : m.bins)
        for (Coord a : access_cells(b))
            goals.push_back(a);
    std::sort(goals.begin(), goals.end());
    goals.erase(std::unique(goals.begin(), goals.end()), goals.end());

    // reverse adjacency once, reused for every goal field
    std::vector<std::vector<int32_t>> rev(size_t(m.rows) * m.cols);
    for (int r = 0; r < m.rows; r++)
        for (int c = 0; c < m.cols; c++) {
            Coord p{r, c};
            if (m.is_bin(p)) continue;
            for (Dir d : kDirs)
                if (allowed(p, d)) rev[size_t(m.index(step(p, d)))].push_back(m.index(p));
        }

    to_fields_.reserve(goals.size());
    for (Coord g : goals) {
        std::vector<int32_t> dist(size_t(m.rows) * m.cols, -1);
        std::deque<int> q{m.index(g)};
        dist[size_t(m.index(g))] = 0;
        while (!q.empty()) {
            int v = q.front();
            q.pop_front();
            for (int32_t u : rev[size_t(v)])
                if (dist[size_t(u)] < 0) {
                    dist[size_t(u)] = dist[size_t(v)] + 1;
                    q.push_back(u);
                }
        }
        field_slot_[size_t(m.index(g))] = int32_t(to_fields_.size());
        to_fields_.push_back(std::move(dist));
    }

    // directed diameter over free cells, by forward BFS from every cell
    diameter_ = 0;
    for (int r = 0; r < m.rows; r++)
        for (int c = 0; c < m.cols; c++) {
            if (m.is_bin({r, c})) continue;
            auto f = field_from({r, c});
            for (int i = 0; i < m.rows * m.cols; i++)
                if (m.cells[size_t(i)] != CellKind::Bin)
                    diameter_ = std::max(diameter_, int(f[size_t(i)]));
        }
}

const std::vector<int32_t>& RoadNetwork::field_to(Coord goal) const {
    int32_t slot = field_slot_[map->index(goal)];
    if (slot < 0) throw ConfigError("no precomputed field to " + to_string(goal));
    return to_fields_[size_t(slot)];
}

std::vector<int32_t> RoadNetwork::field_from(Coord src) const {
    const WarehouseMap& m = *map;
    std::vector<int32_t> dist(size_t(m.rows) * m.cols, -1);
    std::deque<Coord> q{src};
    dist[size_t(m.index(src))] = 0;
    while (!q.empty()) {
        Coord p = q.front();
        q.pop_front();
        int d = dist[size_t(m.index(p))];
        for (Dir dir : kDirs) {
            if (!allowed(p, dir)) continue;
            Coord t = step(p, dir);
            if (dist[size_t(m.index(t))] < 0) {
                dist[size_t(m.index(t))] = d + 1;
                q.push_back(t);
            }
        }
    }
    return dist;
}

int directed_distance(const RoadNetwork& net, Coord from, Coord to) {
    const WarehouseMap& m = *net.map;
    if (!m.in_bounds(from) || !m.in_bounds(to)) throw ConfigError("coordinate off the map");
    if (m.is_bin(from)) throw ConfigError("directed queries start from non-bin cells");
    if (from == to) return 0;

    auto value_at = [&](const std::vector<int32_t>& field_to_target) {
        return int(field_to_target[size_t(m.index(from))]);
    };

    if (m.is_bin(to)) {
        int best = kUnreachable;
        for (Coord a : net.access_cells(to)) {
            int v = net.has_field_to(a) ? value_at(net.field_to(a)) : kUnreachable;
            if (v >= 0 && (best < 0 || v + 1 < best)) best = v + 1;
        }
        return best;
    }
    if (net.has_field_to(to)) return value_at(net.field_to(to));
    auto f = net.field_from(from);
    return int(f[size_t(m.index(to))]);
}

std::string dump_arrows(const RoadNetwork& net) {
    const WarehouseMap& m = *net.map;
    std::string out;
    for (int r = 0; r < m.rows; r++) {
        for (int c = 0; c < m.cols; c++) {
            Coord p{r, c};
            if (m.at(p) == CellKind::Bin) { out += 'B'; continue; }
            if (m.at(p) == CellKind::Station) { out += 'S'; continue; }
            uint8_t mask = net.out_mask(p);
            char ch = '?';
            if (net.detour_bounded && r % 3 != 2 && (mask & (dir_bit(Dir::E) | dir_bit(Dir::W)))) {
                ch = (mask & dir_bit(Dir::E)) ? '>' : '<';
            } else if (net.detour_bounded && (mask & (dir_bit(Dir::N) | dir_bit(Dir::S)))) {
                ch = (mask & dir_bit(Dir::N)) ? '^' : 'v';
            } else {
                if (mask & dir_bit(Dir::E)) ch = '>';
                else if (mask & dir_bit(Dir::W)) ch = '<';
                else if (mask & dir_bit(Dir::N)) ch = '^';
                else if (mask & dir_bit(Dir::S)) ch = 'v';
            }
            out += ch;
        }
        out += '\n';
    }
    return out;
}

} // namespace mrps
