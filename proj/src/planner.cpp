#include "mrps/planner.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <queue>
#include <tuple>

namespace mrps {

void AnnouncedPaths::add_path(const WarehouseMap& map, Coord start, const std::deque<Coord>& path) {
    (void)start;
    int t = 1;
    for (Coord p : path) occupancy[key(map.index(p), t++)]++;
}

void AnnouncedPaths::remove_path(const WarehouseMap& map, Coord start, const std::deque<Coord>& path) {
    (void)start;
    int t = 1;
    for (Coord p : path) {
        auto it = occupancy.find(key(map.index(p), t++));
        if (it != occupancy.end() && --it->second == 0) occupancy.erase(it);
    }
}

namespace {

// successors of p on the shortest-path DAG toward the goal field h, in
// ascending (row, col) order
void shortest_successors(const RoadNetwork& net, const std::vector<int32_t>& h, Coord p,
                         std::vector<Coord>& out) {
    out.clear();
    const WarehouseMap& m = *net.map;
    int32_t hp = h[size_t(m.index(p))];
    Coord cands[4];
    int n = 0;
    for (Dir d : kDirs)
        if (net.allowed(p, d)) cands[n++] = step(p, d);
    std::sort(cands, cands + n);
    for (int i = 0; i < n; i++) {
        int32_t hv = h[size_t(m.index(cands[i]))];
        if (hv >= 0 && hv == hp - 1) out.push_back(cands[i]);
    }
}

std::deque<Coord> plan_plain(const RoadNetwork& net, Coord start, Coord goal) {
    const auto& h = net.field_to(goal);
    if (h[size_t(net.map->index(start))] < 0)
        throw ConfigError("goal " + to_string(goal) + " unreachable from " + to_string(start));
    std::deque<Coord> path;
    Coord cur = start;
    std::vector<Coord> succ;
    while (cur != goal) {
        shortest_successors(net, h, cur, succ);
        cur = succ.front();
        path.push_back(cur);
    }
    return path;
}

std::deque<Coord> plan_diversified(const RoadNetwork& net, Coord start, Coord goal, Rng& rng) {
    const WarehouseMap& m = *net.map;
    const auto& h = net.field_to(goal);
    int32_t h0 = h[size_t(m.index(start))];
    if (h0 < 0)
        throw ConfigError("goal " + to_string(goal) + " unreachable from " + to_string(start));

    // count shortest paths to the goal, filling cells in ascending h
    std::vector<int> by_h;
    for (int i = 0; i < m.rows * m.cols; i++)
        if (h[size_t(i)] >= 0 && h[size_t(i)] <= h0) by_h.push_back(i);
    std::sort(by_h.begin(), by_h.end(), [&](int a, int b) { return h[size_t(a)] < h[size_t(b)]; });
    std::vector<double> count(size_t(m.rows) * m.cols, 0.0);
    std::vector<Coord> succ;
    for (int cell : by_h) {
        if (h[size_t(cell)] == 0) {
            count[size_t(cell)] = 1.0;
            continue;
        }
        shortest_successors(net, h, {cell / m.cols, cell % m.cols}, succ);
        double s = 0;
        for (Coord q : succ) s += count[size_t(m.index(q))];
        count[size_t(cell)] = s;
    }

    // walk the DAG, branching with probability proportional to downstream counts
    std::deque<Coord> path;
    Coord cur = start;
    while (cur != goal) {
        shortest_successors(net, h, cur, succ);
        double total = 0;
        for (Coord q : succ) total += count[size_t(m.index(q))];
        double pick = rng.uniform01() * total;
        Coord chosen = succ.back();
        for (Coord q : succ) {
            pick -= count[size_t(m.index(q))];
            if (pick < 0) {
                chosen = q;
                break;
            }
        }
        cur = chosen;
        path.push_back(cur);
    }
    return path;
}

// best-first over (cell, time) states ordered by announced-path collisions,
// restricted to t + h(cell) <= floor(focal_w * h(start)) so the result stays
// within the suboptimality bound
std::deque<Coord> plan_focal(const RoadNetwork& net, Coord start, Coord goal,
                             const AnnouncedPaths& announced, double focal_w) {
    const WarehouseMap& m = *net.map;
    const auto& h = net.field_to(goal);
    int32_t h0 = h[size_t(m.index(start))];
    if (h0 < 0)
        throw ConfigError("goal " + to_string(goal) + " unreachable from " + to_string(start));
    if (h0 == 0) return {};
    const int budget = int(std::floor(focal_w * double(h0)));

    struct Node {
        int cell, t, conf, parent;
    };
    std::vector<Node> arena;
    arena.push_back({m.index(start), 0, 0, -1});

    using Key = std::tuple<int, int, int, int>; // collisions, t + h, t, cell
    std::priority_queue<std::pair<Key, int>, std::vector<std::pair<Key, int>>, std::greater<>> open;
    open.push({{0, h0, 0, m.index(start)}, 0});
    std::unordered_map<uint64_t, int> best_conf; // (cell, t) -> fewest collisions seen
    best_conf[AnnouncedPaths::key(m.index(start), 0)] = 0;

    const int goal_cell = m.index(goal);
    std::vector<Coord> succ;
    while (!open.empty()) {
        auto [key, idx] = open.top();
        open.pop();
        const Node nd = arena[size_t(idx)];
        auto bc = best_conf.find(AnnouncedPaths::key(nd.cell, nd.t));
        if (bc != best_conf.end() && bc->second < nd.conf) continue;
        if (nd.cell == goal_cell) {
            std::deque<Coord> path;
            for (int cur = idx; arena[size_t(cur)].parent >= 0; cur = arena[size_t(cur)].parent)
                path.push_front({arena[size_t(cur)].cell / m.cols, arena[size_t(cur)].cell % m.cols});
            return path;
        }
        Coord p{nd.cell / m.cols, nd.cell % m.cols};
        succ.clear();
        for (Dir d : kDirs)
            if (net.allowed(p, d)) succ.push_back(step(p, d));
        std::sort(succ.begin(), succ.end());
        for (Coord q : succ) {
            int qc = m.index(q);
            int t = nd.t + 1;
            if (h[size_t(qc)] < 0 || t + h[size_t(qc)] > budget) continue;
            int conf = nd.conf + announced.count(qc, t);
            uint64_t qk = AnnouncedPaths::key(qc, t);
            auto it = best_conf.find(qk);
            if (it != best_conf.end() && it->second <= conf) continue;
            best_conf[qk] = conf;
            arena.push_back({qc, t, conf, idx});
            open.push({{conf, t + h[size_t(qc)], t, qc}, int(arena.size()) - 1});
        }
    }
    throw ConfigError("no path within suboptimality budget"); // unreachable: the shortest path qualifies
}

} // namespace

std::deque<Coord> plan_initial_path(const RobotState& robot, const RoadNetwork& net, PlanMode mode,
                                    const AnnouncedPaths& announced, Rng& rng, double focal_w) {
    if (robot.position == robot.goal) return {};
    switch (mode) {
        case PlanMode::Plain: return plan_plain(net, robot.position, robot.goal);
        case PlanMode::Diversified: return plan_diversified(net, robot.position, robot.goal, rng);
        default: return plan_focal(net, robot.position, robot.goal, announced, focal_w);
    }
}

bool detect_cycle(const RobotState& robot, const std::vector<RobotState>& robots,
                  const std::vector<int>& occupant_by_cell, const WarehouseMap& map) {
    if (!robot.intends_to_move() || robot.decision == Mark::Wait) return false;
    int hops = 0;
    const RobotState* cur = &robot;
    while (true) {
        int occ = occupant_by_cell[size_t(map.index(cur->path.front()))];
        if (occ < 0) return false;
        const RobotState& nxt = robots[size_t(occ)];
        if (!nxt.intends_to_move() || nxt.decision == Mark::Wait) return false;
        if (nxt.id == robot.id) return true;
        cur = &nxt;
        if (++hops > int(robots.size())) return false; // chain feeds a loop we are not on
    }
}

bool resolve_priority(const RobotState& a, const RobotState& b, Rng& rng) {
    bool au = !a.delivered_flag;
    bool bu = !b.delivered_flag;
    if (au != bu) return au;
    if (a.remaining_steps() != b.remaining_steps()) return a.remaining_steps() > b.remaining_steps();
    return rng.coin();
}

namespace {

struct StepContext {
    std::vector<RobotState>& robots;
    const WarehouseMap& map;
    std::vector<int>& occupant; // cell -> robot index, -1 when empty
    std::vector<char>& visiting;
    Rng& rng;
    int cycles = 0;
    int conflicts = 0;
};

// a detected rotation moves as one unit; marking every member at once keeps a
// later contest from splitting it
void mark_cycle(StepContext& ctx, int i) {
    int cur = i;
    do {
        ctx.robots[size_t(cur)].decision = Mark::MoveForward;
        ctx.cycles++;
        cur = ctx.occupant[size_t(ctx.map.index(ctx.robots[size_t(cur)].path.front()))];
    } while (cur != i);
}

void recursive_move(StepContext& ctx, int i) {
    RobotState& r = ctx.robots[size_t(i)];
    if (r.decision != Mark::Unmarked) return;
    if (detect_cycle(r, ctx.robots, ctx.occupant, ctx.map)) {
        mark_cycle(ctx, i);
        return;
    }
    ctx.visiting[size_t(i)] = 1;
    const int next_cell = ctx.map.index(r.path.front());
    int j = ctx.occupant[size_t(next_cell)];
    if (j >= 0) {
        if (ctx.visiting[size_t(j)]) {
            r.decision = Mark::Wait;
            ctx.visiting[size_t(i)] = 0;
            return;
        }
        recursive_move(ctx, j);
        if (r.decision != Mark::Unmarked) { // swept into a rotation during the recursion
            ctx.visiting[size_t(i)] = 0;
            return;
        }
        if (ctx.robots[size_t(j)].decision == Mark::Wait) {
            r.decision = Mark::Wait;
            ctx.visiting[size_t(i)] = 0;
            return;
        }
    }
    // the cell ahead is (or becomes) free; settle it against other claimants
    int contender = -1;
    for (size_t o = 0; o < ctx.robots.size(); o++) {
        const RobotState& other = ctx.robots[o];
        if (int(o) == i || !other.intends_to_move()) continue;
        if (ctx.map.index(other.path.front()) != next_cell) continue;
        if (other.decision == Mark::MoveForward) {
            r.decision = Mark::Wait;
            ctx.visiting[size_t(i)] = 0;
            return;
        }
        if (other.decision == Mark::Unmarked && contender < 0) contender = int(o);
    }
    if (contender < 0) {
        r.decision = Mark::MoveForward;
    } else {
        RobotState& k = ctx.robots[size_t(contender)];
        ctx.conflicts++;
        if (resolve_priority(r, k, ctx.rng)) {
            r.decision = Mark::MoveForward;
            k.decision = Mark::Wait;
        } else {
            r.decision = Mark::Wait;
            k.decision = Mark::MoveForward;
        }
    }
    ctx.visiting[size_t(i)] = 0;
}

} // namespace

StepOutcome step(std::vector<RobotState>& robots, const RoadNetwork& net, Rng& rng) {
    const WarehouseMap& map = *net.map;
    std::vector<int> occupant(size_t(map.rows) * map.cols, -1);
    for (size_t i = 0; i < robots.size(); i++) {
        RobotState& r = robots[i];
        assert(r.decision == Mark::Unmarked);
        assert(map.traversable(r.position));
        assert(occupant[size_t(map.index(r.position))] < 0);
        occupant[size_t(map.index(r.position))] = int(i);
        r.id = int(i);
    }
    std::vector<char> visiting(robots.size(), 0);
    StepContext ctx{robots, map, occupant, visiting, rng};

    for (auto& r : robots)
        if (!r.intends_to_move()) r.decision = Mark::Wait;
    for (size_t i = 0; i < robots.size(); i++)
        if (robots[i].decision == Mark::Unmarked) recursive_move(ctx, int(i));

    StepOutcome out;
    out.cycles_detected = ctx.cycles;
    out.conflicts_resolved = ctx.conflicts;
    for (auto& r : robots) {
        if (r.decision == Mark::MoveForward) {
            r.position = r.path.front();
            r.path.pop_front();
            out.moves.push_back({r.id, r.position});
        } else {
            out.waits.push_back(r.id);
        }
        r.decision = Mark::Unmarked;
    }

#ifndef NDEBUG
    {
        std::vector<int> cells;
        cells.reserve(robots.size());
        for (auto& r : robots) cells.push_back(map.index(r.position));
        std::sort(cells.begin(), cells.end());
        assert(std::adjacent_find(cells.begin(), cells.end()) == cells.end());
    }
#endif
    return out;
}

} // namespace mrps
