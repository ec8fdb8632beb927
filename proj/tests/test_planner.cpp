#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "mrps/planner.hpp"
#include "mrps/roadnet.hpp"
#include "mrps/rng.hpp"

using namespace mrps;

namespace {

std::shared_ptr<const RoadNetwork> make_net(int a, int b, int stations) {
    auto m = std::make_shared<WarehouseMap>(generate_map(a, b, stations));
    return std::make_shared<RoadNetwork>(orient(m));
}

bool legal_path(const RoadNetwork& net, Coord start, const std::deque<Coord>& path, Coord goal) {
    Coord cur = start;
    for (Coord nxt : path) {
        bool ok = false;
        for (Dir d : kDirs)
            if (net.allowed(cur, d) && step(cur, d) == nxt) ok = true;
        if (!ok) return false;
        cur = nxt;
    }
    return cur == goal;
}

// goals with precomputed fields: stations and bin access cells
std::vector<Coord> plan_goals(const RoadNetwork& net) {
    std::vector<Coord> out = net.map->stations;
    for (Coord bin : net.map->bins)
        for (Coord a : net.access_cells(bin)) out.push_back(a);
    return out;
}

int path_conflicts(const WarehouseMap& m, const AnnouncedPaths& announced,
                   const std::deque<Coord>& path) {
    int t = 1, total = 0;
    for (Coord p : path) total += announced.count(m.index(p), t++);
    return total;
}

RobotState make_robot(int id, Coord pos, std::deque<Coord> path) {
    RobotState r;
    r.id = id;
    r.position = pos;
    r.path = std::move(path);
    if (!r.path.empty()) r.goal = r.path.back();
    return r;
}

std::string path_key(const std::deque<Coord>& path) {
    std::string s;
    for (Coord p : path) s += to_string(p);
    return s;
}

// independent count of shortest paths from start to goal along permitted moves
double count_shortest(const RoadNetwork& net, Coord start, Coord goal) {
    const WarehouseMap& m = *net.map;
    const auto& h = net.field_to(goal);
    std::vector<int> order;
    for (int i = 0; i < m.cell_count(); i++)
        if (h[size_t(i)] >= 0 && h[size_t(i)] <= h[size_t(m.index(start))]) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](int x, int y) { return h[size_t(x)] < h[size_t(y)]; });
    std::vector<double> cnt(size_t(m.cell_count()), 0.0);
    for (int cell : order) {
        if (h[size_t(cell)] == 0) {
            cnt[size_t(cell)] = 1;
            continue;
        }
        Coord p{cell / m.cols, cell % m.cols};
        for (Dir d : kDirs) {
            if (!net.allowed(p, d)) continue;
            Coord q = step(p, d);
            if (h[size_t(m.index(q))] == h[size_t(cell)] - 1) cnt[size_t(cell)] += cnt[size_t(m.index(q))];
        }
    }
    return cnt[size_t(m.index(start))];
}

} // namespace

TEST_CASE("announced paths bookkeeping") {
    auto net = make_net(1, 1, 1);
    const WarehouseMap& m = *net->map;
    AnnouncedPaths ap;
    ap.cols = m.cols;
    std::deque<Coord> path{{0, 1}, {0, 2}, {0, 3}};
    ap.add_path(m, {0, 0}, path);
    CHECK(ap.count(m.index({0, 1}), 1) == 1);
    CHECK(ap.count(m.index({0, 2}), 2) == 1);
    CHECK(ap.count(m.index({0, 3}), 3) == 1);
    CHECK(ap.count(m.index({0, 1}), 2) == 0);
    ap.add_path(m, {1, 1}, std::deque<Coord>{{0, 1}});
    CHECK(ap.count(m.index({0, 1}), 1) == 2);
    ap.remove_path(m, {0, 0}, path);
    ap.remove_path(m, {1, 1}, std::deque<Coord>{{0, 1}});
    CHECK(ap.occupancy.empty());
}

TEST_CASE("deterministic planning follows a shortest route") {
    auto net = make_net(4, 9, 12);
    const WarehouseMap& m = *net->map;
    auto goals = plan_goals(*net);
    Rng rng(61);
    AnnouncedPaths none;
    none.cols = m.cols;
    for (int trial = 0; trial < 200; trial++) {
        Coord goal = goals[rng.below(goals.size())];
        Coord start = goals[rng.below(goals.size())];
        RobotState r = make_robot(0, start, {});
        r.goal = goal;
        auto path = plan_initial_path(r, *net, PlanMode::Plain, none, rng);
        CHECK(int(path.size()) == net->field_to(goal)[size_t(m.index(start))]);
        CHECK(legal_path(*net, start, path, goal));
        auto again = plan_initial_path(r, *net, PlanMode::Plain, none, rng);
        CHECK(path == again);
    }
    RobotState home = make_robot(0, goals[0], {});
    home.goal = goals[0];
    CHECK(plan_initial_path(home, *net, PlanMode::Plain, none, rng).empty());
}

TEST_CASE("diversified planning samples shortest paths uniformly") {
    auto net = make_net(2, 2, 4);
    const WarehouseMap& m = *net->map;
    auto goals = plan_goals(*net);
    Rng rng(62);
    AnnouncedPaths none;
    none.cols = m.cols;

    for (int trial = 0; trial < 100; trial++) {
        Coord goal = goals[rng.below(goals.size())];
        Coord start = goals[rng.below(goals.size())];
        RobotState r = make_robot(0, start, {});
        r.goal = goal;
        auto path = plan_initial_path(r, *net, PlanMode::Diversified, none, rng);
        CHECK(int(path.size()) == net->field_to(goal)[size_t(m.index(start))]);
        CHECK(legal_path(*net, start, path, goal));
    }

    // frequencies over a pair with several distinct shortest routes
    Coord start{-1, -1}, goal{-1, -1};
    double k = 0;
    for (Coord g : goals) {
        for (Coord s : goals) {
            double c = count_shortest(*net, s, g);
            if (c >= 3 && c <= 8) {
                start = s;
                goal = g;
                k = c;
            }
        }
    }
    REQUIRE(k > 0);
    RobotState r = make_robot(0, start, {});
    r.goal = goal;
    const int draws = 4000;
    std::map<std::string, int> freq;
    for (int i = 0; i < draws; i++) freq[path_key(plan_initial_path(r, *net, PlanMode::Diversified, none, rng))]++;
    CHECK(double(freq.size()) == k);
    double expect = draws / k;
    for (auto& [key, n] : freq) {
        CAPTURE(key);
        CHECK(std::abs(n - expect) < 5.0 * std::sqrt(expect));
    }
}

TEST_CASE("bounded-suboptimal planning dodges announced traffic") {
    auto net = make_net(2, 2, 4);
    const WarehouseMap& m = *net->map;
    auto goals = plan_goals(*net);
    Rng rng(63);
    AnnouncedPaths none;
    none.cols = m.cols;

    int strictly_better = 0;
    for (int trial = 0; trial < 150; trial++) {
        Coord goal = goals[rng.below(goals.size())];
        Coord start = goals[rng.below(goals.size())];
        int h0 = net->field_to(goal)[size_t(m.index(start))];
        RobotState r = make_robot(0, start, {});
        r.goal = goal;

        // no traffic: the shortest length is optimal on every objective
        auto quiet = plan_initial_path(r, *net, PlanMode::Focal, none, rng);
        CHECK(int(quiet.size()) == h0);

        // announce a handful of other shortest routes crossing the area
        AnnouncedPaths busy;
        busy.cols = m.cols;
        for (int other = 0; other < 6; other++) {
            Coord og = goals[rng.below(goals.size())];
            Coord os = goals[rng.below(goals.size())];
            RobotState o = make_robot(1, os, {});
            o.goal = og;
            busy.add_path(m, os, plan_initial_path(o, *net, PlanMode::Plain, none, rng));
        }
        auto plain = plan_initial_path(r, *net, PlanMode::Plain, busy, rng);
        auto focal = plan_initial_path(r, *net, PlanMode::Focal, busy, rng, 1.5);
        CHECK(legal_path(*net, start, focal, goal));
        CHECK(int(focal.size()) <= int(1.5 * h0));
        int cf = path_conflicts(m, busy, focal);
        int cp = path_conflicts(m, busy, plain);
        CHECK(cf <= cp);
        if (cf < cp) strictly_better++;
    }
    CHECK(strictly_better > 0);
}

TEST_CASE("cycle detection on a four-robot rotation") {
    auto net = make_net(1, 1, 1);
    const WarehouseMap& m = *net->map;
    std::vector<RobotState> ring;
    ring.push_back(make_robot(0, {0, 0}, {{0, 1}}));
    ring.push_back(make_robot(1, {0, 1}, {{1, 1}}));
    ring.push_back(make_robot(2, {1, 1}, {{1, 0}}));
    ring.push_back(make_robot(3, {1, 0}, {{0, 0}}));

    std::vector<int> occupant(size_t(m.cell_count()), -1);
    for (size_t i = 0; i < ring.size(); i++) occupant[size_t(m.index(ring[i].position))] = int(i);

    for (const auto& r : ring) CHECK(detect_cycle(r, ring, occupant, m));

    SUBCASE("a gap breaks the loop") {
        ring[2].path.clear();
        for (const auto& r : ring) CHECK(!detect_cycle(r, ring, occupant, m));
    }
    SUBCASE("a robot feeding the loop is not on it") {
        ring.push_back(make_robot(4, {1, 2}, {{1, 1}}));
        occupant[size_t(m.index({1, 2}))] = 4;
        CHECK(!detect_cycle(ring[4], ring, occupant, m));
        CHECK(detect_cycle(ring[0], ring, occupant, m));
    }
}

TEST_CASE("a rotation advances as one unit") {
    auto net = make_net(1, 1, 1);
    Rng rng(64);
    std::vector<RobotState> robots;
    robots.push_back(make_robot(0, {0, 0}, {{0, 1}}));
    robots.push_back(make_robot(1, {0, 1}, {{1, 1}}));
    robots.push_back(make_robot(2, {1, 1}, {{1, 0}}));
    robots.push_back(make_robot(3, {1, 0}, {{0, 0}}));

    StepOutcome out = step(robots, *net, rng);
    CHECK(out.moves.size() == 4);
    CHECK(out.waits.empty());
    CHECK(out.cycles_detected == 4);
    CHECK(out.conflicts_resolved == 0);
    CHECK(robots[0].position == Coord{0, 1});
    CHECK(robots[1].position == Coord{1, 1});
    CHECK(robots[2].position == Coord{1, 0});
    CHECK(robots[3].position == Coord{0, 0});
}

TEST_CASE("two claimants on one cell") {
    auto net = make_net(1, 1, 1);
    Rng rng(65);

    SUBCASE("a loaded robot outranks an empty one") {
        std::vector<RobotState> robots;
        robots.push_back(make_robot(0, {0, 1}, {{1, 1}}));
        robots.push_back(make_robot(1, {1, 2}, {{1, 1}, {1, 0}}));
        robots[0].carried = 2;
        robots[0].delivered_flag = false;
        StepOutcome out = step(robots, *net, rng);
        CHECK(out.conflicts_resolved == 1);
        CHECK(robots[0].position == Coord{1, 1});
        CHECK(robots[1].position == Coord{1, 2});
        REQUIRE(out.moves.size() == 1);
        CHECK(out.moves[0].first == 0);
        CHECK(out.waits == std::vector<int>{1});
    }
    SUBCASE("otherwise the longer journey wins") {
        std::vector<RobotState> robots;
        robots.push_back(make_robot(0, {0, 1}, {{1, 1}}));
        robots.push_back(make_robot(1, {1, 2}, {{1, 1}, {1, 0}, {0, 0}}));
        StepOutcome out = step(robots, *net, rng);
        CHECK(out.conflicts_resolved == 1);
        CHECK(robots[0].position == Coord{0, 1});
        CHECK(robots[1].position == Coord{1, 1});
    }
}

TEST_CASE("priority rules directly") {
    Rng rng(66);
    RobotState loaded = make_robot(0, {0, 0}, {{0, 1}});
    loaded.delivered_flag = false;
    RobotState empty = make_robot(1, {1, 1}, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
    CHECK(resolve_priority(loaded, empty, rng));
    CHECK(!resolve_priority(empty, loaded, rng));

    RobotState shorter = make_robot(2, {1, 1}, {{0, 1}});
    CHECK(resolve_priority(empty, shorter, rng));
    CHECK(!resolve_priority(shorter, empty, rng));

    RobotState a = make_robot(3, {0, 0}, {{0, 1}});
    RobotState b = make_robot(4, {1, 1}, {{0, 1}});
    int wins = 0;
    for (int i = 0; i < 10000; i++) wins += resolve_priority(a, b, rng) ? 1 : 0;
    CHECK(wins > 4750);
    CHECK(wins < 5250);
}

TEST_CASE("a stopped robot freezes the line behind it") {
    auto net = make_net(1, 1, 1);
    Rng rng(67);
    std::vector<RobotState> robots;
    robots.push_back(make_robot(0, {2, 0}, {{2, 1}}));
    robots.push_back(make_robot(1, {2, 1}, {{3, 1}}));
    robots.push_back(make_robot(2, {3, 1}, {}));
    StepOutcome out = step(robots, *net, rng);
    CHECK(out.moves.empty());
    CHECK(out.waits.size() == 3);
    CHECK(out.cycles_detected == 0);

    // free the head and the whole line rolls
    robots[2].path = {{3, 2}};
    StepOutcome again = step(robots, *net, rng);
    CHECK(again.moves.size() == 3);
    CHECK(robots[0].position == Coord{2, 1});
    CHECK(robots[1].position == Coord{3, 1});
    CHECK(robots[2].position == Coord{3, 2});
}

TEST_CASE("random stress keeps robots apart") {
    auto net = make_net(2, 2, 4);
    const WarehouseMap& m = *net->map;
    auto goals = plan_goals(*net);
    Rng rng(68);
    AnnouncedPaths none;
    none.cols = m.cols;

    std::vector<Coord> cells;
    for (int r = 0; r < m.rows; r++)
        for (int c = 0; c < m.cols; c++)
            if (!m.is_bin({r, c})) cells.push_back({r, c});
    rng.shuffle(cells);

    const int n = 20;
    std::vector<RobotState> robots;
    for (int i = 0; i < n; i++) {
        RobotState r = make_robot(i, cells[size_t(i)], {});
        r.goal = r.position;
        robots.push_back(r);
    }

    for (int t = 0; t < 300; t++) {
        for (auto& r : robots) {
            if (!r.path.empty()) continue;
            r.goal = goals[rng.below(goals.size())];
            PlanMode mode = t % 2 == 0 ? PlanMode::Plain : PlanMode::Diversified;
            r.path = plan_initial_path(r, *net, mode, none, rng);
        }
        std::vector<Coord> before;
        for (auto& r : robots) before.push_back(r.position);

        step(robots, *net, rng);

        std::set<Coord> seen;
        for (size_t i = 0; i < robots.size(); i++) {
            CHECK(!m.is_bin(robots[i].position));
            CHECK(seen.insert(robots[i].position).second);
            // either advanced one legal edge or stayed put
            if (robots[i].position != before[i]) {
                bool edge = false;
                for (Dir d : kDirs)
                    if (net->allowed(before[i], d) && step(before[i], d) == robots[i].position) edge = true;
                CHECK(edge);
            }
        }
        for (size_t i = 0; i < robots.size(); i++)
            for (size_t j = i + 1; j < robots.size(); j++) {
                bool swapped = robots[i].position == before[j] && robots[j].position == before[i] &&
                               before[i] != before[j];
                CHECK(!swapped);
            }
    }
}
