#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <set>
#include <vector>

#include "mrps/simulator.hpp"

using namespace mrps;

namespace {

std::shared_ptr<const RoadNetwork> make_net(int a, int b, int stations) {
    auto m = std::make_shared<WarehouseMap>(generate_map(a, b, stations));
    return std::make_shared<RoadNetwork>(orient(m));
}

TypeDistribution uniform_dist(int n_p, int n_c) {
    TypeDistribution d;
    d.n_p = n_p;
    d.n_c = n_c;
    d.m.assign(size_t(n_p) * n_c, 1.0 / n_c);
    return d;
}

SimConfig base_config(std::shared_ptr<const RoadNetwork> net, int n_c, uint64_t assign_seed) {
    SimConfig cfg;
    cfg.net = net;
    cfg.dist = uniform_dist(int(net->map->stations.size()), n_c);
    cfg.assignment = assign_random(int(net->map->bins.size()), n_c, assign_seed);
    return cfg;
}

} // namespace

TEST_CASE("single robot settles into the round-trip rate") {
    auto net = make_net(1, 1, 1);
    SimConfig cfg = base_config(net, 1, 1);
    cfg.robots = 1;
    cfg.horizon = 300;

    Coord station = net->map->stations[0];
    auto access = net->access_cells(net->map->bins[0]);
    int out_leg = directed_distance(*net, station, access[0]);
    Coord best = access[0];
    for (Coord a : access) {
        int d = directed_distance(*net, station, a);
        if (d < out_leg) { out_leg = d; best = a; }
    }
    int back_leg = directed_distance(*net, best, station);
    int cycle = out_leg + back_leg;
    CHECK(cycle == 6);

    SimResult res = run(cfg);
    const Metrics& met = res.metrics;
    CHECK(met.steps_run == 300);
    CHECK(met.deliveries >= (300 - net->directed_diameter()) / cycle);
    CHECK(met.deliveries <= 300 / cycle + 1);
    CHECK(met.aborted_deadlock == false);
    CHECK(met.conflicts == 0);
    CHECK(met.cycles == 0);
    CHECK(std::abs(met.throughput * 300.0 - double(met.deliveries)) < 1e-9);
}

TEST_CASE("zero horizon is a no-op") {
    auto net = make_net(1, 1, 1);
    SimConfig cfg = base_config(net, 1, 1);
    cfg.horizon = 0;
    cfg.record_trace = true;
    SimResult res = run(cfg);
    CHECK(res.metrics.deliveries == 0);
    CHECK(res.metrics.throughput == 0.0);
    CHECK(res.metrics.steps_run == 0);
    CHECK(res.trace.empty());
}

TEST_CASE("parcel sampling follows the station row") {
    SUBCASE("degenerate rows always give the same type") {
        TypeDistribution d;
        d.n_p = 2;
        d.n_c = 3;
        d.m = {0, 0, 1, 0, 1, 0};
        Rng rng(5);
        for (int i = 0; i < 200; i++) {
            CHECK(sample_parcel(0, d, rng) == 3);
            CHECK(sample_parcel(1, d, rng) == 2);
        }
    }
    SUBCASE("uniform rows come out uniform") {
        TypeDistribution d = uniform_dist(1, 4);
        Rng rng(6);
        int counts[4] = {0, 0, 0, 0};
        const int draws = 100000;
        for (int i = 0; i < draws; i++) counts[sample_parcel(0, d, rng) - 1]++;
        for (int j = 0; j < 4; j++) {
            double f = double(counts[j]) / draws;
            CHECK(f > 0.24);
            CHECK(f < 0.26);
        }
    }
    SUBCASE("deterministic given the stream") {
        TypeDistribution d = uniform_dist(1, 6);
        Rng a(7), b(7);
        for (int i = 0; i < 100; i++) CHECK(sample_parcel(0, d, a) == sample_parcel(0, d, b));
    }
}

TEST_CASE("nearest goal picks the directed argmin with lexicographic ties") {
    auto net = make_net(2, 2, 4);
    const WarehouseMap& m = *net->map;
    std::vector<Coord> candidates = m.stations;
    for (Coord bin : m.bins)
        for (Coord a : net->access_cells(bin)) candidates.push_back(a);

    Rng rng(8);
    for (int trial = 0; trial < 100; trial++) {
        Coord pos{int(rng.below(uint64_t(m.rows))), int(rng.below(uint64_t(m.cols)))};
        if (m.is_bin(pos)) continue;
        std::vector<Coord> subset;
        for (Coord c : candidates)
            if (rng.coin()) subset.push_back(c);
        if (subset.empty()) subset.push_back(candidates[0]);

        Coord got = nearest_goal(pos, subset, *net);
        int best = directed_distance(*net, pos, got);
        for (Coord c : subset) {
            int d = directed_distance(*net, pos, c);
            CHECK(best <= d);
            if (d == best) CHECK(got <= c);
        }
    }
    CHECK_THROWS_AS(nearest_goal({0, 0}, {}, *net), ConfigError);
}

TEST_CASE("identical configurations replay identically") {
    auto net = make_net(4, 9, 12);
    SimConfig cfg = base_config(net, 20, 3);
    cfg.robots = 10;
    cfg.horizon = 120;
    cfg.mode = PlanMode::Focal;
    cfg.record_trace = true;

    SimResult a = run(cfg);
    SimResult b = run(cfg);
    CHECK(a.metrics.deliveries == b.metrics.deliveries);
    CHECK(a.metrics.throughput == b.metrics.throughput);
    CHECK(a.metrics.per_type == b.metrics.per_type);
    CHECK(a.metrics.mean_task_distance == b.metrics.mean_task_distance);
    CHECK(a.metrics.waits == b.metrics.waits);
    CHECK(a.metrics.conflicts == b.metrics.conflicts);
    CHECK(a.metrics.cycles == b.metrics.cycles);
    CHECK(a.metrics.max_task_age == b.metrics.max_task_age);
    REQUIRE(a.trace.size() == b.trace.size());
    for (size_t i = 0; i < a.trace.size(); i++) {
        CHECK(a.trace[i].robot == b.trace[i].robot);
        CHECK(a.trace[i].row == b.trace[i].row);
        CHECK(a.trace[i].col == b.trace[i].col);
        CHECK(a.trace[i].carried == b.trace[i].carried);
    }

    SimConfig other = cfg;
    other.seeds.placement = 99;
    SimResult c = run(other);
    bool same = a.trace.size() == c.trace.size();
    if (same)
        for (size_t i = 0; i < a.trace.size(); i++)
            same = same && a.trace[i].row == c.trace[i].row && a.trace[i].col == c.trace[i].col;
    CHECK(!same);
}

TEST_CASE("trace obeys the physical rules") {
    auto net = make_net(4, 9, 12);
    const WarehouseMap& m = *net->map;
    SimConfig cfg = base_config(net, 12, 4);
    cfg.robots = 20;
    cfg.horizon = 250;
    cfg.mode = PlanMode::Focal;
    cfg.record_trace = true;

    SimResult res = run(cfg);
    REQUIRE(res.trace.size() == size_t(cfg.robots) * size_t(res.metrics.steps_run));

    int64_t observed_deliveries = 0;
    std::vector<TraceRow> prev;
    for (int t = 0; t < res.metrics.steps_run; t++) {
        std::vector<TraceRow> now(res.trace.begin() + size_t(t) * cfg.robots,
                                  res.trace.begin() + size_t(t + 1) * cfg.robots);
        std::set<std::pair<int, int>> cells;
        for (const auto& row : now) {
            CHECK(row.step == t);
            CHECK(!m.is_bin({row.row, row.col}));
            CHECK(cells.insert({row.row, row.col}).second);
        }
        if (!prev.empty()) {
            for (int i = 0; i < cfg.robots; i++) {
                int dr = std::abs(now[size_t(i)].row - prev[size_t(i)].row);
                int dc = std::abs(now[size_t(i)].col - prev[size_t(i)].col);
                CHECK(dr + dc <= 1);

                int was = prev[size_t(i)].carried, is = now[size_t(i)].carried;
                if (was != is) {
                    Coord pos{now[size_t(i)].row, now[size_t(i)].col};
                    if (is == 0) {
                        observed_deliveries++;
                        // dropped at an access cell of a bin collecting that type
                        bool ok = false;
                        for (Dir d : kDirs) {
                            Coord b = step(pos, d);
                            if (m.in_bounds(b) && m.is_bin(b)) {
                                size_t idx = size_t(std::find(m.bins.begin(), m.bins.end(), b) - m.bins.begin());
                                if (cfg.assignment.types[idx] == was) ok = true;
                            }
                        }
                        CHECK(ok);
                    } else {
                        CHECK(was == 0);
                        CHECK(m.at(pos) == CellKind::Station);
                    }
                }
            }
            for (int i = 0; i < cfg.robots; i++)
                for (int j = i + 1; j < cfg.robots; j++) {
                    bool swapped = now[size_t(i)].row == prev[size_t(j)].row &&
                                   now[size_t(i)].col == prev[size_t(j)].col &&
                                   now[size_t(j)].row == prev[size_t(i)].row &&
                                   now[size_t(j)].col == prev[size_t(i)].col &&
                                   (prev[size_t(i)].row != prev[size_t(j)].row ||
                                    prev[size_t(i)].col != prev[size_t(j)].col);
                    CHECK(!swapped);
                }
        }
        prev = std::move(now);
    }
    // deliveries visible in the trace can exceed the counter only via step 0
    CHECK(observed_deliveries >= res.metrics.deliveries - cfg.robots);
    CHECK(observed_deliveries <= res.metrics.deliveries + cfg.robots);

    int64_t total = 0;
    for (int64_t n : res.metrics.per_type) total += n;
    CHECK(total == res.metrics.deliveries);
}

TEST_CASE("warmup trims the measured window") {
    auto net = make_net(2, 2, 4);
    SimConfig cfg = base_config(net, 3, 5);
    cfg.robots = 4;
    cfg.horizon = 200;
    SimResult cold = run(cfg);
    cfg.warmup = 80;
    SimResult warm = run(cfg);
    CHECK(warm.metrics.warmup == 80);
    CHECK(warm.metrics.steps_run == 200);
    CHECK(warm.metrics.deliveries <= cold.metrics.deliveries);
    CHECK(std::abs(warm.metrics.throughput * 120.0 - double(warm.metrics.deliveries)) < 1e-9);
}

TEST_CASE("a starving task aborts the run") {
    auto net = make_net(1, 1, 1);
    SimConfig cfg = base_config(net, 1, 1);
    cfg.robots = 1;
    cfg.horizon = 100;
    cfg.liveness_factor = 1e-9;
    SimResult res = run(cfg);
    CHECK(res.metrics.aborted_deadlock);
    CHECK(res.metrics.deadlock_robot == 0);
    CHECK(res.metrics.steps_run < 100);
}

TEST_CASE("configuration validation") {
    auto net = make_net(1, 1, 1);
    SimConfig cfg = base_config(net, 1, 1);
    cfg.validate();

    SimConfig bad = cfg;
    bad.robots = net->map->free_cell_count();
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = cfg;
    bad.robots = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = cfg;
    bad.dist = uniform_dist(3, 1); // map has one station
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = cfg;
    bad.dist = uniform_dist(1, 2); // more types than bins
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = cfg;
    bad.assignment.types = {1, 1}; // wrong length
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = cfg;
    bad.focal_w = 0.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = cfg;
    bad.warmup = 1000;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = cfg;
    bad.liveness_factor = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}
