#include "mrps/simulator.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>

namespace mrps {

void SimConfig::validate() const {
    if (!net || !net->map) throw ConfigError("simulation requires an oriented map");
    const WarehouseMap& map = *net->map;
    if (robots < 1) throw ConfigError("robot count must be positive");
    if (robots >= map.free_cell_count())
        throw ConfigError("robot count " + std::to_string(robots) + " must stay below the " +
                          std::to_string(map.free_cell_count()) + " free cells");
    if (horizon < 0) throw ConfigError("horizon must be nonnegative");
    if (warmup < 0 || warmup > horizon) throw ConfigError("warmup must lie in [0, horizon]");
    if (liveness_factor <= 0) throw ConfigError("liveness factor must be positive");
    if (focal_w < 1.0) throw ConfigError("focal weight must be at least 1");
    dist.validate();
    if (dist.n_p != int(map.stations.size()))
        throw ConfigError("distribution has " + std::to_string(dist.n_p) + " rows but the map has " +
                          std::to_string(map.stations.size()) + " stations");
    if (dist.n_c > int(map.bins.size()))
        throw ConfigError("more parcel types than bins");
    if (assignment.types.size() != map.bins.size())
        throw ConfigError("assignment covers " + std::to_string(assignment.types.size()) +
                          " bins but the map has " + std::to_string(map.bins.size()));
    assignment.validate(dist.n_c);
}

int sample_parcel(int station, const TypeDistribution& dist, Rng& rng) {
    double u = rng.uniform01();
    double cum = 0;
    for (int j = 0; j < dist.n_c; j++) {
        cum += dist.at(station, j);
        if (u < cum) return j + 1;
    }
    return dist.n_c; // row sums to 1 within tolerance; credit rounding residue to the last type
}

Coord nearest_goal(Coord position, const std::vector<Coord>& candidates, const RoadNetwork& net) {
    if (candidates.empty()) throw ConfigError("nearest_goal needs at least one candidate");
    bool found = false;
    int best = 0;
    Coord arg{};
    for (Coord c : candidates) {
        int d = directed_distance(net, position, c);
        if (d == kUnreachable) continue;
        if (!found || d < best || (d == best && c < arg)) {
            found = true;
            best = d;
            arg = c;
        }
    }
    if (!found) throw ConfigError("no goal candidate reachable from " + to_string(position));
    return arg;
}

namespace {

struct Task {
    bool to_bin = false;
    int station = -1; // target station index while heading to load
    int bin = -1;     // target bin index while delivering
    int issue_step = 0;
    int issue_dist = 0;
};

struct Sim {
    const SimConfig& cfg;
    const RoadNetwork& net;
    const WarehouseMap& map;
    std::vector<RobotState> robots;
    std::vector<Task> tasks;
    std::vector<std::vector<Coord>> access; // per bin
    Rng parcel_rng, planner_rng, placement_rng;
    Metrics met;
    std::vector<TraceRow> trace;
    int64_t legs = 0;
    double leg_dist_sum = 0;

    explicit Sim(const SimConfig& c)
        : cfg(c), net(*c.net), map(*c.net->map),
          parcel_rng(c.seeds.parcel), planner_rng(c.seeds.planner), placement_rng(c.seeds.placement) {
        access.reserve(map.bins.size());
        for (Coord b : map.bins) access.push_back(net.access_cells(b));
        met.per_type.assign(size_t(cfg.dist.n_c), 0);
    }

    void issue_station_goal(int i, int t) {
        Coord pos = robots[size_t(i)].position;
        int best = -1, arg = -1;
        for (size_t k = 0; k < map.stations.size(); k++) {
            int d = net.field_to(map.stations[k])[size_t(map.index(pos))];
            assert(d >= 0);
            if (arg < 0 || d < best || (d == best && map.stations[k] < map.stations[size_t(arg)])) {
                best = d;
                arg = int(k);
            }
        }
        robots[size_t(i)].goal = map.stations[size_t(arg)];
        tasks[size_t(i)] = {false, arg, -1, t, best};
    }

    void issue_bin_goal(int i, int type, int t) {
        Coord pos = robots[size_t(i)].position;
        int best = -1, arg_bin = -1;
        Coord arg_cell{};
        for (size_t b = 0; b < map.bins.size(); b++) {
            if (cfg.assignment.types[b] != type) continue;
            for (Coord a : access[b]) {
                int d = net.field_to(a)[size_t(map.index(pos))];
                if (d < 0) continue;
                if (arg_bin < 0 || d < best || (d == best && a < arg_cell)) {
                    best = d;
                    arg_bin = int(b);
                    arg_cell = a;
                }
            }
        }
        if (arg_bin < 0) throw ConfigError("no reachable bin for type " + std::to_string(type));
        robots[size_t(i)].goal = arg_cell;
        tasks[size_t(i)] = {true, -1, arg_bin, t, best};
    }

    void process_arrivals(int i, int t) {
        RobotState& r = robots[size_t(i)];
        while (r.position == r.goal) {
            assert(r.path.empty());
            Task& task = tasks[size_t(i)];
            const bool measured = t >= cfg.warmup;
            if (measured) {
                legs++;
                leg_dist_sum += task.issue_dist;
            }
            if (task.to_bin) {
                assert(r.carried.has_value());
                assert(cfg.assignment.types[size_t(task.bin)] == *r.carried);
                if (measured) {
                    met.deliveries++;
                    met.per_type[size_t(*r.carried - 1)]++;
                }
                r.carried.reset();
                r.delivered_flag = true;
                issue_station_goal(i, t);
            } else {
                int type = sample_parcel(task.station, cfg.dist, parcel_rng);
                r.carried = type;
                r.delivered_flag = false;
                issue_bin_goal(i, type, t);
            }
        }
    }

    void place_robots() {
        std::vector<Coord> cells;
        cells.reserve(size_t(map.free_cell_count()));
        for (int r = 0; r < map.rows; r++)
            for (int c = 0; c < map.cols; c++)
                if (map.cells[size_t(map.index(r, c))] != CellKind::Bin) cells.push_back({r, c});
        placement_rng.shuffle(cells);
        robots.resize(size_t(cfg.robots));
        tasks.resize(size_t(cfg.robots));
        for (int i = 0; i < cfg.robots; i++) {
            robots[size_t(i)].id = i;
            robots[size_t(i)].position = cells[size_t(i)];
        }
        for (int i = 0; i < cfg.robots; i++) {
            issue_station_goal(i, -1);
            process_arrivals(i, -1); // robots dropped onto a station load immediately
        }
    }
};

} // namespace

SimResult run(const SimConfig& config) {
    config.validate();
    Sim sim(config);
    sim.place_robots();

    const int64_t age_bound =
        int64_t(config.liveness_factor * double(sim.net.directed_diameter()));
    AnnouncedPaths announced;
    announced.cols = sim.map.cols;
    double total_ms = 0;

    int t = 0;
    for (; t < config.horizon; t++) {
        const auto clock0 = std::chrono::steady_clock::now();
        bool replanning = false;
        for (const auto& r : sim.robots)
            if (r.path.empty()) { replanning = true; break; }
        if (replanning) {
            if (config.mode == PlanMode::Focal) {
                announced.occupancy.clear();
                for (const auto& r : sim.robots)
                    if (!r.path.empty()) announced.add_path(sim.map, r.position, r.path);
            }
            for (auto& r : sim.robots) {
                if (!r.path.empty()) continue;
                assert(r.position != r.goal);
                r.path = plan_initial_path(r, sim.net, config.mode, announced, sim.planner_rng,
                                           config.focal_w);
                if (config.mode == PlanMode::Focal) announced.add_path(sim.map, r.position, r.path);
            }
        }
        StepOutcome out = step(sim.robots, sim.net, sim.planner_rng);
        total_ms += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                              clock0).count();

        if (t >= config.warmup) {
            sim.met.waits += int64_t(out.waits.size());
            sim.met.conflicts += out.conflicts_resolved;
            sim.met.cycles += out.cycles_detected;
        }
        for (int i = 0; i < config.robots; i++)
            if (sim.robots[size_t(i)].position == sim.robots[size_t(i)].goal)
                sim.process_arrivals(i, t);
        for (int i = 0; i < config.robots; i++) {
            int64_t age = t - sim.tasks[size_t(i)].issue_step;
            sim.met.max_task_age = std::max(sim.met.max_task_age, age);
            if (age > age_bound && !sim.met.aborted_deadlock) {
                sim.met.aborted_deadlock = true;
                sim.met.deadlock_robot = i;
            }
        }
        if (config.record_trace)
            for (int i = 0; i < config.robots; i++) {
                const RobotState& r = sim.robots[size_t(i)];
                sim.trace.push_back({t, i, r.position.r, r.position.c, r.carried.value_or(0)});
            }
        if (sim.met.aborted_deadlock) {
            t++;
            break;
        }
    }

    Metrics& met = sim.met;
    met.steps_run = t;
    met.warmup = config.warmup;
    const int measured = std::max(0, t - config.warmup);
    met.throughput = measured > 0 ? double(met.deliveries) / double(measured) : 0.0;
    met.mean_task_distance = sim.legs > 0 ? sim.leg_dist_sum / double(sim.legs) : 0.0;
    met.mean_step_ms = t > 0 ? total_ms / double(t) : 0.0;
    return {std::move(met), std::move(sim.trace)};
}

} // namespace mrps
