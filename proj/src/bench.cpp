#include "mrps/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#ifndef MRPS_COMMIT
#define MRPS_COMMIT "unknown"
#endif

namespace mrps {

namespace {

const std::set<std::string> kSolvers = {"random", "hungarian", "greedy", "ga", "exact"};

std::string tag(const ExperimentSpec& s, const std::string& body) { return s.name + "/" + body; }

uint64_t dist_seed(const ExperimentSpec& s, int n_c, int si) {
    return derive_seed(s.base_seed, tag(s, "dist/nc" + std::to_string(n_c) + "/s" + std::to_string(si)));
}
uint64_t solver_seed(const ExperimentSpec& s, const std::string& solver, int n_c, int si) {
    return derive_seed(s.base_seed,
                       tag(s, solver + "/nc" + std::to_string(n_c) + "/s" + std::to_string(si)));
}
uint64_t parcel_seed(const ExperimentSpec& s, int robots, int si) {
    return derive_seed(s.base_seed, tag(s, "parcel/r" + std::to_string(robots) + "/s" + std::to_string(si)));
}
uint64_t planrng_seed(const ExperimentSpec& s, const std::string& planner, int robots, int si) {
    return derive_seed(s.base_seed, tag(s, "plan/" + planner + "/r" + std::to_string(robots) + "/s" +
                                               std::to_string(si)));
}
uint64_t placement_seed(const ExperimentSpec& s, int robots, int si) {
    return derive_seed(s.base_seed, tag(s, "place/r" + std::to_string(robots) + "/s" + std::to_string(si)));
}

std::shared_ptr<const WarehouseMap> make_map(const ExperimentSpec& spec) {
    return std::make_shared<const WarehouseMap>(
        generate_map(spec.block_rows, spec.block_cols, spec.stations));
}

TypeDistribution make_dist(const ExperimentSpec& spec, const WarehouseMap& map, int n_c, int si) {
    Rng rng(dist_seed(spec, n_c, si));
    return random_distribution(int(map.stations.size()), n_c, rng);
}

struct SolveResult {
    BinAssignment assignment;
    bool optimal = true;
};

SolveResult solve(const std::string& solver, const CostModel& cost, const ExperimentSpec& spec,
                  uint64_t seed) {
    if (solver == "random") return {assign_random(cost.n_b, cost.n_c, seed), true};
    if (solver == "hungarian") return {assign_hungarian(cost), true};
    if (solver == "greedy") return {assign_greedy(cost, seed), true};
    if (solver == "ga") return {assign_genetic(cost, spec.ga, seed), true};
    if (solver == "exact") {
        ExactResult r = assign_exact(cost, spec.exact_time_limit);
        return {std::move(r.assignment), r.optimal};
    }
    throw ConfigError("unknown assignment solver: " + solver);
}

double mean(const std::vector<double>& v) {
    if (v.empty()) return 0;
    double s = 0;
    for (double x : v) s += x;
    return s / double(v.size());
}

double stddev(const std::vector<double>& v) {
    if (v.size() < 2) return 0;
    double m = mean(v), s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / double(v.size() - 1));
}

std::string fmt(double x, int prec) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, x);
    return buf;
}

std::string hash_hex(const std::string& text) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(text)));
    return buf;
}

nlohmann::json provenance(const ExperimentSpec& spec) {
    return {{"experiment", nlohmann::json::parse(save_experiment(spec))},
            {"config_hash", hash_hex(save_experiment(spec))},
            {"commit", MRPS_COMMIT}};
}

} // namespace

void ExperimentSpec::validate() const {
    if (kind != "assignment" && kind != "throughput")
        throw ConfigError("experiment kind must be 'assignment' or 'throughput'");
    if (block_rows < 1 || block_cols < 1) throw ConfigError("block counts must be positive");
    if (stations < 1) throw ConfigError("station count must be positive");
    if (seeds < 1) throw ConfigError("seeds per cell must be at least 1");
    if (steps < 1) throw ConfigError("steps must be at least 1");
    if (warmup < 0 || warmup > steps) throw ConfigError("warmup must lie in [0, steps]");
    if (type_counts.empty()) throw ConfigError("type_counts must not be empty");
    const int n_b = block_rows * block_cols;
    for (int c : type_counts)
        if (c < 1 || c > n_b)
            throw ConfigError("type count " + std::to_string(c) + " outside [1, " +
                              std::to_string(n_b) + "]");
    if (kind == "assignment") {
        if (solvers.empty()) throw ConfigError("assignment experiment needs solvers");
        for (const auto& s : solvers)
            if (!kSolvers.count(s)) throw ConfigError("unknown assignment solver: " + s);
    } else {
        if (!kSolvers.count(throughput_solver))
            throw ConfigError("unknown assignment solver: " + throughput_solver);
        if (planners.empty()) throw ConfigError("throughput experiment needs planners");
        for (const auto& p : planners) planner_mode(p);
        if (robot_counts.empty()) throw ConfigError("throughput experiment needs robot counts");
        for (int n : robot_counts)
            if (n < 1) throw ConfigError("robot counts must be positive");
    }
    if (focal_w < 1.0) throw ConfigError("focal weight must be at least 1");
    if (ga.iterations < 1 || ga.population < 2 || ga.mutation_rate < 0 || ga.mutation_rate > 1)
        throw ConfigError("bad genetic-algorithm parameters");
}

PlanMode planner_mode(const std::string& name) {
    if (name == "pry") return PlanMode::Plain;
    if (name == "epry-random") return PlanMode::Diversified;
    if (name == "epry-focal" || name == "epry") return PlanMode::Focal;
    throw ConfigError("unknown planner: " + name + " (expected pry, epry-random or epry-focal)");
}

ExperimentSpec preset_experiment(const std::string& name) {
    ExperimentSpec s;
    s.name = name;
    if (name == "fig5") {
        s.kind = "assignment";
        s.block_rows = 4;
        s.block_cols = 9;
        s.stations = 12;
        s.type_counts = {10, 20, 30, 36};
        s.solvers = {"random", "greedy", "ga", "exact", "hungarian"};
    } else if (name == "fig6") {
        s.kind = "throughput";
        s.block_rows = 4;
        s.block_cols = 9;
        s.stations = 12;
        s.type_counts = {20};
        s.robot_counts = {10, 20, 30, 40, 50, 60};
    } else if (name == "fig7") {
        s.kind = "throughput";
        s.block_rows = 10;
        s.block_cols = 20;
        s.stations = 20;
        s.type_counts = {100};
        s.robot_counts = {50, 100, 200, 300, 400};
    } else if (name == "fig8") {
        s.kind = "throughput";
        s.block_rows = 15;
        s.block_cols = 30;
        s.stations = 30;
        s.type_counts = {200};
        s.robot_counts = {100, 200, 300};
    } else {
        throw ConfigError("unknown experiment preset: " + name +
                          " (expected fig5, fig6, fig7 or fig8)");
    }
    s.validate();
    return s;
}

std::string save_experiment(const ExperimentSpec& spec) {
    nlohmann::json j{
        {"name", spec.name},
        {"kind", spec.kind},
        {"block_rows", spec.block_rows},
        {"block_cols", spec.block_cols},
        {"stations", spec.stations},
        {"type_counts", spec.type_counts},
        {"solvers", spec.solvers},
        {"throughput_solver", spec.throughput_solver},
        {"planners", spec.planners},
        {"robot_counts", spec.robot_counts},
        {"seeds", spec.seeds},
        {"steps", spec.steps},
        {"warmup", spec.warmup},
        {"focal_w", spec.focal_w},
        {"exact_time_limit", spec.exact_time_limit},
        {"ga",
         {{"iterations", spec.ga.iterations},
          {"population", spec.ga.population},
          {"mutation_rate", spec.ga.mutation_rate}}},
        {"base_seed", spec.base_seed},
    };
    return j.dump(2);
}

ExperimentSpec load_experiment(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("experiment file is not valid JSON: ") + e.what());
    }
    ExperimentSpec s;
    try {
        s.name = j.value("name", s.name);
        s.kind = j.value("kind", s.kind);
        s.block_rows = j.value("block_rows", s.block_rows);
        s.block_cols = j.value("block_cols", s.block_cols);
        s.stations = j.value("stations", s.stations);
        s.type_counts = j.value("type_counts", s.type_counts);
        s.solvers = j.value("solvers", s.solvers);
        s.throughput_solver = j.value("throughput_solver", s.throughput_solver);
        s.planners = j.value("planners", s.planners);
        s.robot_counts = j.value("robot_counts", s.robot_counts);
        s.seeds = j.value("seeds", s.seeds);
        s.steps = j.value("steps", s.steps);
        s.warmup = j.value("warmup", s.warmup);
        s.focal_w = j.value("focal_w", s.focal_w);
        s.exact_time_limit = j.value("exact_time_limit", s.exact_time_limit);
        if (j.contains("ga")) {
            s.ga.iterations = j["ga"].value("iterations", s.ga.iterations);
            s.ga.population = j["ga"].value("population", s.ga.population);
            s.ga.mutation_rate = j["ga"].value("mutation_rate", s.ga.mutation_rate);
        }
        s.base_seed = j.value("base_seed", s.base_seed);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("experiment field has the wrong type: ") + e.what());
    }
    s.validate();
    return s;
}

nlohmann::json metrics_to_json(const Metrics& met, bool include_timing) {
    nlohmann::json j{
        {"deliveries", met.deliveries},
        {"throughput", met.throughput},
        {"per_type", met.per_type},
        {"mean_task_distance", met.mean_task_distance},
        {"waits", met.waits},
        {"conflicts", met.conflicts},
        {"cycles", met.cycles},
        {"max_task_age", met.max_task_age},
        {"aborted_deadlock", met.aborted_deadlock},
        {"deadlock_robot", met.deadlock_robot},
        {"steps_run", met.steps_run},
        {"warmup", met.warmup},
    };
    if (include_timing) j["mean_step_ms"] = met.mean_step_ms;
    return j;
}

double run_assignment_cell(const ExperimentSpec& spec, const std::string& solver, int n_c,
                           int seed_index) {
    auto map = make_map(spec);
    TypeDistribution dist = make_dist(spec, *map, n_c, seed_index);
    CostModel cost = CostModel::build(*map, dist);
    SolveResult r = solve(solver, cost, spec, solver_seed(spec, solver, n_c, seed_index));
    return average_cost(r.assignment, cost);
}

Metrics run_throughput_cell(const ExperimentSpec& spec, const std::string& planner, int robots,
                            int seed_index) {
    auto map = make_map(spec);
    auto net = std::make_shared<const RoadNetwork>(orient(map));
    const int n_c = spec.type_counts.front();
    TypeDistribution dist = make_dist(spec, *map, n_c, seed_index);
    CostModel cost = CostModel::build(*map, dist);
    SolveResult sr = solve(spec.throughput_solver, cost, spec,
                           solver_seed(spec, spec.throughput_solver, n_c, seed_index));
    SimConfig cfg;
    cfg.net = net;
    cfg.dist = std::move(dist);
    cfg.assignment = std::move(sr.assignment);
    cfg.robots = robots;
    cfg.horizon = spec.steps;
    cfg.warmup = spec.warmup;
    cfg.mode = planner_mode(planner);
    cfg.focal_w = spec.focal_w;
    cfg.seeds = {parcel_seed(spec, robots, seed_index),
                 planrng_seed(spec, planner, robots, seed_index),
                 placement_seed(spec, robots, seed_index)};
    return run(cfg).metrics;
}

BenchResult run_assignment_benchmark(const ExperimentSpec& spec) {
    spec.validate();
    if (spec.kind != "assignment") throw ConfigError("spec is not an assignment experiment");
    BenchResult result;
    result.spec = spec;
    auto map = make_map(spec);
    const int n_b = int(map->bins.size());

    nlohmann::json cells = nlohmann::json::array();
    std::string csv = "solver,n_c,seeds,mean_cost,stddev_cost,mean_wall_ms,stddev_wall_ms,timeouts\n";

    for (int n_c : spec.type_counts) {
        std::vector<TypeDistribution> dists;
        std::vector<CostModel> costs;
        for (int si = 0; si < spec.seeds; si++) {
            dists.push_back(make_dist(spec, *map, n_c, si));
            costs.push_back(CostModel::build(*map, dists.back()));
        }
        for (const auto& solver : spec.solvers) {
            if (solver == "hungarian" && n_c != n_b) continue;
            AssignmentCell cell;
            cell.solver = solver;
            cell.n_c = n_c;
            for (int si = 0; si < spec.seeds; si++) {
                const auto t0 = std::chrono::steady_clock::now();
                SolveResult r =
                    solve(solver, costs[size_t(si)], spec, solver_seed(spec, solver, n_c, si));
                const double ms = std::chrono::duration<double, std::milli>(
                                      std::chrono::steady_clock::now() - t0)
                                      .count();
                cell.costs.push_back(average_cost(r.assignment, costs[size_t(si)]));
                cell.wall_ms.push_back(ms);
                cell.optimal.push_back(r.optimal);
                if (!r.optimal) cell.timeouts++;
            }
            cell.mean_cost = mean(cell.costs);
            cell.stddev_cost = stddev(cell.costs);
            cell.mean_ms = mean(cell.wall_ms);
            cell.stddev_ms = stddev(cell.wall_ms);
            csv += solver + "," + std::to_string(n_c) + "," + std::to_string(spec.seeds) + "," +
                   fmt(cell.mean_cost, 6) + "," + fmt(cell.stddev_cost, 6) + "," +
                   fmt(cell.mean_ms, 3) + "," + fmt(cell.stddev_ms, 3) + "," +
                   std::to_string(cell.timeouts) + "\n";
            cells.push_back({{"solver", solver},
                             {"n_c", n_c},
                             {"costs", cell.costs},
                             {"optimal", cell.optimal},
                             {"timeouts", cell.timeouts}});
            result.assignment_cells.push_back(std::move(cell));
        }
    }
    result.csv = std::move(csv);
    result.index = provenance(spec);
    result.index["kind"] = "assignment";
    result.index["cells"] = std::move(cells);
    return result;
}

BenchResult run_throughput_benchmark(const ExperimentSpec& spec) {
    spec.validate();
    if (spec.kind != "throughput") throw ConfigError("spec is not a throughput experiment");
    BenchResult result;
    result.spec = spec;
    auto map = make_map(spec);
    auto net = std::make_shared<const RoadNetwork>(orient(map));
    const int n_c = spec.type_counts.front();

    // one instance (distribution + assignment) per seed, shared across the
    // planner x robot-count grid so comparisons are paired
    std::vector<TypeDistribution> dists;
    std::vector<BinAssignment> assignments;
    for (int si = 0; si < spec.seeds; si++) {
        dists.push_back(make_dist(spec, *map, n_c, si));
        CostModel cost = CostModel::build(*map, dists.back());
        assignments.push_back(
            solve(spec.throughput_solver, cost, spec,
                  solver_seed(spec, spec.throughput_solver, n_c, si))
                .assignment);
    }

    nlohmann::json cells = nlohmann::json::array();
    std::string csv =
        "planner,assignment_solver,robots,seeds,mean_throughput,stddev_throughput,mean_step_ms,"
        "deadlocks\n";
    for (const auto& planner : spec.planners) {
        for (int robots : spec.robot_counts) {
            ThroughputCell cell;
            cell.planner = planner;
            cell.solver = spec.throughput_solver;
            cell.robots = robots;
            nlohmann::json runs = nlohmann::json::array();
            std::vector<double> tps, step_ms;
            for (int si = 0; si < spec.seeds; si++) {
                SimConfig cfg;
                cfg.net = net;
                cfg.dist = dists[size_t(si)];
                cfg.assignment = assignments[size_t(si)];
                cfg.robots = robots;
                cfg.horizon = spec.steps;
                cfg.warmup = spec.warmup;
                cfg.mode = planner_mode(planner);
                cfg.focal_w = spec.focal_w;
                cfg.seeds = {parcel_seed(spec, robots, si), planrng_seed(spec, planner, robots, si),
                             placement_seed(spec, robots, si)};
                Metrics met = run(cfg).metrics;
                if (met.aborted_deadlock) cell.deadlocks++;
                tps.push_back(met.throughput);
                step_ms.push_back(met.mean_step_ms);
                runs.push_back(metrics_to_json(met, false));
                cell.runs.push_back(std::move(met));
            }
            cell.mean_throughput = mean(tps);
            cell.stddev_throughput = stddev(tps);
            cell.mean_step_ms = mean(step_ms);
            csv += planner + "," + spec.throughput_solver + "," + std::to_string(robots) + "," +
                   std::to_string(spec.seeds) + "," + fmt(cell.mean_throughput, 6) + "," +
                   fmt(cell.stddev_throughput, 6) + "," + fmt(cell.mean_step_ms, 3) + "," +
                   std::to_string(cell.deadlocks) + "\n";
            cells.push_back({{"planner", planner},
                             {"solver", spec.throughput_solver},
                             {"robots", robots},
                             {"runs", std::move(runs)},
                             {"deadlocks", cell.deadlocks}});
            result.throughput_cells.push_back(std::move(cell));
        }
    }
    result.csv = std::move(csv);
    result.index = provenance(spec);
    result.index["kind"] = "throughput";
    result.index["cells"] = std::move(cells);
    return result;
}

BenchResult run_experiment(const ExperimentSpec& spec) {
    return spec.kind == "assignment" ? run_assignment_benchmark(spec)
                                     : run_throughput_benchmark(spec);
}

void write_benchmark_outputs(const BenchResult& result, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    {
        std::ofstream csv(fs::path(out_dir) / (result.spec.name + ".csv"));
        if (!csv) throw ConfigError("cannot write into " + out_dir);
        csv << result.csv;
    }
    {
        std::ofstream idx(fs::path(out_dir) / (result.spec.name + "_index.json"));
        if (!idx) throw ConfigError("cannot write into " + out_dir);
        idx << result.index.dump(2) << "\n";
    }
}

} // namespace mrps
