#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mrps/bench.hpp"

#ifndef MRPS_COMMIT
#define MRPS_COMMIT "unknown"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int verbosity = 1;

void note(const std::string& msg) {
    if (verbosity >= 1) std::cerr << msg << "\n";
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw mrps::ConfigError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// relative outputs land inside the output directory; absolute paths are honored
fs::path resolve_out(const std::string& out_dir, const std::string& path) {
    fs::path p(path);
    if (p.is_absolute()) return p;
    fs::path dir(out_dir);
    fs::create_directories(dir);
    return dir / p;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw mrps::ConfigError("cannot write " + path.string());
    out << content;
}

void emit(const std::string& out_dir, const std::string& out, const std::string& content) {
    if (out.empty() || out == "-") {
        std::cout << content;
        return;
    }
    fs::path p = resolve_out(out_dir, out);
    write_file(p, content);
    note("wrote " + p.string());
}

mrps::Coord parse_coord(const std::string& text) {
    int r, c;
    char extra;
    if (std::sscanf(text.c_str(), "%d,%d%c", &r, &c, &extra) != 2)
        throw mrps::ConfigError("expected a row,col pair, got '" + text + "'");
    return {r, c};
}

mrps::BinAssignment parse_assignment(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw mrps::ConfigError(path + " is not valid JSON: " + e.what());
    }
    if (j.is_object() && j.contains("assignment")) j = j["assignment"];
    if (!j.is_array()) throw mrps::ConfigError(path + " holds no assignment array");
    mrps::BinAssignment a;
    for (const auto& v : j) a.types.push_back(v.get<int>());
    return a;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-robot parcel sorting: maps, road networks, bin assignment, simulation"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string("mrps 0.1.0 (") + MRPS_COMMIT + ")");

    uint64_t global_seed = 1;
    std::string out_dir = std::getenv("MRPS_OUT_DIR") ? std::getenv("MRPS_OUT_DIR") : ".";
    bool quiet = false;
    app.add_option("--seed", global_seed, "global seed; sub-seeds derive from it per domain");
    app.add_option("--out-dir", out_dir, "directory for relative output paths")
        ->envname("MRPS_OUT_DIR");
    app.add_flag("-q,--quiet", quiet, "suppress progress notes");
    app.add_flag_function("-v,--verbose", [](int64_t) { verbosity = 2; }, "chatty progress notes");

    auto* gen = app.add_subcommand("gen-map", "generate a warehouse map");
    int block_rows = 1, block_cols = 1, station_count = 1;
    std::vector<std::string> station_at;
    std::string gen_out;
    gen->add_option("--block-rows", block_rows, "3x3 block rows")->required();
    gen->add_option("--block-cols", block_cols, "3x3 block columns")->required();
    gen->add_option("--stations", station_count, "station count, evenly spaced on the border");
    gen->add_option("--station-at", station_at, "explicit station cell row,col (repeatable)");
    gen->add_option("-o,--out", gen_out, "output file (default stdout)");

    auto* assign = app.add_subcommand("assign", "compute a bin-to-type assignment");
    std::string a_map, a_dist, a_solver = "greedy", a_out;
    mrps::GAParams ga;
    double time_limit = 0;
    assign->add_option("--map", a_map, "map file")->required();
    assign->add_option("--dist", a_dist, "station x type probability file")->required();
    assign->add_option("--solver", a_solver, "random | hungarian | greedy | ga | exact");
    assign->add_option("--ga-iters", ga.iterations, "genetic iterations");
    assign->add_option("--ga-pop", ga.population, "genetic population");
    assign->add_option("--ga-mutation", ga.mutation_rate, "genetic mutation rate");
    assign->add_option("--time-limit", time_limit, "exact solver budget in seconds (0 = none)");
    assign->add_option("-o,--out", a_out, "report file (default stdout)");

    auto* sim = app.add_subcommand("simulate", "run the lifelong sorting simulation");
    std::string s_map, s_dist, s_assign, s_planner = "pry", s_out, s_trace;
    int robots = 1, steps = 500, warmup = 0;
    double focal_w = 1.5, liveness = 10.0;
    sim->add_option("--map", s_map, "map file")->required();
    sim->add_option("--dist", s_dist, "station x type probability file")->required();
    sim->add_option("--assignment", s_assign, "assignment report or bare JSON array")->required();
    sim->add_option("--robots", robots, "robot count")->required();
    sim->add_option("--steps", steps, "timesteps to simulate");
    sim->add_option("--warmup", warmup, "steps excluded from metrics");
    sim->add_option("--planner", s_planner, "pry | epry-random | epry-focal");
    sim->add_option("--focal-w", focal_w, "suboptimality bound for epry-focal");
    sim->add_option("--liveness-factor", liveness, "abort when a task ages past factor * diameter");
    sim->add_option("-o,--out", s_out, "metrics JSON file (default stdout)");
    sim->add_option("--trace", s_trace, "per-step robot positions CSV");

    auto* bench = app.add_subcommand("benchmark", "run an experiment table");
    std::string experiment;
    int seed_override = 0;
    bench->add_option("--experiment", experiment, "fig5 | fig6 | fig7 | fig8 | spec.json")
        ->required();
    bench->add_option("--seeds", seed_override, "runs per table cell");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    if (quiet) verbosity = 0;

    try {
        if (gen->parsed()) {
            mrps::StationSpec spec = station_count;
            if (!station_at.empty()) {
                std::vector<mrps::Coord> cells;
                for (const auto& s : station_at) cells.push_back(parse_coord(s));
                spec = cells;
            }
            mrps::WarehouseMap map = mrps::generate_map(block_rows, block_cols, spec);
            emit(out_dir, gen_out, mrps::save_map(map));
        } else if (assign->parsed()) {
            mrps::WarehouseMap map = mrps::load_map(read_file(a_map));
            mrps::TypeDistribution dist = mrps::load_distribution(read_file(a_dist));
            if (dist.n_p != int(map.stations.size()))
                throw mrps::ConfigError("distribution rows (" + std::to_string(dist.n_p) +
                                        ") do not match station count (" +
                                        std::to_string(map.stations.size()) + ")");
            mrps::CostModel cost = mrps::CostModel::build(map, dist);
            const uint64_t seed = mrps::derive_seed(global_seed, "assign/" + a_solver);
            note("solver seed: " + std::to_string(seed));
            bool optimal = true;
            const auto t0 = std::chrono::steady_clock::now();
            mrps::BinAssignment result;
            if (a_solver == "random") {
                result = mrps::assign_random(cost.n_b, cost.n_c, seed);
            } else if (a_solver == "hungarian") {
                result = mrps::assign_hungarian(cost);
            } else if (a_solver == "greedy") {
                result = mrps::assign_greedy(cost, seed);
            } else if (a_solver == "ga") {
                result = mrps::assign_genetic(cost, ga, seed);
            } else if (a_solver == "exact") {
                mrps::ExactResult er = mrps::assign_exact(cost, time_limit);
                result = std::move(er.assignment);
                optimal = er.optimal;
            } else {
                throw mrps::ConfigError("unknown solver: " + a_solver);
            }
            const double ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
            json report{{"solver", a_solver},      {"seed", seed},
                        {"n_b", cost.n_b},         {"n_c", cost.n_c},
                        {"assignment", result.types},
                        {"cost", mrps::average_cost(result, cost)},
                        {"optimal", optimal},      {"wall_ms", ms}};
            emit(out_dir, a_out, report.dump(2) + "\n");
        } else if (sim->parsed()) {
            auto map = std::make_shared<const mrps::WarehouseMap>(mrps::load_map(read_file(s_map)));
            mrps::SimConfig cfg;
            cfg.net = std::make_shared<const mrps::RoadNetwork>(mrps::orient(map));
            cfg.dist = mrps::load_distribution(read_file(s_dist));
            cfg.assignment = parse_assignment(s_assign);
            cfg.robots = robots;
            cfg.horizon = steps;
            cfg.warmup = warmup;
            cfg.mode = mrps::planner_mode(s_planner);
            cfg.focal_w = focal_w;
            cfg.liveness_factor = liveness;
            cfg.record_trace = !s_trace.empty();
            cfg.seeds = {mrps::derive_seed(global_seed, "sim/parcel"),
                         mrps::derive_seed(global_seed, "sim/planner"),
                         mrps::derive_seed(global_seed, "sim/placement")};
            note("seeds: parcel=" + std::to_string(cfg.seeds.parcel) +
                 " planner=" + std::to_string(cfg.seeds.planner) +
                 " placement=" + std::to_string(cfg.seeds.placement));
            mrps::SimResult result = mrps::run(cfg);
            json out = mrps::metrics_to_json(result.metrics, true);
            out["seeds"] = {{"parcel", cfg.seeds.parcel},
                            {"planner", cfg.seeds.planner},
                            {"placement", cfg.seeds.placement}};
            emit(out_dir, s_out, out.dump(2) + "\n");
            if (!s_trace.empty()) {
                std::string csv = "step,robot,row,col,carried\n";
                for (const auto& row : result.trace)
                    csv += std::to_string(row.step) + "," + std::to_string(row.robot) + "," +
                           std::to_string(row.row) + "," + std::to_string(row.col) + "," +
                           std::to_string(row.carried) + "\n";
                emit(out_dir, s_trace, csv);
            }
            if (result.metrics.aborted_deadlock) {
                std::cerr << "deadlock: robot " << result.metrics.deadlock_robot
                          << " exceeded the task-age bound at step " << result.metrics.steps_run
                          << "\n";
                return 3;
            }
        } else if (bench->parsed()) {
            mrps::ExperimentSpec spec;
            if (experiment == "fig5" || experiment == "fig6" || experiment == "fig7" ||
                experiment == "fig8")
                spec = mrps::preset_experiment(experiment);
            else
                spec = mrps::load_experiment(read_file(experiment));
            if (seed_override > 0) spec.seeds = seed_override;
            spec.validate();
            note("experiment " + spec.name + ": base seed " + std::to_string(spec.base_seed) +
                 ", " + std::to_string(spec.seeds) + " seeds per cell");
            mrps::BenchResult result = mrps::run_experiment(spec);
            mrps::write_benchmark_outputs(result, out_dir);
            note("wrote " + (fs::path(out_dir) / (spec.name + ".csv")).string() + " and " +
                 (fs::path(out_dir) / (spec.name + "_index.json")).string());
            if (verbosity >= 2) std::cout << result.csv;
        }
        return 0;
    } catch (const mrps::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const mrps::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
