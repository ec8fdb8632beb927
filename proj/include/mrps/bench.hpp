#pragma once
#include <string>
#include <vector>

#include "json.hpp"
#include "mrps/simulator.hpp"

namespace mrps {

struct ExperimentSpec {
    std::string name = "custom";
    std::string kind = "throughput"; // "assignment" or "throughput"
    int block_rows = 4;
    int block_cols = 9;
    int stations = 12;
    std::vector<int> type_counts = {20};
    std::vector<std::string> solvers = {"random", "greedy", "ga"}; // assignment benchmarks
    std::string throughput_solver = "ga";
    std::vector<std::string> planners = {"pry", "epry-focal"};
    std::vector<int> robot_counts = {10, 20, 30};
    int seeds = 5; // runs per table cell
    int steps = 500;
    int warmup = 0;
    double focal_w = 1.5;
    double exact_time_limit = 2.0; // seconds per exact solve
    GAParams ga;
    uint64_t base_seed = 12345;

    void validate() const;
};

// fig5 (assignment cost), fig6 (14x29 throughput), fig7 (32x62), fig8 (47x92)
ExperimentSpec preset_experiment(const std::string& name);
ExperimentSpec load_experiment(const std::string& json_text);
std::string save_experiment(const ExperimentSpec& spec);

// pry -> Plain, epry-random -> Diversified, epry-focal / epry -> Focal
PlanMode planner_mode(const std::string& name);

// canonical metric payload; timing is opt-in so comparisons stay reproducible
nlohmann::json metrics_to_json(const Metrics& met, bool include_timing);

struct AssignmentCell {
    std::string solver;
    int n_c = 0;
    std::vector<double> costs;   // per seed index
    std::vector<double> wall_ms; // per seed index
    std::vector<bool> optimal;   // exact solver completion flags
    int timeouts = 0;
    double mean_cost = 0, stddev_cost = 0;
    double mean_ms = 0, stddev_ms = 0;
};

struct ThroughputCell {
    std::string planner;
    std::string solver;
    int robots = 0;
    std::vector<Metrics> runs; // per seed index
    int deadlocks = 0;
    double mean_throughput = 0, stddev_throughput = 0;
    double mean_step_ms = 0;
};

struct BenchResult {
    ExperimentSpec spec;
    std::vector<AssignmentCell> assignment_cells;
    std::vector<ThroughputCell> throughput_cells;
    std::string csv;
    nlohmann::json index; // provenance: spec, config hash, commit, per-cell seeds + metrics
};

BenchResult run_assignment_benchmark(const ExperimentSpec& spec);
BenchResult run_throughput_benchmark(const ExperimentSpec& spec);
BenchResult run_experiment(const ExperimentSpec& spec);

// replay a single table run exactly as the benchmark executed it
double run_assignment_cell(const ExperimentSpec& spec, const std::string& solver, int n_c,
                           int seed_index);
Metrics run_throughput_cell(const ExperimentSpec& spec, const std::string& planner, int robots,
                            int seed_index);

// writes <name>.csv and <name>_index.json under out_dir (created if missing)
void write_benchmark_outputs(const BenchResult& result, const std::string& out_dir);

} // namespace mrps
