#pragma once
#include <cstdint>
#include <memory>
#include <vector>

#include "mrps/assignment.hpp"
#include "mrps/planner.hpp"

namespace mrps {

struct SimSeeds {
    uint64_t parcel = 1;
    uint64_t planner = 2;
    uint64_t placement = 3;
};

struct SimConfig {
    std::shared_ptr<const RoadNetwork> net;
    TypeDistribution dist;
    BinAssignment assignment;
    int robots = 1;
    int horizon = 500;
    SimSeeds seeds;
    PlanMode mode = PlanMode::Plain;
    double focal_w = 1.5;
    int warmup = 0;              // steps excluded from delivery/cost metrics
    double liveness_factor = 10.0; // abort when a task ages past factor * directed diameter
    bool record_trace = false;

    void validate() const;
};

struct Metrics {
    int64_t deliveries = 0;
    double throughput = 0.0; // deliveries / measured steps
    std::vector<int64_t> per_type;
    double mean_task_distance = 0.0; // mean issue-to-goal directed distance of completed legs
    int64_t waits = 0;
    int64_t conflicts = 0;
    int64_t cycles = 0;
    int64_t max_task_age = 0;
    double mean_step_ms = 0.0; // wall time; excluded from canonical comparisons
    bool aborted_deadlock = false;
    int deadlock_robot = -1;
    int steps_run = 0;
    int warmup = 0;
};

struct TraceRow {
    int step;
    int robot;
    int row;
    int col;
    int carried; // 0 when empty
};

struct SimResult {
    Metrics metrics;
    std::vector<TraceRow> trace;
};

// categorical draw from the station's type row; returns a 1-based type
int sample_parcel(int station, const TypeDistribution& dist, Rng& rng);

// directed-distance argmin over candidates, ties to the lexicographically smaller cell
Coord nearest_goal(Coord position, const std::vector<Coord>& candidates, const RoadNetwork& net);

SimResult run(const SimConfig& config);

} // namespace mrps
