#pragma once
#include <cstdint>
#include <deque>
#include <optional>
#include <unordered_map>
#include <vector>

#include "mrps/roadnet.hpp"
#include "mrps/rng.hpp"

namespace mrps {

enum class Mark : uint8_t { Unmarked = 0, MoveForward = 1, Wait = 2 };

enum class PlanMode : uint8_t { Plain = 0, Diversified = 1, Focal = 2 };

struct RobotState {
    int id = 0;
    Coord position{};
    std::optional<int> carried;      // parcel type, 1-based
    bool delivered_flag = true;      // false while a loaded parcel awaits dropoff
    Coord goal{};
    std::deque<Coord> path;          // upcoming vertices; front is next step's cell
    Mark decision = Mark::Unmarked;

    int remaining_steps() const { return int(path.size()); }
    bool intends_to_move() const { return !path.empty(); }
};

// time-indexed cells other robots have committed to; queried by the focal planner
struct AnnouncedPaths {
    std::unordered_map<uint64_t, int> occupancy; // (cell index, time) -> robot count
    int cols = 0;

    static uint64_t key(int cell, int t) { return (uint64_t(t) << 32) | uint32_t(cell); }
    void add_path(const WarehouseMap& map, Coord start, const std::deque<Coord>& path);
    void remove_path(const WarehouseMap& map, Coord start, const std::deque<Coord>& path);
    int count(int cell, int t) const {
        auto it = occupancy.find(key(cell, t));
        return it == occupancy.end() ? 0 : it->second;
    }
};

// Plain: deterministic shortest path (lexicographic successor tie-break).
// Diversified: uniform sample over all shortest paths.
// Focal: bounded-suboptimal (<= w * optimal) search minimizing collisions with
// announced paths.
std::deque<Coord> plan_initial_path(const RobotState& robot, const RoadNetwork& net, PlanMode mode,
                                    const AnnouncedPaths& announced, Rng& rng, double focal_w = 1.5);

struct StepOutcome {
    std::vector<std::pair<int, Coord>> moves; // robot id -> new cell
    std::vector<int> waits;
    int cycles_detected = 0;     // robots granted the move by cycle membership
    int conflicts_resolved = 0;  // pairwise priority contests
};

// One synchronized timestep: marks every robot MoveForward or Wait, then
// advances the movers. Robots with empty paths wait in place.
StepOutcome step(std::vector<RobotState>& robots, const RoadNetwork& net, Rng& rng);

// true iff following next-vertex occupancy links from `robot` returns to it and
// every robot on the loop intends to move
bool detect_cycle(const RobotState& robot, const std::vector<RobotState>& robots,
                  const std::vector<int>& occupant_by_cell, const WarehouseMap& map);

// true if a beats b: undelivered parcel first, then more remaining steps, then coin
bool resolve_priority(const RobotState& a, const RobotState& b, Rng& rng);

} // namespace mrps
