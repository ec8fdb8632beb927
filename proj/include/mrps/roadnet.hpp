#pragma once
#include <memory>
#include <vector>

#include "mrps/gridworld.hpp"

namespace mrps {

// Strong orientation of a warehouse map. Block-structured maps get the
// alternating-street layout; anything else that is still 2-edge-connected falls
// back to a depth-first-search orientation (strong, but without the street
// detour behavior; detour_bounded reports which case applies).
class RoadNetwork {
public:
    std::shared_ptr<const WarehouseMap> map;
    bool detour_bounded = false;

    bool allowed(Coord from, Dir d) const { return (out_mask_[map->index(from)] & dir_bit(d)) != 0; }
    uint8_t out_mask(Coord p) const { return out_mask_[map->index(p)]; }

    // exact directed distance field TO `goal` (reverse BFS); goal must be a
    // station or bin-access cell, whose fields are precomputed
    const std::vector<int32_t>& field_to(Coord goal) const;
    bool has_field_to(Coord goal) const { return field_slot_[map->index(goal)] >= 0; }

    // forward BFS field FROM src over permitted moves (src must be non-Bin)
    std::vector<int32_t> field_from(Coord src) const;

    int directed_diameter() const { return diameter_; }

    // orthogonal non-Bin neighbors of a bin, lexicographic order
    std::vector<Coord> access_cells(Coord bin) const;

    friend RoadNetwork orient(std::shared_ptr<const WarehouseMap> map);

private:
    std::vector<uint8_t> out_mask_;
    std::vector<int32_t> field_slot_;            // cell -> index into to_fields_, or -1
    std::vector<std::vector<int32_t>> to_fields_;
    int diameter_ = 0;

    void build_fields();
    void check_strong_connectivity() const;
};

RoadNetwork orient(std::shared_ptr<const WarehouseMap> map);

// shortest permitted path length; `from` must be non-Bin; a Bin target costs
// 1 + best directed-reachable access neighbor; kUnreachable if none
int directed_distance(const RoadNetwork& net, Coord from, Coord to);

// text grid of per-cell arrows for inspection: > < ^ v plus B and S
std::string dump_arrows(const RoadNetwork& net);

} // namespace mrps
